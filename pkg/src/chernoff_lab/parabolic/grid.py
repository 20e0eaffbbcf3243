"""Uniform-grid functions with cubic interpolation and constant extension."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DomainError, ShapeError

# Worst |prod (s - s_k)| / 4! over the 4-point stencils we use, in units of h^4.
# Interior stencils give 9/16/24 = 3/128; clamped edge stencils reach 1/24.
KAPPA = 1.0 / 24.0
MIN_INTERVALS = 4


@dataclass(frozen=True)
class GridFunction:
    """Values on ``x0 + i h``, i = 0..N, extended by the end values.

    ``margin`` is how far beyond either end the constant extension is
    trusted (``inf`` when the represented function really is constant
    there).
    """

    x0: float
    h: float
    values: np.ndarray
    margin: float = math.inf

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < MIN_INTERVALS + 1:
            raise ShapeError(f"need at least {MIN_INTERVALS + 1} nodes, got {vals.size}")
        if not self.h > 0:
            raise DomainError("spacing h must be positive")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def N(self) -> int:
        return self.values.size - 1

    @property
    def x_hi(self) -> float:
        return self.x0 + self.N * self.h

    @property
    def nodes(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.N + 1)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.x0, self.h, values, self.margin)

    def __call__(self, x) -> np.ndarray:
        return cubic_interpolate(self.values, self.x0, self.h, x)

    def sup(self, region: tuple[float, float] | None = None) -> float:
        return float(np.max(np.abs(self.values[self.mask(region)])))

    def mask(self, region: tuple[float, float] | None) -> np.ndarray:
        if region is None:
            return np.ones(self.N + 1, dtype=bool)
        x = self.nodes
        tol = 1e-9 * self.h
        return (x >= region[0] - tol) & (x <= region[1] + tol)

    def fourth_difference(self) -> np.ndarray:
        """|delta^4 f| at interior nodes i = 2..N-2 (zero-padded at the ends)."""
        v = self.values
        out = np.zeros_like(v)
        out[2:-2] = np.abs(v[:-4] - 4 * v[1:-3] + 6 * v[2:-2] - 4 * v[3:-1] + v[4:])
        return out

    def second_difference(self) -> np.ndarray:
        v = self.values
        out = np.zeros_like(v)
        out[1:-1] = np.abs(v[:-2] - 2 * v[1:-1] + v[2:])
        return out


def grid_from_function(f, x_lo: float, x_hi: float, h: float | None = None, N: int | None = None, margin: float | None = None) -> GridFunction:
    """Sample ``f`` on a uniform grid; give exactly one of ``h`` and ``N``.

    When ``h`` is given, ``x_hi`` is rounded up to a whole number of steps.
    The trusted margin defaults to ``inf`` when ``f`` is flat outside the
    grid, otherwise 0.
    """
    if (h is None) == (N is None):
        raise DomainError("give exactly one of h and N")
    if not x_hi > x_lo:
        raise DomainError("need x_hi > x_lo")
    if h is not None:
        N = max(MIN_INTERVALS, int(math.ceil((x_hi - x_lo) / h - 1e-9)))
    else:
        h = (x_hi - x_lo) / N
    xs = x_lo + h * np.arange(N + 1)
    if margin is None:
        flat = getattr(f, "flat_outside", None)
        margin = math.inf if flat is not None and flat[0] >= x_lo and flat[1] <= xs[-1] else 0.0
    return GridFunction(float(x_lo), float(h), np.asarray(f(xs), dtype=float), margin)


def cubic_interpolate(values: np.ndarray, x0: float, h: float, x) -> np.ndarray:
    """4-point Lagrange interpolation; constant beyond the end nodes.

    The stencil around interval [i, i+1] is i-1..i+2, shifted inward at the
    ends.  Exact at the nodes and for cubics inside the grid.
    """
    v = np.asarray(values, dtype=float)
    N = v.size - 1
    x = np.asarray(x, dtype=float)
    s = np.clip((x - x0) / h, 0.0, float(N))
    i = np.clip(np.floor(s).astype(np.int64) - 1, 0, N - 3)
    u = s - i  # position inside the stencil, in [0, 3]
    w0 = -(u - 1) * (u - 2) * (u - 3) / 6
    w1 = u * (u - 2) * (u - 3) / 2
    w2 = -u * (u - 1) * (u - 3) / 2
    w3 = u * (u - 1) * (u - 2) / 6
    return w0 * v[i] + w1 * v[i + 1] + w2 * v[i + 2] + w3 * v[i + 3]


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights at ``z`` for derivatives 0..m on nodes ``x``.

    Returns an array ``c`` with ``c[k, j]`` the weight of node j in the k-th
    derivative.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((m + 1, n))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


@lru_cache(maxsize=None)
def _edge_stencils(order: int):
    """Unit-spacing one-sided stencils (offsets, weights) for nodes 0 and 1."""
    offsets = np.arange(6, dtype=float)
    return [fornberg_weights(float(j), offsets, 2)[order] for j in (0, 1)]


def derivative_on_grid(g: GridFunction, order: int) -> np.ndarray:
    """4th-order accurate first or second derivative at every node.

    Central 5-point stencils inside, 6-point one-sided stencils at the two
    nodes nearest each end.
    """
    if order not in (1, 2):
        raise DomainError("only first and second derivatives are provided")
    v = g.values
    N = g.N
    if N < 5:
        raise ShapeError("derivatives need at least 6 nodes")
    out = np.empty_like(v)
    if order == 1:
        out[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * g.h)
    else:
        out[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * g.h**2)
    scale = g.h**order
    for j, w in enumerate(_edge_stencils(order)):
        out[j] = w @ v[:6] / scale
        sign = -1.0 if order == 1 else 1.0  # mirrored stencil flips odd derivatives
        out[N - j] = sign * (w @ v[::-1][:6]) / scale
    return out
