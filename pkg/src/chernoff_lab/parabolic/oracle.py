"""Reference solutions of ``u_t = a u'' + b u' + c u`` used as ground truth.

Constant coefficients: Gauss-Hermite quadrature of the Gaussian kernel,

    u(t, x) = e^{ct} / sqrt(pi) * int f(x + bt + 2 sqrt(at) y) e^{-y^2} dy.

Variable coefficients: Crank-Nicolson in time with fourth-order central
differences in space, ghost nodes beyond the ends copying the end value,
and Richardson extrapolation in the time step.  Spatial refinement halves
h until two successive levels agree to the requested accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import DomainError, OracleAccuracyError
from .operator import ParabolicCoefficients

CN_TARGET = 1e-8
GH_TARGET = 1e-12
H_START = 0.05


@dataclass(frozen=True)
class OracleResult:
    xs: np.ndarray
    values: np.ndarray
    achieved: float
    level: int
    method: str


def gauss_hermite(coeffs: ParabolicCoefficients, f, t: float, xs, target: float = GH_TARGET, max_level: int = 8) -> OracleResult:
    """Kernel quadrature with 32 * 2^level nodes until two levels agree to ``target``."""
    if not coeffs.is_constant():
        raise DomainError("Gauss-Hermite path needs constant coefficients")
    xs = np.asarray(xs, dtype=float)
    a, b, c = (float(getattr(coeffs, k)) for k in ("a", "b", "c"))
    if t == 0:
        return OracleResult(xs, np.asarray(f(xs), dtype=float), 0.0, 0, "identity")
    if a <= 0:
        raise DomainError("need a > 0")
    scale = 2.0 * math.sqrt(a * t)
    prev = None
    diff = math.inf
    for level in range(max_level + 1):
        y, w = np.polynomial.hermite.hermgauss(32 * 2**level)
        pts = xs[:, None] + b * t + scale * y[None, :]
        vals = math.exp(c * t) * (f(pts.ravel()).reshape(pts.shape) @ w) / math.sqrt(math.pi)
        if prev is not None:
            diff = float(np.max(np.abs(vals - prev)))
            if diff <= target:
                return OracleResult(xs, vals, diff, level, "gauss_hermite")
        prev = vals
    raise OracleAccuracyError(f"quadrature levels still differ by {diff:.3g}", achieved=diff, level=max_level)


def _cn_operator(coeffs: ParabolicCoefficients, xs: np.ndarray, h: float) -> sp.csc_matrix:
    """Sparse ``a D2 + b D1 + c`` with ghost nodes equal to the end values."""
    N = xs.size
    a, b, c = coeffs.values(xs)
    w2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    w1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
    rows, cols, data = [], [], []
    for off in range(-2, 3):
        wgt = a * w2[off + 2] + b * w1[off + 2]
        if off == 0:
            wgt = wgt + c
        j = np.clip(np.arange(N) + off, 0, N - 1)
        rows.append(np.arange(N))
        cols.append(j)
        data.append(wgt)
    D = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    return D.tocsc()  # duplicate (clamped) entries are summed


def _crank_nicolson(D: sp.csc_matrix, u0: np.ndarray, t: float, steps: int) -> np.ndarray:
    dt = t / steps
    eye = sp.identity(D.shape[0], format="csc")
    lu = splu((eye - 0.5 * dt * D).tocsc())
    rhs_op = (eye + 0.5 * dt * D).tocsr()
    u = u0.copy()
    for _ in range(steps):
        u = lu.solve(rhs_op @ u)
    return u


def crank_nicolson(
    coeffs: ParabolicCoefficients,
    f,
    t: float,
    x0: float,
    h_out: float,
    count: int,
    pad: float | None = None,
    target: float = CN_TARGET,
    max_level: int = 5,
    cfl: float = 0.25,
) -> OracleResult:
    """Solution at ``x0 + i h_out``, i < count, by refined Crank-Nicolson.

    The computational window extends ``pad`` beyond the output nodes on
    each side (default: twelve diffusion lengths plus the drift distance).
    Level k uses spacing ``h_out / (r0 2^k)``, with r0 the smallest divisor
    giving a spacing of at most ``H_START``, so the output nodes are grid
    nodes at every level.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    out_x = x0 + h_out * np.arange(count)
    if t == 0:
        return OracleResult(out_x, np.asarray(f(out_x), dtype=float), 0.0, 0, "identity")
    norms = coeffs.norms
    if pad is None:
        pad = 12.0 * math.sqrt(2.0 * norms["a"] * t) + norms["b"] * t + 1.0
    k_pad = int(math.ceil(pad / h_out))
    r0 = max(1, int(math.ceil(h_out / H_START - 1e-9)))
    prev = None
    diff = math.inf
    for level in range(max_level + 1):
        r = r0 * 2**level
        h = h_out / r
        xs = x0 + h * np.arange(-k_pad * r, (count - 1 + k_pad) * r + 1)
        D = _cn_operator(coeffs, xs, h)
        steps = max(1, int(math.ceil(t / (cfl * h))))
        u0 = np.asarray(f(xs), dtype=float)
        coarse = _crank_nicolson(D, u0, t, steps)
        fine = _crank_nicolson(D, u0, t, 2 * steps)
        u = (4.0 * fine - coarse) / 3.0
        vals = u[k_pad * r :: r][:count]
        if prev is not None:
            diff = float(np.max(np.abs(vals - prev)))
            if diff <= target:
                return OracleResult(out_x, vals, diff, level, "crank_nicolson")
        prev = vals
    raise OracleAccuracyError(f"refinement levels still differ by {diff:.3g}", achieved=diff, level=max_level)


def oracle_solution(coeffs: ParabolicCoefficients, f, t: float, x0: float, h_out: float, count: int, quality: float | None = None) -> OracleResult:
    """``e^{tA} f`` on an output lattice, by the kernel when coefficients are constant."""
    out_x = x0 + h_out * np.arange(count)
    if coeffs.is_constant():
        return gauss_hermite(coeffs, f, t, out_x, target=quality or GH_TARGET)
    return crank_nicolson(coeffs, f, t, x0, h_out, count, target=quality or CN_TARGET)
