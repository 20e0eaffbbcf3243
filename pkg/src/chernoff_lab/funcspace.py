"""Bounded uniformly continuous functions on the real line.

A :class:`Function1D` is a vectorised evaluator plus metadata that the rest
of the package relies on: derivatives (closed forms come from sympy), kinks
of piecewise-linear functions, the interval outside which the function is
constant, and optionally an exact modulus of continuity.

Sup-norms over the line are taken on a finite window; every test function
used here is constant outside a compact set or periodic, so a window that
contains the non-constant part gives the global value.
"""

from __future__ import annotations

import functools
import math
import warnings
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np
import sympy
from scipy import optimize

from .errors import CapabilityError, DomainError, EvaluationError

X = sympy.Symbol("x", real=True)

ArrayFn = Callable[[np.ndarray], np.ndarray]
UNLIMITED = sys.maxsize

KINDS = ("closed_form", "piecewise_linear", "sampled_grid")


@functools.lru_cache(maxsize=1024)
def _lambdified(expr: sympy.Expr, order: int) -> ArrayFn:
    deriv = sympy.diff(expr, X, order) if order else expr
    raw = sympy.lambdify(X, deriv, modules="numpy")

    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(raw(x), dtype=float), x.shape).copy()

    return fn


def _as_array_fn(fn: Callable) -> ArrayFn:
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        try:
            with warnings.catch_warnings():
                # scalar-only callables on 1-element arrays: use the vectorized path
                warnings.simplefilter("error", DeprecationWarning)
                out = np.asarray(fn(x), dtype=float)
        except (TypeError, ValueError, DeprecationWarning):
            out = np.vectorize(lambda s: float(fn(s)), otypes=[float])(x)
        return np.broadcast_to(out, x.shape).copy()

    return wrapped


@dataclass(frozen=True)
class Function1D:
    """A real function on the whole line.

    ``derivatives[k-1]`` is the k-th derivative; closed forms carrying a
    sympy ``expr`` differentiate on demand to any order.
    """

    evaluator: ArrayFn
    kind: str = "closed_form"
    derivatives: tuple[ArrayFn, ...] = ()
    analytic_modulus: Callable[[float], float] | None = None
    bound: float | None = None
    breakpoints: tuple[float, ...] = ()
    flat_outside: tuple[float, float] | None = None
    period: float | None = None
    expr: sympy.Expr | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown function kind {self.kind!r}")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.asarray(self.evaluator(arr), dtype=float)
        if arr.ndim == 0:
            return float(out)
        return out

    @property
    def derivative_order_available(self) -> int:
        if self.expr is not None:
            return UNLIMITED
        return len(self.derivatives)

    def derivative(self, k: int) -> ArrayFn:
        """Return the k-th derivative as an array function."""
        if k < 0:
            raise DomainError("derivative order must be non-negative")
        if k == 0:
            return self.evaluator
        if self.expr is not None:
            return _lambdified(self.expr, k)
        if k <= len(self.derivatives):
            return self.derivatives[k - 1]
        raise CapabilityError(
            f"{self.name or 'function'} provides derivatives up to order "
            f"{len(self.derivatives)}, order {k} requested"
        )

    def shifted(self, s: float) -> Function1D:
        """The translate ``x -> f(x + s)``."""
        s = float(s)
        if s == 0.0:
            return self
        f = self.evaluator
        derivs = tuple(_shift_fn(d, s) for d in self.derivatives)
        flat = None
        if self.flat_outside is not None:
            flat = (self.flat_outside[0] - s, self.flat_outside[1] - s)
        expr = self.expr.subs(X, X + s) if self.expr is not None else None
        return replace(
            self,
            evaluator=_shift_fn(f, s),
            derivatives=derivs,
            breakpoints=tuple(b - s for b in self.breakpoints),
            flat_outside=flat,
            expr=expr,
            name=f"{self.name}(x{s:+g})" if self.name else "",
        )

    def validate(self, window: tuple[float, float], samples: int = 2001) -> None:
        """Spot-check the declared metadata on a sample lattice."""
        xs = np.linspace(window[0], window[1], samples)
        vals = self.evaluator(xs)
        bad = ~np.isfinite(vals)
        if bad.any():
            raise EvaluationError("non-finite value", float(xs[bad][0]))
        if self.bound is not None and np.max(np.abs(vals)) > self.bound * (1 + 1e-12):
            raise DomainError(f"declared bound {self.bound} exceeded on samples")
        if self.analytic_modulus is not None:
            lattice = np.linspace(0.0, window[1] - window[0], 65)
            report = check_modulus_axioms(self.analytic_modulus, lattice)
            if not report.all_pass:
                raise DomainError(f"analytic modulus fails axioms: {report}")


def _shift_fn(fn: ArrayFn, s: float) -> ArrayFn:
    return lambda x: fn(np.asarray(x, dtype=float) + s)


# --- constructors -----------------------------------------------------------


def constant(value: float) -> Function1D:
    value = float(value)
    return from_expr(
        sympy.nsimplify(value),
        analytic_modulus=lambda h: 0.0,
        bound=abs(value),
        flat_outside=(0.0, 0.0),
        name=f"const({value:g})",
    )


def from_expr(expr: sympy.Expr | str, **meta: Any) -> Function1D:
    """Closed-form function from a sympy expression in ``x``."""
    if isinstance(expr, str):
        expr = sympy.sympify(expr, locals={"x": X})
    expr = sympy.sympify(expr)
    meta.setdefault("name", str(expr))
    return Function1D(evaluator=_lambdified(expr, 0), kind="closed_form", expr=expr, **meta)


def piecewise_linear(xs: Sequence[float], ys: Sequence[float], name: str = "") -> Function1D:
    """Linear interpolation through the given knots, constant outside them."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
        raise DomainError("knots must be equal-length 1-d sequences")
    if np.any(np.diff(xs) <= 0):
        raise DomainError("knot abscissae must be strictly increasing")
    slopes = np.diff(ys) / np.diff(xs) if xs.size > 1 else np.zeros(0)

    def evaluate(x):
        return np.interp(np.asarray(x, dtype=float), xs, ys)

    def slope(x):
        x = np.asarray(x, dtype=float)
        if slopes.size == 0:
            return np.zeros_like(x)
        idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, slopes.size - 1)
        out = slopes[idx]
        return np.where((x < xs[0]) | (x >= xs[-1]), 0.0, out)

    return Function1D(
        evaluator=evaluate,
        kind="piecewise_linear",
        derivatives=(slope,),
        bound=float(np.max(np.abs(ys))),
        breakpoints=tuple(xs.tolist()),
        flat_outside=(float(xs[0]), float(xs[-1])),
        name=name or "piecewise_linear",
    )


def sampled_grid(x_lo: float, x_hi: float, values: Sequence[float], name: str = "") -> Function1D:
    """Samples on a uniform lattice, linearly interpolated, constant beyond."""
    values = np.asarray(values, dtype=float)
    if values.size < 2 or not x_hi > x_lo:
        raise DomainError("need at least two samples on a non-degenerate interval")
    xs = np.linspace(x_lo, x_hi, values.size)
    f = piecewise_linear(xs, values, name=name or "sampled_grid")
    return replace(f, kind="sampled_grid")


def ramp() -> Function1D:
    """``max(0, min(x, 1))``: not differentiable at 0 and 1, modulus ``min(h, 1)``."""
    f = piecewise_linear([0.0, 1.0], [0.0, 1.0], name="ramp")
    return replace(f, analytic_modulus=lambda h: min(max(float(h), 0.0), 1.0))


def sine(frequency: float = 1.0, amplitude: float = 1.0) -> Function1D:
    expr = amplitude * sympy.sin(frequency * X)
    return from_expr(
        expr,
        bound=abs(amplitude),
        period=2 * math.pi / abs(frequency),
        name=f"{amplitude:g}*sin({frequency:g}x)",
    )


def gaussian_bump(center: float = 0.0, width: float = 1.0, amplitude: float = 1.0) -> Function1D:
    expr = amplitude * sympy.exp(-(((X - center) / width) ** 2))
    return from_expr(
        expr,
        bound=abs(amplitude),
        flat_outside=(center - 40 * width, center + 40 * width),
        name=f"gauss({center:g},{width:g})",
    )


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _smooth_step(s):
    """C-infinity step from 0 (s <= 0) to 1 (s >= 1) with step(s)+step(1-s)=1."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        left = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        right = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return left / (left + right)


def smooth_slow_vector() -> Function1D:
    """Odd C-infinity function equal to x on [-1, 1] and to +-2 beyond |x| >= 3.

    On [1, 3] the slope decreases smoothly from 1 to 0; the symmetric step
    makes its integral exactly 1, so the plateau sits at 2.  The slope never
    exceeds 1 and equals 1 on [-1, 1], hence the modulus is ``h`` for h <= 2.
    """

    def slope_pos(y):
        return 1.0 - _smooth_step((np.asarray(y) - 1.0) / 2.0)

    def value_pos(y):
        y = np.asarray(y, dtype=float)
        out = np.where(y <= 1.0, y, 2.0)
        mid = (y > 1.0) & (y < 3.0)
        if mid.any():
            ym = y[mid]
            half = (ym - 1.0) / 2.0
            pts = 1.0 + half[:, None] * (1.0 + _GL_NODES[None, :])
            out[mid] = 1.0 + half * (slope_pos(pts) @ _GL_WEIGHTS)
        return out

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * value_pos(np.abs(x))

    def slope(x):
        return slope_pos(np.abs(np.asarray(x, dtype=float)))

    return Function1D(
        evaluator=evaluate,
        derivatives=(slope,),
        bound=2.0,
        flat_outside=(-3.0, 3.0),
        name="smooth_slow",
    )


def difference(f: Function1D, g: Function1D) -> Function1D:
    """Pointwise ``f - g`` keeping the metadata that sup-norms need."""
    flat = None
    if f.flat_outside is not None and g.flat_outside is not None:
        flat = (
            min(f.flat_outside[0], g.flat_outside[0]),
            max(f.flat_outside[1], g.flat_outside[1]),
        )
    pl = f.kind != "closed_form" and g.kind != "closed_form"
    period = f.period if f.period is not None and f.period == g.period else None
    return Function1D(
        evaluator=lambda x: f.evaluator(x) - g.evaluator(x),
        kind="piecewise_linear" if pl else "closed_form",
        breakpoints=tuple(sorted(set(f.breakpoints) | set(g.breakpoints))),
        flat_outside=flat,
        period=period,
        name=f"({f.name})-({g.name})",
    )


FUNCTION_KINDS = (
    "constant",
    "ramp",
    "piecewise_linear",
    "sampled_grid",
    "sin",
    "gaussian",
    "smooth_slow",
    "expr",
)


def from_spec(spec: dict) -> Function1D:
    """Build a function from ``{"kind": ..., "params": {...}}``."""
    kind = spec.get("kind")
    params = dict(spec.get("params") or {})
    if kind == "constant":
        return constant(params.get("value", 0.0))
    if kind == "ramp":
        return ramp()
    if kind == "piecewise_linear":
        return piecewise_linear(params["xs"], params["ys"])
    if kind == "sampled_grid":
        return sampled_grid(params["x_lo"], params["x_hi"], params["values"])
    if kind == "sin":
        return sine(params.get("frequency", 1.0), params.get("amplitude", 1.0))
    if kind == "gaussian":
        return gaussian_bump(params.get("center", 0.0), params.get("width", 1.0), params.get("amplitude", 1.0))
    if kind == "smooth_slow":
        return smooth_slow_vector()
    if kind == "expr":
        return from_expr(params["expr"])
    raise DomainError(f"unknown function kind {kind!r}; expected one of {FUNCTION_KINDS}")


# --- norms and moduli -------------------------------------------------------


@dataclass(frozen=True)
class SupNormEstimate:
    value: float
    grid_spacing: float
    domain: tuple[float, float]

    def __float__(self) -> float:
        return self.value


def _checked(f: Function1D, xs: np.ndarray) -> np.ndarray:
    vals = np.asarray(f.evaluator(xs), dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        x_bad = float(np.broadcast_to(xs, vals.shape)[bad][0])
        raise EvaluationError(f"non-finite value of {f.name or 'function'} at x={x_bad!r}", x_bad)
    return vals


def _check_domain(domain) -> tuple[float, float]:
    lo, hi = float(domain[0]), float(domain[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("domain must be finite")
    if hi < lo:
        raise DomainError("domain must satisfy lo <= hi")
    return lo, hi


def sup_norm(
    f: Function1D,
    domain: tuple[float, float],
    tol: float = 1e-9,
    initial_points: int = 257,
    max_points: int = 2**22 + 1,
) -> SupNormEstimate:
    """Lattice maximum of ``|f|`` refined by halving until it settles.

    Kinks inside the domain are always added to the lattice, which makes the
    value exact for piecewise-linear functions.  The best few lattice cells
    are then polished by a bounded scalar search, which guards against two
    coarse lattices agreeing by coincidence.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = _check_domain(domain)
    extra = np.array([b for b in f.breakpoints if lo <= b <= hi], dtype=float)
    if hi == lo:
        return SupNormEstimate(float(abs(_checked(f, np.array([lo]))[0])), 1.0, (lo, hi))

    n = max(int(initial_points), 3)

    def lattice(n):
        xs = np.linspace(lo, hi, n)
        if extra.size:
            xs = np.concatenate([xs, extra])
        return xs, np.abs(_checked(f, xs))

    xs, vals = lattice(n)
    prev = float(vals.max())
    while True:
        n = 2 * n - 1
        xs, vals = lattice(n)
        cur = float(vals.max())
        if abs(cur - prev) < tol or n >= max_points:
            break
        prev = cur
    dx = (hi - lo) / (n - 1)
    if f.kind == "piecewise_linear":
        return SupNormEstimate(max(cur, prev), dx, (lo, hi))
    best = max(cur, prev, _polish(f, xs, vals, dx, lo, hi))
    return SupNormEstimate(best, dx, (lo, hi))


def _polish(f: Function1D, xs, vals, dx, lo, hi, candidates: int = 8) -> float:
    best = 0.0
    for i in np.argsort(vals)[-candidates:]:
        a, b = max(lo, xs[i] - dx), min(hi, xs[i] + dx)
        if b <= a:
            continue
        res = optimize.minimize_scalar(
            lambda x: -abs(float(f(np.array([x]))[0])), bounds=(a, b), method="bounded", options={"xatol": 1e-12}
        )
        if np.isfinite(res.fun):
            best = max(best, -float(res.fun))
    return best


def modulus_of_continuity(
    f: Function1D,
    x: float,
    domain: tuple[float, float],
    spacing: float | None = None,
    use_analytic: bool = True,
) -> float:
    """``sup |f(x1) - f(x2)|`` over ``|x1 - x2| <= x`` with x1 in ``domain``.

    Uses the exact modulus when one is attached.  Otherwise base points on a
    lattice of the domain are paired with offsets in ``[0, x]`` at spacing at
    most ``x/64``; for piecewise-linear functions every kink pair is added,
    which makes the result exact.
    """
    x = float(x)
    if x < 0 or math.isnan(x):
        raise DomainError(f"modulus argument must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if use_analytic and f.analytic_modulus is not None:
        return float(f.analytic_modulus(x))
    lo, hi = _check_domain(domain)
    width = hi - lo
    inner_step = spacing if spacing is not None else x / 64
    outer_step = spacing if spacing is not None else min(x / 64, width / 4096 if width > 0 else x / 64)
    offsets = np.unique(np.append(np.arange(0.0, x, inner_step), x))

    count = int(math.floor(width / outer_step)) + 1 if width > 0 else 1
    base = lo + outer_step * np.arange(count)
    kinks = np.array([b for b in f.breakpoints if lo - x <= b <= hi + x], dtype=float)
    if kinks.size:
        base = np.concatenate([base, kinks, kinks - x, [hi]])
    else:
        base = np.append(base, hi)

    best = 0.0
    chunk = max(1, 2_000_000 // offsets.size)
    for start in range(0, base.size, chunk):
        p = base[start : start + chunk]
        fp = _checked(f, p)
        fq = _checked(f, p[:, None] + offsets[None, :])
        best = max(best, float(np.max(np.abs(fq - fp[:, None]))))
    if kinks.size > 1:
        gaps = np.abs(kinks[:, None] - kinks[None, :])
        i, j = np.nonzero(gaps <= x)
        if i.size:
            best = max(best, float(np.max(np.abs(_checked(f, kinks[i]) - _checked(f, kinks[j])))))
    return best


@dataclass(frozen=True)
class ModulusAxiomReport:
    zero_at_zero: bool
    monotone: bool
    continuity_proxy: bool
    semiadditive: bool
    ratio_nonincreasing: bool

    @property
    def all_pass(self) -> bool:
        return self.zero_at_zero and self.monotone and self.continuity_proxy and self.semiadditive

    def as_dict(self) -> dict[str, bool]:
        return {
            "zero_at_zero": self.zero_at_zero,
            "monotone": self.monotone,
            "continuity_proxy": self.continuity_proxy,
            "semiadditive": self.semiadditive,
            "ratio_nonincreasing": self.ratio_nonincreasing,
            "all_pass": self.all_pass,
        }


def check_modulus_axioms(
    m: Callable,
    lattice: Sequence[float],
    tol: float = 1e-12,
    shrink: float = 0.8,
) -> ModulusAxiomReport:
    """Lattice check of the four properties that characterise a modulus.

    Continuity cannot be decided from samples; the proxy requires the
    largest jump between neighbours to shrink by ``shrink`` when midpoints
    are inserted.  ``ratio_nonincreasing`` reports whether ``m(x)/x`` is
    non-increasing, which is sufficient for semiadditivity.
    """
    xs = np.asarray(lattice, dtype=float)
    if xs.size == 0:
        raise DomainError("lattice must be non-empty")
    if np.any(xs < 0) or np.any(np.diff(xs) < 0):
        raise DomainError("lattice must be sorted and non-negative")
    mf = _as_array_fn(m)

    vals = mf(xs)
    zero = abs(float(mf(np.array([0.0]))[0])) <= tol
    monotone = bool(np.all(np.diff(vals) >= -tol))

    if xs.size > 1:
        jump = float(np.max(np.abs(np.diff(vals))))
        mids = 0.5 * (xs[:-1] + xs[1:])
        fine = np.empty(2 * xs.size - 1)
        fine[0::2] = xs
        fine[1::2] = mids
        fine_jump = float(np.max(np.abs(np.diff(mf(fine)))))
        continuous = jump <= tol or fine_jump <= shrink * jump + tol
    else:
        continuous = True

    sums = xs[:, None] + xs[None, :]
    semi = bool(np.all(mf(sums) <= vals[:, None] + vals[None, :] + tol * (1 + np.abs(sums))))

    pos = xs > 0
    ratios = vals[pos] / xs[pos]
    ratio_ok = bool(np.all(np.diff(ratios) <= tol * (1 + np.abs(ratios[:-1])))) if ratios.size > 1 else True

    return ModulusAxiomReport(zero, monotone, continuous, semi, ratio_ok)
