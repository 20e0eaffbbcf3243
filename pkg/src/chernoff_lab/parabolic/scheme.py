"""The four-point Chernoff step for ``a u'' + b u' + c u`` and its n-fold iterate.

One step maps f to

    S(t)f(x) = f(x + 2 sqrt(a(x) t))/4 + f(x - 2 sqrt(a(x) t))/4
               + f(x + 2 b(x) t)/2 + t c(x) f(x),

with off-node values of a grid function supplied by cubic interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import funcspace as fs
from ..errors import BoundViolation, DomainError, WindowError
from .grid import KAPPA, GridFunction, grid_from_function
from .operator import ParabolicCoefficients

ROUNDOFF = 32 * np.finfo(float).eps


def step_points(coeffs: ParabolicCoefficients, xs: np.ndarray, t: float):
    a, b, c = coeffs.values(xs)
    if np.any(a < 0):
        raise DomainError("a must be non-negative at every node")
    r = 2.0 * np.sqrt(a * t)
    return xs + r, xs - r, xs + 2.0 * b * t, c


def chernoff_step_values(coeffs: ParabolicCoefficients, f, t: float, xs) -> np.ndarray:
    """``(S(t)f)(x)`` at ``xs`` for any callable f (closed form or grid)."""
    if t < 0:
        raise DomainError("t must be >= 0")
    xs = np.asarray(xs, dtype=float)
    if t == 0:
        return np.asarray(f(xs), dtype=float)
    plus, minus, drift, c = step_points(coeffs, xs, t)
    return 0.25 * f(plus) + 0.25 * f(minus) + 0.5 * f(drift) + t * c * f(xs)


def max_shift(coeffs: ParabolicCoefficients, t: float) -> float:
    """Largest displacement of one step of length t."""
    n = coeffs.norms
    return max(2.0 * math.sqrt(n["a"] * t), 2.0 * n["b"] * t)


def apply_chernoff_step(coeffs: ParabolicCoefficients, f: GridFunction, t: float, step: int | None = None) -> GridFunction:
    """One step on a grid.

    Raises :class:`WindowError` when an evaluation point leaves the grid by
    more than its trusted margin, and :class:`BoundViolation` if the result
    exceeds ``e^{||c|| t} ||f||`` by more than interpolation overshoot.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return f
    xs = f.nodes
    plus, minus, drift, c = step_points(coeffs, xs, t)
    lo = min(minus.min(), drift.min())
    hi = max(plus.max(), drift.max())
    escape = max(f.x0 - lo, hi - f.x_hi, 0.0)
    if escape > f.margin:
        raise WindowError(
            f"step reaches {escape:.3g} beyond the grid (trusted margin {f.margin:.3g}); widen the window",
            step=step,
        )
    vals = 0.25 * f(plus) + 0.25 * f(minus) + 0.5 * f(drift) + t * c * f.values
    norm_f = f.sup()
    # cubic interpolants overshoot node values by at most max|delta^2 f|/8 inside, more at the ends
    allowance = f.second_difference().max() / 4 + ROUNDOFF * norm_f
    limit = math.exp(float(np.max(np.abs(c))) * t) * norm_f + allowance
    if np.max(np.abs(vals)) > limit:
        raise BoundViolation(f"step norm {np.max(np.abs(vals)):.6g} exceeds {limit:.6g}")
    return f.with_values(vals)


def dependence_region(interest: tuple[float, float], reach: float, steps_left: int) -> tuple[float, float]:
    return interest[0] - steps_left * reach, interest[1] + steps_left * reach


@dataclass
class IterationResult:
    grid: GridFunction
    budget: float
    t: float
    n: int
    interest: tuple[float, float] | None = None
    step_budgets: list[float] = field(default_factory=list)

    def error_against(self, exact, region: tuple[float, float] | None = None) -> float:
        """Max node error against a callable or a same-lattice array of values."""
        region = region or self.interest
        mask = self.grid.mask(region)
        ref = exact(self.grid.nodes) if callable(exact) else np.asarray(exact)
        return float(np.max(np.abs(self.grid.values - ref)[mask]))


def iterate_chernoff(
    coeffs: ParabolicCoefficients,
    f: GridFunction,
    t: float,
    n: int,
    interest: tuple[float, float] | None = None,
) -> IterationResult:
    """``S(t/n)^n f`` with an interpolation-error budget.

    With an ``interest`` region, the grid must contain the region widened
    by ``n`` times the per-step reach (shift plus two stencil spacings);
    values outside that domain of dependence may be spoilt by the constant
    extension and are not trusted, so escapes at the grid ends are allowed.

    The budget adds, per step, ``KAPPA max|delta^4 f_k|`` over the current
    domain of dependence (``delta^4 f ~ h^4 f''''``) plus a roundoff term,
    each carried forward with the growth factor ``e^{||c|| t/n}``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if t < 0:
        raise DomainError("t must be >= 0")
    tau = t / n
    reach = max_shift(coeffs, tau) + 2 * f.h
    g = f
    if interest is not None:
        need = dependence_region(interest, reach, n)
        if need[0] < f.x0 - f.margin or need[1] > f.x_hi + f.margin:
            raise WindowError(
                f"grid [{f.x0:g}, {f.x_hi:g}] does not cover the dependence region [{need[0]:g}, {need[1]:g}]",
                step=0,
            )
        g = GridFunction(f.x0, f.h, f.values, math.inf)
    growth = math.exp(coeffs.norms["c"] * tau)
    budget = 0.0
    per_step = []
    for k in range(n):
        region = None if interest is None else dependence_region(interest, reach, n - k)
        mask = g.mask(region)
        b_k = KAPPA * float(g.fourth_difference()[mask].max()) + ROUNDOFF * 4 * g.sup(region)
        per_step.append(b_k)
        try:
            g = apply_chernoff_step(coeffs, g, tau, step=k + 1)
        except WindowError as err:
            raise WindowError(str(err), step=k + 1) from None
        budget = budget * growth + b_k
    if interest is not None:
        g = GridFunction(g.x0, g.h, g.values, f.margin)
    return IterationResult(g, budget, t, n, interest, per_step)


def chernoff_window(coeffs: ParabolicCoefficients, interest: tuple[float, float], t: float, n: int, h: float, support: tuple[float, float] | None = None) -> tuple[float, float]:
    """Interest region widened by n times the reach of one step, hulled with ``support``."""
    reach = max_shift(coeffs, t / n) + 2 * h
    lo, hi = dependence_region(interest, reach, n)
    if support is not None:
        lo, hi = min(lo, support[0]), max(hi, support[1])
    return lo - 2 * h, hi + 2 * h


def auto_spacing(f4_max: float, n: int, target: float, h_max: float = 0.1) -> float:
    """Largest h with ``n KAPPA h^4 max|f''''| <= target``, capped at ``h_max``."""
    if not target > 0:
        raise DomainError("target must be positive")
    if f4_max <= 0:
        return h_max
    return min(h_max, (target / (n * KAPPA * f4_max)) ** 0.25)


def prepare_grid(coeffs: ParabolicCoefficients, f: fs.Function1D, interest, t: float, n: int, target: float = 1e-8, support=None, h: float | None = None) -> GridFunction:
    """Sample ``f`` on a window and spacing fit for an ``n``-step run."""
    if h is None:
        lo, hi = interest
        f4 = fs.sup_norm(fs.Function1D(f.derivative(4), "closed_form"), (lo - 10, hi + 10), tol=1e-6).value
        h = auto_spacing(f4, n, target)
    lo, hi = chernoff_window(coeffs, interest, t, n, h, support)
    # align nodes on multiples of h so runs with equal h share a lattice
    lo = math.floor(lo / h) * h
    hi = math.ceil(hi / h) * h
    return grid_from_function(f, lo, hi, h=h, margin=math.inf if f.flat_outside else 0.0)


def one_step_defect(coeffs: ParabolicCoefficients, f: fs.Function1D, t: float, window: tuple[float, float] | None = None, points: int = 4001) -> tuple[float, float]:
    """``(||S(t)f - f - tAf||, t^2 (||a||^2/3 ||f''''|| + ||b||^2 ||f''||))`` on a window.

    f is evaluated in closed form, so no interpolation enters the left side.
    """
    window = window or coeffs.window
    xs = np.linspace(*window, points)
    a, b, c = coeffs.values(xs)
    Af = a * f.derivative(2)(xs) + b * f.derivative(1)(xs) + c * f(xs)
    lhs = float(np.max(np.abs(chernoff_step_values(coeffs, f, t, xs) - f(xs) - t * Af)))
    norms = coeffs.norms
    # the Lagrange points lie within one step's reach of the window
    r = max_shift(coeffs, t)
    wide = (window[0] - r, window[1] + r)
    d4 = fs.sup_norm(fs.Function1D(f.derivative(4), "closed_form"), wide, tol=1e-10).value
    d2 = fs.sup_norm(fs.Function1D(f.derivative(2), "closed_form"), wide, tol=1e-10).value
    rhs = t**2 * (norms["a"] ** 2 / 3 * d4 + norms["b"] ** 2 * d2)
    return lhs, rhs
