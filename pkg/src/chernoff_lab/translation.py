"""Translation semigroup on bounded uniformly continuous functions.

``(e^{tL} f)(x) = f(x + t)`` and the Chernoff family
``(G(t) f)(x) = f(x + t + t v(1/t))`` parametrised by a decay function
``v``.  Both act by a shift, so every operator here returns a shifted
:class:`~chernoff_lab.funcspace.Function1D`; n-fold iteration of G collapses
to one shift ``t + t v(n/t)`` and costs O(1) in n.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import funcspace as fs
from .errors import BoundViolation, DomainError, PreconditionError
from .funcspace import Function1D
from .rates import ConvergenceReport, ConvergenceRow, build_report

COMPOSE_TOL = 1e-12


@dataclass(frozen=True)
class RateFunctionV:
    """Decay function ``v: (0, inf) -> [0, inf)`` with ``v(x) -> 0``.

    The two flags are promises made by whoever builds the function; the
    exact error law needs both.  :meth:`spot_check` tests them on lattices.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str
    monotone_nonincreasing: bool = True
    continuous: bool = True

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.asarray(self.evaluator(arr), dtype=float)
        return float(out) if arr.ndim == 0 else out

    def spot_check(self, tol: float = 1e-3, decades: int = 12) -> dict[str, bool]:
        lattice = np.geomspace(1e-6, 1e6, 2401)
        vals = self(lattice)
        tail = self(10.0 ** np.arange(0, decades + 1))
        return {
            "nonnegative": bool(np.all(vals >= 0)),
            "monotone": bool(np.all(np.diff(vals) <= 1e-15 * (1 + vals[:-1]))),
            # slow rates (1/ln ln x) only halve over twelve decades
            "vanishing": bool(np.all(np.diff(tail) <= 1e-15) and (tail[-1] < tol or tail[-1] <= 0.5 * tail[0])),
        }


def _rate(name, fn, **flags) -> RateFunctionV:
    return RateFunctionV(lambda x: fn(np.asarray(x, dtype=float)), name, **flags)


def inv_x() -> RateFunctionV:
    return _rate("inv_x", lambda x: 1.0 / x)


def inv_log() -> RateFunctionV:
    return _rate("inv_log", lambda x: 1.0 / np.log(x + math.e))


def inv_loglog() -> RateFunctionV:
    return _rate("inv_loglog", lambda x: 1.0 / np.log(np.log(x + math.e**math.e)))


def power(k: float) -> RateFunctionV:
    """``(1 + x)^(-k)``; small k gives slow, large k fast decay."""
    if k <= 0:
        raise DomainError("power exponent must be positive")
    return _rate(f"power({k:g})", lambda x: (1.0 + x) ** (-k))


def root(k: float) -> RateFunctionV:
    """``(1 + x)^(-1/k)``."""
    if k <= 0:
        raise DomainError("root index must be positive")
    return _rate(f"root({k:g})", lambda x: (1.0 + x) ** (-1.0 / k))


def exp_decay() -> RateFunctionV:
    return _rate("exp_decay", lambda x: np.exp(-x))


def double_exp_decay() -> RateFunctionV:
    with np.errstate(over="ignore"):
        return _rate("double_exp", lambda x: np.exp(-np.exp(np.minimum(x, 700.0))))


def zero_rate() -> RateFunctionV:
    return _rate("zero", lambda x: np.zeros_like(x))


def custom_table(xs: Sequence[float], vs: Sequence[float]) -> RateFunctionV:
    """Linear interpolation of a table, constant beyond its ends.

    The monotone flag is derived from the data; a table whose last value is
    not 0 does not vanish at infinity and fails :meth:`spot_check`.
    """
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise DomainError("table needs >= 2 strictly increasing abscissae and matching values")
    if np.any(vs < 0):
        raise DomainError("rate values must be non-negative")
    mono = bool(np.all(np.diff(vs) <= 0))
    return RateFunctionV(lambda x: np.interp(x, xs, vs), "custom-table", monotone_nonincreasing=mono)


RATE_NAMES = ("inv_x", "inv_log", "inv_loglog", "power", "root", "exp_decay", "double_exp", "zero", "custom-table")


def rate_from_spec(spec: dict) -> RateFunctionV:
    name = spec.get("name")
    params = dict(spec.get("params") or {})
    builders = {
        "inv_x": inv_x,
        "inv_log": inv_log,
        "inv_loglog": inv_loglog,
        "exp_decay": exp_decay,
        "double_exp": double_exp_decay,
        "zero": zero_rate,
    }
    if name in builders:
        v = builders[name]()
    elif name == "power":
        v = power(params.get("k", 1.0))
    elif name == "root":
        v = root(params.get("k", 1.0))
    elif name == "custom-table":
        v = custom_table(params["xs"], params["vs"])
    else:
        raise DomainError(f"unknown rate function {name!r}; expected one of {RATE_NAMES}")
    overrides = {k: bool(params[k]) for k in ("monotone_nonincreasing", "continuous") if k in params}
    return replace(v, **overrides) if overrides else v


# --- operators ---------------------------------------------------------------


def apply_translation(f: Function1D, t: float) -> Function1D:
    """``e^{tL} f``; t may be negative (it is a group)."""
    return f.shifted(t)


def g_shift(t: float, v: RateFunctionV) -> float:
    """The shift ``t + t v(1/t)`` by which ``G(t)`` translates."""
    t = float(t)
    if t < 0:
        raise DomainError("G(t) is defined for t >= 0")
    if t == 0:
        return 0.0
    return t + t * v(1.0 / t)


def iterated_shift(t: float, n: int, v: RateFunctionV) -> float:
    """The shift ``t + t v(n/t)`` of ``G(t/n)^n``."""
    t = float(t)
    if n < 1:
        raise DomainError("n must be >= 1")
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return 0.0
    return t + t * v(n / t)


def apply_G(f: Function1D, t: float, v: RateFunctionV) -> Function1D:
    return f.shifted(g_shift(t, v))


def compose_G_at(f: Function1D, t: float, n: int, v: RateFunctionV, xs) -> np.ndarray:
    """Evaluate ``G(t/n)^n f`` at ``xs`` by applying the step n times."""
    step = g_shift(t / n, v)
    y = np.array(xs, dtype=float, copy=True)
    for _ in range(n):
        y = y + step
    return np.asarray(f.evaluator(y), dtype=float)


def iterate_G(
    f: Function1D,
    t: float,
    n: int,
    v: RateFunctionV,
    cross_check: Sequence[float] | None = None,
) -> Function1D:
    """``G(t/n)^n f`` as a single closed-form shift.

    With ``cross_check`` points, the n-fold composition is evaluated there
    and must agree with the closed form to 1e-12.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    g = f.shifted(iterated_shift(t, n, v))
    if cross_check is not None:
        xs = np.asarray(cross_check, dtype=float)
        composed = compose_G_at(f, t, n, v, xs)
        closed = np.asarray(g.evaluator(xs), dtype=float)
        gap = float(np.max(np.abs(composed - closed))) if xs.size else 0.0
        if gap > COMPOSE_TOL:
            raise BoundViolation(f"composition and closed form differ by {gap:.3e}")
    return g


# --- error measurement -------------------------------------------------------


def _window_for(f: Function1D, lead: float, window: tuple[float, float] | None) -> tuple[float, float]:
    if window is not None:
        return float(window[0]), float(window[1])
    if f.flat_outside is not None:
        lo, hi = f.flat_outside
        return lo - lead - 1.0, hi + 1.0
    if f.period is not None:
        return 0.0, f.period + lead
    raise PreconditionError(f"{f.name or 'function'} is neither flat outside a compact set nor periodic; pass a window")


def chernoff_error(
    f: Function1D,
    t: float,
    n: int,
    v: RateFunctionV,
    window: tuple[float, float] | None = None,
    tol: float = 1e-12,
) -> float:
    """``sup_x |(G(t/n)^n f)(x) - (e^{tL} f)(x)|`` on a window that holds every kink."""
    if t == 0:
        return 0.0
    approx = iterate_G(f, t, n, v)
    exact = apply_translation(f, t)
    diff = fs.difference(approx, exact)
    lead = iterated_shift(t, n, v)
    return fs.sup_norm(diff, _window_for(f, lead, window), tol=tol).value


def t_lattice(T: float, size: int = 512) -> np.ndarray:
    """Geometric points near 0 merged with a uniform lattice ending at T."""
    if size < 2 or not T > 0:
        raise DomainError("need T > 0 and at least 2 lattice points")
    n_geo = size // 4
    geo = np.geomspace(T * 1e-8, T / size, n_geo, endpoint=False)
    uni = np.linspace(T / (size - n_geo), T, size - n_geo)
    return np.unique(np.concatenate([geo, uni]))


@dataclass(frozen=True)
class TranslationExperiment:
    f: Function1D
    v: RateFunctionV
    T: float
    n_values: tuple[int, ...]
    window: tuple[float, float] | None = None
    lattice_size: int = 512

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("T must be positive")
        ns = tuple(int(n) for n in self.n_values)
        if not ns or any(n < 1 for n in ns) or list(ns) != sorted(ns):
            raise DomainError("n_values must be positive and sorted ascending")
        object.__setattr__(self, "n_values", ns)


@dataclass(frozen=True)
class LawRow:
    n: int
    measured_error: float
    predicted_error: float
    argmax_t: float

    @property
    def abs_discrepancy(self) -> float:
        return abs(self.measured_error - self.predicted_error)


def kink_errors(f: Function1D, ts: np.ndarray, n: int, v: RateFunctionV) -> np.ndarray:
    """Exact Chernoff errors of a piecewise-linear f for a whole t-lattice.

    The difference ``f(x + t + t v(n/t)) - f(x + t)`` is piecewise linear with
    kinks at the shifted breakpoints of f and constant beyond them, so its
    sup is the largest value at those kinks.
    """
    ts = np.asarray(ts, dtype=float)
    kinks = np.asarray(f.breakpoints, dtype=float)
    lead = ts + ts * np.asarray(v(n / ts), dtype=float)
    pts = np.concatenate([kinks[None, :] - lead[:, None], kinks[None, :] - ts[:, None]], axis=1)
    diff = f(pts + lead[:, None]) - f(pts + ts[:, None])
    return np.max(np.abs(diff), axis=1)


def _law_row(exp: TranslationExperiment, n: int, ts: np.ndarray) -> LawRow:
    if exp.f.kind == "piecewise_linear" and exp.f.flat_outside is not None and exp.f.breakpoints:
        errs = kink_errors(exp.f, ts, n, exp.v)
    else:
        errs = [chernoff_error(exp.f, t, n, exp.v, exp.window) for t in ts]
    k = int(np.argmax(errs))
    lo, hi = _window_for(exp.f, 0.0, exp.window)
    predicted = fs.modulus_of_continuity(exp.f, exp.T * exp.v(n / exp.T), (lo, hi))
    return LawRow(n, float(errs[k]), float(predicted), float(ts[k]))


def exact_error_law(exp: TranslationExperiment, jobs: int = 1) -> ConvergenceReport:
    """Measured ``sup_t ||G(t/n)^n f - e^{tL} f||`` next to ``omega_f(T v(n/T))``.

    The supremum over t is taken on :func:`t_lattice`; the report's
    ``extras`` carry the per-n law rows and the largest discrepancy.
    """
    if not (exp.v.monotone_nonincreasing and exp.v.continuous):
        raise PreconditionError(
            "exact error law needs a continuous non-increasing rate function",
            condition="v continuous and non-increasing",
        )
    ts = t_lattice(exp.T, exp.lattice_size)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            law = list(pool.map(lambda n: _law_row(exp, n, ts), exp.n_values))
    else:
        law = [_law_row(exp, n, ts) for n in exp.n_values]
    rows = [ConvergenceRow(r.n, r.measured_error, r.predicted_error) for r in law]
    return build_report(
        f"translation G[{exp.v.name}] on {exp.f.name}",
        rows,
        law=law,
        max_discrepancy=max(r.abs_discrepancy for r in law),
        lattice_points=int(ts.size),
    )


def counterexample_family(t: float, n: int) -> tuple[Function1D, float]:
    """Unit-norm ``f_n`` whose Chernoff error stays 1 for ``v(x) = 1/x``.

    ``f_n`` rises linearly from 0 at x=0 to 1 at x=t^2/n.  At the witness
    ``x_t = -t`` the semigroup gives 0 while ``G(t/n)^n`` gives 1.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    f_n = fs.piecewise_linear([0.0, t * t / n], [0.0, 1.0], name=f"f_{n}")
    return f_n, -float(t)
