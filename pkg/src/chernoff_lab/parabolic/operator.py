"""The operator ``A u = a u'' + b u' + c u`` and derivative estimates through its powers.

Coefficients are sympy expressions in :data:`funcspace.X`, so their
derivatives are exact.  All sup-norms of coefficient combinations are taken
over a finite working window; the constants derived from them are therefore
window-relative and valid for functions whose support of interest lies in
that window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Sequence

import numpy as np
import sympy

from .. import funcspace as fs
from ..errors import CapabilityError, DomainError, PreconditionError
from .grid import GridFunction, derivative_on_grid

X = fs.X
DEFAULT_WINDOW = (-20.0, 20.0)


def _sympify(e) -> sympy.Expr:
    if isinstance(e, fs.Function1D):
        if e.expr is None:
            raise CapabilityError(f"coefficient {e.name or e.kind} has no closed form")
        return e.expr
    return sympy.sympify(e, locals={"x": X})


@dataclass(frozen=True)
class ParabolicCoefficients:
    """Coefficients ``a, b, c`` with derivatives usable up to ``derivative_order``."""

    a: sympy.Expr
    b: sympy.Expr
    c: sympy.Expr
    window: tuple[float, float] = DEFAULT_WINDOW
    derivative_order: int = fs.UNLIMITED
    name: str = ""

    def __post_init__(self):
        for k in ("a", "b", "c"):
            object.__setattr__(self, k, _sympify(getattr(self, k)))
        lo, hi = self.window
        if not hi > lo:
            raise DomainError("window must have hi > lo")

    @classmethod
    def constant(cls, a: float, b: float = 0.0, c: float = 0.0, **kw) -> ParabolicCoefficients:
        return cls(sympy.nsimplify(a), sympy.nsimplify(b), sympy.nsimplify(c), **kw)

    def evaluator(self, which: str, order: int = 0):
        if order > self.derivative_order:
            raise CapabilityError(f"derivative {which}^({order}) exceeds declared order {self.derivative_order}")
        return fs._lambdified(getattr(self, which), order)

    def values(self, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(self.evaluator(k)(xs) for k in ("a", "b", "c"))

    def is_constant(self) -> bool:
        return all(not getattr(self, k).has(X) for k in ("a", "b", "c"))

    def sup(self, expr: sympy.Expr) -> float:
        return window_sup(expr, self.window)

    @cached_property
    def norms(self) -> dict[str, float]:
        return {k: self.sup(getattr(self, k)) for k in ("a", "b", "c")}

    @cached_property
    def a_min(self) -> float:
        xs = np.linspace(*self.window, 20001)
        return float(np.min(self.evaluator("a")(xs)))

    def require_elliptic(self) -> float:
        amin = self.a_min
        if not amin > 0:
            raise PreconditionError(f"inf a = {amin:g} on the window; need a > 0", condition="ellipticity")
        return amin


def window_sup(expr: sympy.Expr, window: tuple[float, float], tol: float = 1e-10) -> float:
    expr = sympy.sympify(expr)
    if not expr.has(X):
        return abs(float(expr))
    return float(fs.sup_norm(fs.from_expr(expr), window, tol=tol, initial_points=1025).value)


# --- presets and JSON ----------------------------------------------------------

def bounded_smooth_preset(name: str) -> sympy.Expr:
    """Smooth bounded coefficients with bounded derivatives."""
    presets = {
        "bump_half": 1 + sympy.Rational(1, 2) / (1 + X**2),
        "rational_step": 1 + X**2 / (1 + X**2),
        "tanh_drift": sympy.tanh(X) / 2,
        "cos_mild": 1 + sympy.cos(X) / 4,
        "sech_potential": -1 / sympy.cosh(X),
    }
    if name not in presets:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    return presets[name]


def coefficient_from_spec(spec: dict) -> sympy.Expr:
    kind = spec.get("kind")
    params = spec.get("params") or {}
    if kind == "constant":
        return sympy.nsimplify(params.get("value", 0.0))
    if kind == "poly":
        coeffs = params.get("coeffs", [])
        return sum(sympy.nsimplify(cf) * X**k for k, cf in enumerate(coeffs)) if coeffs else sympy.Integer(0)
    if kind == "bounded_smooth_preset":
        return bounded_smooth_preset(params["name"])
    if kind == "expr":
        return _sympify(params["expr"])
    raise DomainError(f"unknown coefficient kind {kind!r}")


def coefficients_from_spec(spec: dict) -> ParabolicCoefficients:
    zero = {"kind": "constant", "params": {"value": 0.0}}
    window = tuple(spec.get("window", DEFAULT_WINDOW))
    order = spec.get("derivative_order")
    return ParabolicCoefficients(
        coefficient_from_spec(spec["a"]),
        coefficient_from_spec(spec.get("b", zero)),
        coefficient_from_spec(spec.get("c", zero)),
        window=window,
        derivative_order=fs.UNLIMITED if order is None else int(order),
        name=spec.get("name", ""),
    )


# --- applying A ------------------------------------------------------------------

def A_expr(coeffs: ParabolicCoefficients, v: sympy.Expr) -> sympy.Expr:
    return coeffs.a * sympy.diff(v, X, 2) + coeffs.b * sympy.diff(v, X) + coeffs.c * v


def apply_A(coeffs: ParabolicCoefficients, v):
    """``a v'' + b v' + c v`` for a closed-form :class:`Function1D` or a grid."""
    if isinstance(v, GridFunction):
        a, b, c = coeffs.values(v.nodes)
        out = a * derivative_on_grid(v, 2) + b * derivative_on_grid(v, 1) + c * v.values
        return v.with_values(out)
    if isinstance(v, fs.Function1D):
        if v.expr is None:
            if v.derivative_order_available < 2:
                raise CapabilityError("apply_A needs v''")
            a, b, c = (coeffs.evaluator(k) for k in ("a", "b", "c"))
            d1, d2 = v.derivative(1), v.derivative(2)
            return fs.Function1D(
                evaluator=lambda x: a(x) * d2(x) + b(x) * d1(x) + c(x) * v(x),
                kind="closed_form",
                name=f"A[{v.name}]",
            )
        return fs.from_expr(A_expr(coeffs, v.expr), name=f"A[{v.name}]")
    return A_expr(coeffs, _sympify(v))


def power_expr(coeffs: ParabolicCoefficients, v: sympy.Expr, k: int) -> sympy.Expr:
    """``A^k v`` symbolically."""
    out = _sympify(v)
    for _ in range(k):
        out = A_expr(coeffs, out)
    return out


# --- power expansion -------------------------------------------------------------

@dataclass(frozen=True)
class OperatorPowerExpansion:
    """``A^q v = a^q v^(2q) + sum_{i<2q} p_i v^(i)``; ``coefficients[i]`` is p_i, the last entry a^q."""

    q: int
    coefficients: tuple[sympy.Expr, ...]

    @property
    def leading(self) -> sympy.Expr:
        return self.coefficients[-1]

    @property
    def lower(self) -> tuple[sympy.Expr, ...]:
        return self.coefficients[:-1]

    def apply(self, v: sympy.Expr) -> sympy.Expr:
        v = _sympify(v)
        return sum(p * sympy.diff(v, X, i) for i, p in enumerate(self.coefficients))

    def coefficient_functions(self):
        return [fs._lambdified(p, 0) for p in self.coefficients]


def _leibniz_A(a, b, c, i: int) -> dict[int, sympy.Expr]:
    """``(Av)^(i)`` as {order of v-derivative: coefficient}."""
    out: dict[int, sympy.Expr] = {}
    for j in range(i + 1):
        k = comb(i, j)
        for coef, shift in ((a, 2), (b, 1), (c, 0)):
            d = sympy.diff(coef, X, i - j) if i > j else coef
            if d != 0:
                out[j + shift] = out.get(j + shift, 0) + k * d
    return out


def expand_power(coeffs: ParabolicCoefficients, q: int, simplify: bool = True) -> OperatorPowerExpansion:
    """Coefficients of ``A^q`` in the basis of derivatives, by the Leibniz recursion.

    Passing from q to q+1 substitutes ``Av`` for ``v`` and expands each
    ``(Av)^(i)``; this consumes derivatives of a, b, c up to order 2q, so
    the final expansion needs order 2q-2.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    if 2 * q - 2 > coeffs.derivative_order:
        raise CapabilityError(
            f"A^{q} needs a^({2 * q - 2}), b^({2 * q - 2}), c^({2 * q - 2}); "
            f"coefficients declare order {coeffs.derivative_order}"
        )
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    P: list[sympy.Expr] = [c, b, a]
    for _ in range(q - 1):
        new: dict[int, sympy.Expr] = {}
        for i, p in enumerate(P):
            if p == 0:
                continue
            for order, coef in _leibniz_A(a, b, c, i).items():
                new[order] = new.get(order, 0) + p * coef
        P = [new.get(k, sympy.Integer(0)) for k in range(len(P) + 2)]
    if simplify:
        P = [sympy.expand(p) for p in P]
    return OperatorPowerExpansion(q, tuple(sympy.sympify(p) for p in P))


def power_norm_constants(coeffs: ParabolicCoefficients, q: int) -> list[float]:
    """``C_i = ||p_i||`` (i < 2q) and ``C_2q = ||a||^q`` for ``||A^q v|| <= sum C_i ||v^(i)||``."""
    exp = expand_power(coeffs, q)
    out = [coeffs.sup(p) for p in exp.lower]
    out.append(coeffs.sup(coeffs.a) ** q)
    return out


def highest_derivative_constants(coeffs: ParabolicCoefficients, q: int) -> tuple[float, list[float]]:
    """``(||1/a^q||, [||p_i/a^q|| for i < 2q])`` for the bound on ``||v^(2q)||``."""
    coeffs.require_elliptic()
    exp = expand_power(coeffs, q)
    aq = coeffs.a**q
    inv = coeffs.sup(1 / aq)
    return inv, [coeffs.sup(p / aq) for p in exp.lower]


# --- the interpolation inequality --------------------------------------------------

@dataclass(frozen=True)
class LandauCheck:
    lhs: float
    rhs: float
    window_dependent: bool
    checked_on: tuple[float, float]

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-9) + 1e-12


def _is_global(u: fs.Function1D, window: tuple[float, float]) -> bool:
    flat = u.flat_outside
    if flat is not None and flat[0] >= window[0] and flat[1] <= window[1]:
        return True
    return u.period is not None and window[1] - window[0] >= u.period


def landau_inequality_check(u: fs.Function1D, h: float, window: tuple[float, float], tol: float = 1e-9) -> LandauCheck:
    """``sup|u'| <= h sup|u''| + sup|u| / h``.

    When the window does not capture the global sups of ``u`` (u neither
    constant outside it nor periodic with a period inside it) the check is
    window-dependent: ``sup|u'|`` is taken over ``[lo, hi - 2h]``, where the
    Taylor step to ``x + 2h`` stays inside the window.
    """
    if not h > 0:
        raise DomainError("h must be positive")
    lo, hi = window
    if u.derivative_order_available < 2:
        raise CapabilityError("landau check needs u''")
    d1 = fs.Function1D(u.derivative(1), "closed_form", breakpoints=u.breakpoints)
    d2 = fs.Function1D(u.derivative(2), "closed_form", breakpoints=u.breakpoints)
    dependent = not _is_global(u, window)
    region = (lo, hi - 2 * h) if dependent else (lo, hi)
    if region[1] <= region[0]:
        raise DomainError("window shorter than 2h")
    lhs = fs.sup_norm(d1, region, tol).value
    rhs = h * fs.sup_norm(d2, window, tol).value + fs.sup_norm(u, window, tol).value / h
    return LandauCheck(lhs, rhs, dependent, region)


# --- derivative constants ------------------------------------------------------------

@dataclass
class DerivativeConstantTable:
    """``||v^(n)|| <= sum_k C[n][k] ||A^k v||`` for n = 0..n_max."""

    n_max: int
    C: list[list[float]]
    h_choices: dict[int, float] = field(default_factory=dict)
    window: tuple[float, float] = DEFAULT_WINDOW

    def row(self, n: int) -> list[float]:
        return self.C[n]

    def rhs(self, n: int, power_norms: Sequence[float]) -> float:
        return sum(ck * power_norms[k] for k, ck in enumerate(self.C[n]) if ck)


def _pad(vec: list[float], size: int) -> np.ndarray:
    out = np.zeros(size)
    out[: len(vec)] = vec
    return out


def derive_derivative_constants(coeffs: ParabolicCoefficients, n_max: int) -> DerivativeConstantTable:
    """Constants for every derivative order up to ``n_max`` by induction on the order.

    Even ``m = 2q``: solve the expansion of ``A^q`` for ``v^(m)`` and replace
    lower derivatives by their rows.  Odd ``m``: apply the interpolation
    inequality to ``v^(m-1)`` with ``h = 1`` if the ``v^(m)`` coefficient
    alpha_m vanishes, else ``h = 1/(2 alpha_m)``, then absorb the
    ``h alpha_m ||v^(m)||`` term into the left side.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    coeffs.require_elliptic()
    width = (n_max + 1) // 2 + 1
    rows: list[np.ndarray] = [_pad([1.0], width)]
    h_choices: dict[int, float] = {}
    cache: dict[int, tuple[float, list[float]]] = {}

    def constants(q):
        if q not in cache:
            cache[q] = highest_derivative_constants(coeffs, q)
        return cache[q]

    for m in range(1, n_max + 1):
        if m % 2 == 0:
            q = m // 2
            inv, alpha = constants(q)
            row = inv * np.eye(width)[q]
            for i in range(m):
                row = row + alpha[i] * rows[i]
        else:
            q = (m + 1) // 2
            inv, alpha = constants(q)
            am = alpha[m]
            h = 1.0 if am == 0 else 1.0 / (2.0 * am)
            h_choices[m] = h
            row = h * inv * np.eye(width)[q]
            for i in range(m - 1):
                row = row + h * alpha[i] * rows[i]
            row = row + (h * alpha[m - 1] + 1.0 / h) * rows[m - 1]
            row = row / (1.0 - h * am)
        rows.append(row)
    return DerivativeConstantTable(n_max, [list(map(float, r)) for r in rows], h_choices, coeffs.window)


# --- one-step defect and the rate bound ----------------------------------------------

def defect_constants(coeffs: ParabolicCoefficients) -> dict[int, float]:
    """``B_i`` in ``||S(t)f - f - tAf|| <= t^2 sum_i B_i ||f^(i)||`` for the four-point step."""
    n = coeffs.norms
    return {4: n["a"] ** 2 / 3.0, 2: n["b"] ** 2}


def power_norms(coeffs: ParabolicCoefficients, f: fs.Function1D, k_max: int, window: tuple[float, float] | None = None) -> list[float]:
    """``[||A^k f|| for k = 0..k_max]`` over ``window`` (default: the coefficient window)."""
    if f.expr is None:
        raise CapabilityError("power norms need a closed-form f")
    window = window or coeffs.window
    return [window_sup(power_expr(coeffs, f.expr, k), window) for k in range(k_max + 1)]


@dataclass(frozen=True)
class ParabolicBound:
    """``(t^2 e^{wt}/n) sum_j beta_j(t/n) ||A^j f||`` with ``beta_j`` from the derived constants."""

    alpha: tuple[float, ...]
    w: float
    norms: tuple[float, ...]

    def __call__(self, t: float, n: int) -> float:
        tau = t / n
        total = 0.0
        for j, (aj, nj) in enumerate(zip(self.alpha, self.norms)):
            beta = aj * math.exp(-self.w * tau) + (0.5 if j == 2 else 0.0)
            total += beta * nj
        return t**2 * math.exp(self.w * t) / n * total


def parabolic_bound(coeffs: ParabolicCoefficients, f: fs.Function1D, table: DerivativeConstantTable | None = None, window: tuple[float, float] | None = None) -> ParabolicBound:
    """Chain the defect constants with the derivative table into the product-formula bound.

    ``alpha_j = sum_i B_i C[i][j]``; M = 1 and ``w = ||c||``.
    """
    table = table or derive_derivative_constants(coeffs, 4)
    B = defect_constants(coeffs)
    width = len(table.C[4])
    alpha = np.zeros(max(width, 3))
    for i, bi in B.items():
        alpha[: len(table.C[i])] += bi * np.asarray(table.C[i])
    norms = power_norms(coeffs, f, len(alpha) - 1, window)
    return ParabolicBound(tuple(map(float, alpha)), coeffs.norms["c"], tuple(norms))
