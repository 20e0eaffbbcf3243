"""Chernoff iteration in finite dimension, where ``e^{tL}`` is computable.

Operators are real square matrices, vectors are 1-d arrays.  Vector norms
are Euclidean and operator norms are the induced 2-norm (largest singular
value).  The telescoping identity ``Z^n - Y^n = sum_k Z^{n-k-1} (Z - Y) Y^k``
and the Taylor remainder of ``e^{tL}`` feed the product-formula error bound

    ||S(t/n)^n f - e^{tL} f||
        <= M1 M2 t^{m+1} e^{wt} / n^m * sum_j C_j(t/n) ||L^j f||

with ``C_{m+1}(t) = K_{m+1}(t) e^{-wt} + M1/(m+1)!`` and
``C_j(t) = K_j(t) e^{-wt}`` otherwise.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError, RangeError, ShapeError

log = logging.getLogger(__name__)

EXPM_TOL = 1e-16
SLACK_TOL = 1e-10
CONDITION_LATTICE = 64
MAX_POWER = 64


def _square(M, name: str = "matrix") -> np.ndarray:
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ShapeError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    return A


def op_norm(M, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Largest singular value by power iteration on ``M^T M``.

    The start vector comes from a few repeated squarings of ``M^T M``,
    which align it with the dominant singular direction.  Falls back to an
    SVD if the Rayleigh quotient has not settled to ``tol`` (relative) after
    ``max_iter`` steps.
    """
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if not A.size or not np.any(A):
        return 0.0
    G = A.T @ A
    P = G / np.max(np.abs(G))
    for _ in range(10):
        P = P @ P
        peak = np.max(np.abs(P))
        if not peak > 0 or not np.isfinite(peak):
            break
        P /= peak
    cols = np.linalg.norm(P, axis=0)
    if np.all(np.isfinite(cols)) and cols.max() > 0:
        x = P[:, int(np.argmax(cols))] / cols.max()
    else:
        x = np.ones(G.shape[0]) / math.sqrt(G.shape[0])
    lam = float(x @ G @ x)
    for _ in range(max_iter):
        y = G @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny
        lam_new = float(x @ G @ x)
        # lam = sigma^2; ask for a margin so sigma is good to tol
        if abs(lam_new - lam) <= 1e-3 * tol * lam_new:
            return math.sqrt(max(lam_new, 0.0))
        lam = lam_new
    log.debug("power iteration did not settle; using SVD")
    return float(np.linalg.norm(A, 2))


def expm(L, t: float = 1.0, tol: float = EXPM_TOL) -> np.ndarray:
    """``e^{tL}`` by scaling and squaring around a truncated Taylor series.

    The scaled matrix has 1-norm at most 1/2; the series is summed until a
    term drops below ``tol`` relative to the partial sum, then squared back.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    A = _square(L, "L") * float(t)
    d = A.shape[0]
    norm1 = float(np.max(np.sum(np.abs(A), axis=0)))
    if norm1 > 700.0:
        raise RangeError(f"||tL||_1 = {norm1:.3g} is too large for double precision")
    s = max(0, int(math.ceil(math.log2(norm1 / 0.5)))) if norm1 > 0.5 else 0
    B = A / 2.0**s
    result = np.eye(d)
    term = np.eye(d)
    for k in range(1, 60):
        term = term @ B / k
        result = result + term
        if np.max(np.abs(term)) <= tol * np.max(np.abs(result)):
            break
    for _ in range(s):
        result = result @ result
    if not np.all(np.isfinite(result)):
        raise RangeError("matrix exponential overflowed")
    return result


def matrix_power(M, k: int) -> np.ndarray:
    return np.linalg.matrix_power(np.asarray(M, dtype=float), int(k))


def telescoping_residual(Z, Y, n: int) -> float:
    """``||(Z^n - Y^n) - sum_{k<n} Z^{n-k-1} (Z - Y) Y^k||``; roundoff only."""
    Z = _square(Z, "Z")
    Y = _square(Y, "Y")
    if Z.shape != Y.shape:
        raise ShapeError(f"Z {Z.shape} and Y {Y.shape} differ in order")
    if n < 1:
        raise DomainError("n must be >= 1")
    d = Z.shape[0]
    z_pows = [np.eye(d)]
    y_pows = [np.eye(d)]
    for _ in range(n):
        z_pows.append(z_pows[-1] @ Z)
        y_pows.append(y_pows[-1] @ Y)
    D = Z - Y
    rhs = sum(z_pows[n - k - 1] @ D @ y_pows[k] for k in range(n))
    return op_norm((z_pows[n] - y_pows[n]) - rhs)


def taylor_polynomial_apply(L, f, t: float, m: int) -> np.ndarray:
    """``sum_{k<=m} t^k L^k f / k!`` by Horner accumulation."""
    if m < 0:
        raise DomainError("m must be >= 0")
    L = _square(L, "L")
    f = np.asarray(f, dtype=float)
    p = f.copy()
    for k in range(m, 0, -1):
        p = f + (t / k) * (L @ p)
    return p


@dataclass(frozen=True)
class RemainderCheck:
    lhs: float
    rhs: float
    roundoff: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.roundoff


def taylor_remainder_check(L, f, t: float, m: int, lattice: int = 64) -> RemainderCheck:
    """Remainder of the degree-m Taylor polynomial of ``e^{tL} f``.

    ``rhs = t^{m+1}/(m+1)! ||L^{m+1} f|| sup_{s<=t} ||e^{sL}||``.  The sup
    is taken on ``lattice`` points and multiplied by ``e^{delta ||L||}``
    (delta = lattice spacing), which bounds the norm between points.
    ``roundoff`` is the floating-point allowance for forming the difference.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    L = _square(L, "L")
    f = np.asarray(f, dtype=float)
    if t == 0:
        return RemainderCheck(0.0, 0.0, 0.0)
    exact = expm(L, t) @ f
    poly = taylor_polynomial_apply(L, f, t, m)
    lhs = float(np.linalg.norm(exact - poly))

    step = expm(L, t / lattice)
    E = np.eye(L.shape[0])
    sup = 1.0
    for _ in range(lattice):
        E = E @ step
        sup = max(sup, op_norm(E))
    safety = math.exp((t / lattice) * op_norm(L))
    lm1 = f.copy()
    scale = np.linalg.norm(f)
    term = f.copy()
    for k in range(1, m + 2):
        lm1 = L @ lm1
        if k <= m:
            term = (t / k) * (L @ term)
            scale += np.linalg.norm(term)
    rhs = t ** (m + 1) / math.factorial(m + 1) * float(np.linalg.norm(lm1)) * sup * safety
    roundoff = 64 * np.finfo(float).eps * (scale + np.linalg.norm(exact))
    return RemainderCheck(lhs, rhs, float(roundoff))


# --- the product-formula bound --------------------------------------------------

KFunction = Callable[[float], float]


@dataclass
class MatrixSemigroupSystem:
    """A generator L, a candidate Chernoff function S, and the constants of the bound.

    ``K[j]`` bounds the Taylor defect coefficient of ``||L^j f||``;
    ``len(K)`` must be ``m + p + 1``.
    """

    L: np.ndarray
    S: Callable[[float], np.ndarray]
    T: float
    m: int
    p: int
    M1: float = 1.0
    M2: float = 1.0
    w: float = 0.0
    K: Sequence[KFunction] = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        self.L = _square(self.L, "L")
        if not self.T > 0:
            raise DomainError("T must be positive")
        if self.m < 0 or self.p < 1:
            raise DomainError("need m >= 0 and p >= 1")
        if self.M1 < 1 or self.M2 < 1 or self.w < 0:
            raise DomainError("need M1 >= 1, M2 >= 1 and w >= 0")
        if not self.K:
            self.K = [zero_k] * (self.m + self.p + 1)
        if len(self.K) != self.m + self.p + 1:
            raise ShapeError(f"expected {self.m + self.p + 1} K functions, got {len(self.K)}")

    @property
    def dim(self) -> int:
        return self.L.shape[0]

    def C(self, j: int, t: float) -> float:
        val = self.K[j](t) * math.exp(-self.w * t)
        if j == self.m + 1:
            val += self.M1 / math.factorial(self.m + 1)
        return val

    def generator_powers(self, f) -> list[float]:
        """``[||L^j f|| for j = 0..m+p]``."""
        v = np.asarray(f, dtype=float)
        out = [float(np.linalg.norm(v))]
        for _ in range(self.m + self.p):
            v = self.L @ v
            out.append(float(np.linalg.norm(v)))
        return out


def zero_k(t: float) -> float:
    return 0.0


@dataclass
class ConditionReport:
    """Lattice certification of the three hypotheses of the bound.

    Each ``worst_*`` is the largest ratio lhs/rhs seen (<= 1 passes).
    """

    worst_semigroup: float
    worst_power: float
    worst_defect: float
    lattice_points: int
    max_power: int
    k_little_o: list[bool]
    tolerance: float = 1e-12

    @property
    def passed(self) -> list[bool]:
        tol = 1.0 + self.tolerance
        return [bool(self.worst_semigroup <= tol), bool(self.worst_power <= tol), bool(self.worst_defect <= tol)]

    @property
    def all_pass(self) -> bool:
        return all(self.passed)

    def first_failure(self) -> int | None:
        for i, ok in enumerate(self.passed, start=1):
            if not ok:
                return i
        return None


def check_conditions(
    sys_: MatrixSemigroupSystem,
    lattice: int = CONDITION_LATTICE,
    max_power: int = MAX_POWER,
    n_vectors: int = 16,
    rng: np.random.Generator | None = None,
) -> ConditionReport:
    """Certify the growth and defect hypotheses on lattices.

    1. ``||e^{tL}|| <= M1 e^{wt}`` for t on a ``lattice``-point grid of [0, T];
    2. ``||S(t)^k|| <= M2 e^{kwt}`` for the same t (t > 0) and k <= ``max_power``;
    3. the Taylor defect bound on random unit vectors and the basis vectors,
       less a roundoff allowance for the cancellation.

    ``k_little_o[j]`` flags whether ``K_j(t) t^m`` decreases below 1e-3 of
    its largest value as t shrinks over eight decades.
    """
    rng = rng or np.random.default_rng(0)
    L = sys_.L
    ts = np.linspace(0.0, sys_.T, lattice + 1)
    worst1 = 0.0
    for t in ts:
        worst1 = max(worst1, op_norm(expm(L, t)) / (sys_.M1 * math.exp(sys_.w * t)))
    worst2 = 0.0
    for t in ts[1:]:
        St = np.asarray(sys_.S(t), dtype=float)
        P = np.eye(sys_.dim)
        for k in range(1, max_power + 1):
            P = P @ St
            worst2 = max(worst2, op_norm(P) / (sys_.M2 * math.exp(k * sys_.w * t)))
    vecs = rng.standard_normal((n_vectors, sys_.dim))
    vecs = np.vstack([vecs, np.eye(sys_.dim)])
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    worst3 = 0.0
    for t in ts[1:]:
        St = np.asarray(sys_.S(t), dtype=float)
        for f in vecs:
            Sf = St @ f
            poly = taylor_polynomial_apply(L, f, t, sys_.m)
            # cancellation in Sf - poly is roundoff, not defect
            noise = 64 * np.finfo(float).eps * (np.linalg.norm(Sf) + np.linalg.norm(poly))
            lhs = max(0.0, float(np.linalg.norm(Sf - poly)) - noise)
            norms = sys_.generator_powers(f)
            rhs = t ** (sys_.m + 1) * sum(sys_.K[j](t) * norms[j] for j in range(len(norms)))
            if lhs > 0:
                worst3 = max(worst3, lhs / rhs if rhs > 0 else math.inf)
    small = np.geomspace(sys_.T, sys_.T * 1e-8, 33)
    little_o = []
    for Kj in sys_.K:
        vals = np.array([Kj(t) * t**sys_.m for t in small])
        little_o.append(bool(np.all(np.diff(vals) <= 1e-15 * (1 + vals[:-1])) and vals[-1] <= 1e-3 * max(vals.max(), 1e-300)) or not vals.any())
    return ConditionReport(worst1, worst2, worst3, lattice + 1, max_power, little_o)


def chernoff_bound_rhs(sys_: MatrixSemigroupSystem, f, t: float, n: int) -> float:
    """Right-hand side of the product-formula bound for ``(f, t, n)``."""
    if n < 1 or n < t / sys_.T:
        raise PreconditionError(f"need integer n >= t/T = {t / sys_.T:g}, got n={n}", condition="n >= t/T")
    if t < 0:
        raise DomainError("t must be >= 0")
    norms = sys_.generator_powers(f)
    tau = t / n
    total = sum(sys_.C(j, tau) * norms[j] for j in range(len(norms)))
    return sys_.M1 * sys_.M2 * t ** (sys_.m + 1) * math.exp(sys_.w * t) / n**sys_.m * total


@dataclass(frozen=True)
class BoundRow:
    t: float
    n: int
    f_index: int
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class BoundCheckReport:
    rows: list[BoundRow]
    conditions: ConditionReport | None = None
    tolerance: float = SLACK_TOL

    @property
    def min_slack(self) -> float:
        return min((r.slack for r in self.rows), default=math.inf)

    @property
    def all_pass(self) -> bool:
        return all(r.slack >= -self.tolerance for r in self.rows)


def chernoff_error(sys_: MatrixSemigroupSystem, f, t: float, n: int) -> float:
    """``||S(t/n)^n f - e^{tL} f||`` with the product formed literally."""
    f = np.asarray(f, dtype=float)
    step = np.asarray(sys_.S(t / n), dtype=float)
    return float(np.linalg.norm(matrix_power(step, n) @ f - expm(sys_.L, t) @ f))


def verify_main_bound(
    sys_: MatrixSemigroupSystem,
    fs: Sequence,
    ts: Sequence[float],
    ns: Sequence[int],
    jobs: int = 1,
    conditions: ConditionReport | None = None,
    check: bool = True,
) -> BoundCheckReport:
    """Evaluate lhs and rhs of the bound for every admissible ``(f, t, n)``.

    Triples with ``n < t/T`` are skipped.  Raises :class:`PreconditionError`
    carrying the violated hypothesis index when the lattice certification of
    the system fails; with ``check=False`` the certification is skipped.
    """
    if check:
        conditions = conditions or check_conditions(sys_)
        bad = conditions.first_failure()
        if bad is not None:
            raise PreconditionError(f"hypothesis {bad} of the bound fails on the lattice", condition=bad)
    vectors = [np.asarray(f, dtype=float) for f in fs]
    triples = [(t, n, i) for t in ts for n in ns for i in range(len(vectors)) if n >= t / sys_.T]

    def row(tri):
        t, n, i = tri
        f = vectors[i]
        return BoundRow(float(t), int(n), i, chernoff_error(sys_, f, t, n), chernoff_bound_rhs(sys_, f, t, n))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(row, triples))
    else:
        rows = [row(tri) for tri in triples]
    rows.sort(key=lambda r: (r.t, r.n, r.f_index))
    return BoundCheckReport(rows, conditions)


# --- systems ---------------------------------------------------------------------


def taylor_matrix(L, t: float, m: int) -> np.ndarray:
    """``sum_{k<=m} t^k L^k / k!``."""
    L = _square(L, "L")
    out = np.eye(L.shape[0])
    term = np.eye(L.shape[0])
    for k in range(1, m + 1):
        term = term @ L * (t / k)
        out = out + term
    return out


def exact_exp_system(L, T: float = 1.0, m: int = 1, p: int = 1, M1: float = 1.0, w: float | None = None) -> MatrixSemigroupSystem:
    """``S(t) = e^{tL}``: the product formula is exact."""
    L = _square(L, "L")
    if w is None:
        w = max(0.0, log_norm(L))
    return MatrixSemigroupSystem(L, lambda t: expm(L, t), T, m, p, M1, M1, w, remainder_k(m, p, M1, w, T), name="exact_exp")


def remainder_k(m: int, p: int, M1: float, w: float, T: float) -> list[KFunction]:
    """K for ``S = e^{tL}``: the defect is the Taylor remainder, so ``K_{m+1} = M1 e^{wT}/(m+1)!``."""
    c = M1 * math.exp(w * T) / math.factorial(m + 1)
    K: list[KFunction] = [zero_k] * (m + p + 1)
    K[m + 1] = lambda t: c
    return K


def log_norm(L) -> float:
    """Logarithmic 2-norm ``lambda_max((L + L^T)/2)``: ``||e^{tL}|| <= e^{t mu}``."""
    L = _square(L, "L")
    return float(np.linalg.eigvalsh(0.5 * (L + L.T))[-1])


def taylor_plus_perturbation(
    L,
    R,
    m: int,
    exponent: float | None = None,
    T: float = 1.0,
    p: int = 1,
    M1: float = 1.0,
    M2: float = 1.0,
    w: float | None = None,
    K: Sequence[KFunction] | None = None,
    name: str = "taylor_plus_perturbation",
) -> MatrixSemigroupSystem:
    """``S(t) = sum_{k<=m} t^k L^k/k! + t^exponent R``.

    With ``exponent`` defaulting to ``m+1`` and no explicit ``K``, the defect
    is bounded by ``t^{m+1} ||R|| ||f||`` for t <= 1, i.e. ``K_0 = ||R||``.
    The default ``w = ||L|| + ||R||`` then gives ``||S(t)|| <= e^{wt}``.
    """
    L = _square(L, "L")
    R = _square(R, "R")
    exponent = float(m + 1 if exponent is None else exponent)
    nR = op_norm(R)
    if K is None:
        if exponent < m + 1 or T > 1:
            raise DomainError("default K needs exponent >= m+1 and T <= 1; pass K explicitly")
        K = [lambda t, c=nR: c] + [zero_k] * (m + p)
    if w is None:
        w = op_norm(L) + nR

    def S(t):
        return taylor_matrix(L, t, m) + t**exponent * R

    return MatrixSemigroupSystem(L, S, T, m, p, M1, M2, w, list(K), name=name)


def fractional_defect_system(L, eps: float = 0.5) -> MatrixSemigroupSystem:
    """Second-order Taylor step plus ``t^{2+eps} L^3`` on (0, 1].

    The defect is ``t^{2+eps} ||L^3 f||``, so ``m = 2``, ``p = 1``,
    ``K_3(t) = t^{eps-1}`` and ``M1 = M2 = w = 1`` provided
    ``||e^{tL}|| <= e^t`` and ``||S(t)|| <= e^t``; :func:`check_conditions`
    certifies both on lattices.  The leading error term is
    ``t^{2+eps} e^t ||L^3 f|| / n^{1+eps}``.
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    L = _square(L, "L")
    L3 = matrix_power(L, 3)
    K = [zero_k, zero_k, zero_k, lambda t: t ** (eps - 1.0)]
    return taylor_plus_perturbation(L, L3, m=2, exponent=2.0 + eps, T=1.0, p=1, M1=1.0, M2=1.0, w=1.0, K=K, name=f"fractional_defect(eps={eps:g})")


def random_generator(rng: np.random.Generator, d: int, norm: float = 0.5) -> np.ndarray:
    """Random d x d matrix rescaled to operator norm ``norm``."""
    A = rng.uniform(-1.0, 1.0, (d, d))
    return A * (norm / op_norm(A))


def random_stable(rng: np.random.Generator, d: int, margin: float = 0.1) -> np.ndarray:
    """Random matrix shifted so every eigenvalue has real part <= -margin."""
    A = rng.uniform(-1.0, 1.0, (d, d))
    abscissa = float(np.max(np.linalg.eigvals(A).real))
    return A - (abscissa + margin) * np.eye(d)


# --- JSON systems -----------------------------------------------------------------


def k_from_spec(spec: dict) -> tuple[int, KFunction]:
    """``{j, kind: zero|constant|power, params}`` -> (j, K_j)."""
    j = int(spec["j"])
    kind = spec.get("kind", "zero")
    params = spec.get("params") or {}
    if kind == "zero":
        return j, zero_k
    if kind == "constant":
        c = float(params["value"])
        return j, lambda t: c
    if kind == "power":
        c, e = float(params.get("coef", 1.0)), float(params["exponent"])
        return j, lambda t: c * t**e
    raise DomainError(f"unknown K kind {kind!r}")


def system_from_spec(spec: dict) -> MatrixSemigroupSystem:
    """Build a system from the JSON layout used by the CLI."""
    entries = np.asarray(spec["L"], dtype=float)
    d = int(round(math.sqrt(entries.size)))
    if d * d != entries.size:
        raise ShapeError("L must list d*d row-major entries")
    L = entries.reshape(d, d)
    m, p = int(spec.get("m", 1)), int(spec.get("p", 1))
    T = float(spec.get("T", 1.0))
    M1, M2 = float(spec.get("M1", 1.0)), float(spec.get("M2", 1.0))
    w = spec.get("w")
    K = [zero_k] * (m + p + 1)
    explicit_k = "K" in spec
    for item in spec.get("K", []):
        j, fn = k_from_spec(item)
        if not 0 <= j <= m + p:
            raise ShapeError(f"K index {j} outside 0..{m + p}")
        K[j] = fn
    s_spec = spec.get("S", {"kind": "exact_exp"})
    kind = s_spec.get("kind")
    params = s_spec.get("params") or {}
    if kind == "exact_exp":
        w = float(w if w is not None else max(0.0, log_norm(L)))
        if not explicit_k:
            K = remainder_k(m, p, M1, w, T)
        return MatrixSemigroupSystem(L, lambda t: expm(L, t), T, m, p, M1, M2, w, K, name="exact_exp")
    if kind == "taylor_plus_perturbation":
        if "R" in params:
            R = np.asarray(params["R"], dtype=float).reshape(d, d)
        else:
            R = float(params.get("scale", 1.0)) * matrix_power(L, int(params.get("L_power", m + 1)))
        return taylor_plus_perturbation(
            L, R, m, params.get("exponent"), T, p, M1, M2,
            None if w is None else float(w),
            K if explicit_k else None,
        )
    raise DomainError(f"unknown S kind {kind!r}")
