import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chernoff_lab import chernoff_core as cc
from chernoff_lab.errors import DomainError, PreconditionError, RangeError, ShapeError



def svd_norm(M):
    return float(np.linalg.svd(M, compute_uv=False)[0])


@pytest.mark.parametrize("d", [1, 2, 5, 9])
def test_op_norm_matches_svd(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        M = rng.normal(size=(d, d))
        assert cc.op_norm(M) == pytest.approx(svd_norm(M), rel=1e-12)


def test_op_norm_special_cases():
    rng = np.random.default_rng(2)
    assert cc.op_norm(np.zeros((3, 3))) == 0.0
    # repeated top singular value
    assert cc.op_norm(np.diag([2.0, -2.0, 1.0])) == pytest.approx(2.0, rel=1e-14)
    M = rng.normal(size=(2, 3))
    assert cc.op_norm(M) == pytest.approx(svd_norm(M), rel=1e-12)


@pytest.mark.parametrize("scale", [1e-6, 0.3, 3.0, 40.0])
def test_expm_matches_scipy(scale):
    rng = np.random.default_rng(int(scale * 1e6))
    for _ in range(10):
        L = rng.normal(size=(4, 4)) * scale / 4
        ref = sla.expm(L)
        assert np.max(np.abs(cc.expm(L) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_expm_known_values():
    # rotation generator
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    E = cc.expm(J, math.pi / 2)
    np.testing.assert_allclose(E, [[0, -1], [1, 0]], atol=1e-15)
    # nilpotent: exp(N) = I + N
    N = np.array([[0.0, 5.0], [0.0, 0.0]])
    np.testing.assert_allclose(cc.expm(N), [[1, 5], [0, 1]], atol=1e-14)
    np.testing.assert_array_equal(cc.expm(J, 0.0), np.eye(2))


def test_expm_range_error():
    with pytest.raises(RangeError):
        cc.expm(np.array([[1000.0]]))


def test_telescoping_identity_is_roundoff():
    rng = np.random.default_rng(5)
    for _ in range(50):
        d = int(rng.integers(1, 7))
        Z, Y = rng.normal(size=(2, d, d)) / math.sqrt(d)
        n = int(rng.integers(1, 21))
        scale = max(1.0, svd_norm(Z), svd_norm(Y)) ** n
        assert cc.telescoping_residual(Z, Y, n) <= 1e-13 * n * n * scale


def test_telescoping_errors():
    with pytest.raises(ShapeError):
        cc.telescoping_residual(np.eye(2), np.eye(3), 2)
    with pytest.raises(DomainError):
        cc.telescoping_residual(np.eye(2), np.eye(2), 0)


def test_taylor_polynomial_against_explicit_sum():
    rng = np.random.default_rng(3)
    L = rng.normal(size=(3, 3))
    f = rng.normal(size=3)
    expected = sum(np.linalg.matrix_power(L, k) @ f * 0.7**k / math.factorial(k) for k in range(5))
    np.testing.assert_allclose(cc.taylor_polynomial_apply(L, f, 0.7, 4), expected, rtol=1e-13)
    np.testing.assert_allclose(cc.taylor_matrix(L, 0.7, 4) @ f, expected, rtol=1e-13)


def test_taylor_remainder_scalar_closed_form():
    # 1x1 L = [lam]: lhs = |e^{lam t} - sum (lam t)^k/k!|
    lam, t, m = -0.8, 0.9, 2
    chk = cc.taylor_remainder_check(np.array([[lam]]), np.array([1.0]), t, m)
    exact = abs(math.exp(lam * t) - sum((lam * t) ** k / math.factorial(k) for k in range(m + 1)))
    assert chk.lhs == pytest.approx(exact, rel=1e-12)
    assert chk.holds


def test_taylor_remainder_random_stable():
    rng = np.random.default_rng(3)
    for _ in range(30):
        L = cc.random_stable(rng, 4)
        f = rng.normal(size=4)
        for m in range(5):
            assert cc.taylor_remainder_check(L, f, 1.0, m).holds


def test_log_norm_bounds_exponential():
    rng = np.random.default_rng(3)
    for _ in range(10):
        L = rng.normal(size=(4, 4))
        mu = cc.log_norm(L)
        for t in (0.1, 1.0):
            assert svd_norm(sla.expm(t * L)) <= math.exp(mu * t) * (1 + 1e-12)


def test_exact_exp_system_bound_and_zero_error():
    L = np.array([[-1.0, 0.5], [0.0, -0.5]])
    sys_ = cc.exact_exp_system(L)
    rep = cc.verify_main_bound(sys_, [np.array([1.0, 0.0]), np.array([0.3, -2.0])], [0.5, 1.0], [1, 2, 8])
    assert rep.all_pass
    assert max(r.lhs for r in rep.rows) <= 1e-14


def test_fractional_defect_conditions_and_rate():
    L = cc.random_generator(np.random.default_rng(7), 4)
    sys_ = cc.fractional_defect_system(L, 0.5)
    cond = cc.check_conditions(sys_)
    assert cond.all_pass
    f = np.ones(4) / 2
    ns = [16, 32, 64, 128, 256]
    errs = [cc.chernoff_error(sys_, f, 1.0, n) for n in ns]
    slope = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert slope == pytest.approx(1.5, abs=0.05)
    rep = cc.verify_main_bound(sys_, [f], [1.0], ns, conditions=cond)
    assert rep.all_pass and rep.min_slack > 0


def test_condition_failure_raises_with_index():
    # skew L keeps ||e^{tL}|| = 1, while S(t) = I + tL + 50 t^2 I grows far faster
    L = np.array([[0.0, 1.0], [-1.0, 0.0]])
    sys_ = cc.taylor_plus_perturbation(L, 50 * np.eye(2), m=1, T=1.0, w=0.0)
    with pytest.raises(PreconditionError) as err:
        cc.verify_main_bound(sys_, [np.ones(2)], [1.0], [1, 2])
    assert err.value.condition == 2


def test_bound_rhs_precondition():
    sys_ = cc.exact_exp_system(np.array([[-1.0]]), T=0.5)
    with pytest.raises(PreconditionError):
        cc.chernoff_bound_rhs(sys_, np.ones(1), 1.0, 1)
    rows = cc.verify_main_bound(sys_, [np.ones(1)], [1.0], [1, 2, 3], check=False).rows
    assert [r.n for r in rows] == [2, 3]


def test_bound_rhs_hand_value():
    # m=0, p=1, K=(0, 2), M1=M2=1, w=0: rhs = t (K_1 + M1/1!) ||Lf|| = t*3*||Lf||
    L = np.array([[0.0, 1.0], [0.0, 0.0]])
    sys_ = cc.MatrixSemigroupSystem(L, lambda t: np.eye(2), 1.0, 0, 1, K=[cc.zero_k, lambda t: 2.0])
    f = np.array([0.0, 3.0])
    assert cc.chernoff_bound_rhs(sys_, f, 0.5, 4) == pytest.approx(0.5 * 3 * 3)


def test_system_validation():
    with pytest.raises(ShapeError):
        cc.MatrixSemigroupSystem(np.eye(2), lambda t: np.eye(2), 1.0, 1, 1, K=[cc.zero_k])
    with pytest.raises(DomainError):
        cc.MatrixSemigroupSystem(np.eye(2), lambda t: np.eye(2), 1.0, 1, 1, M1=0.5)


def test_system_from_spec_exact():
    sys_ = cc.system_from_spec({"L": [-1.0, 0.5, 0.0, -0.5], "S": {"kind": "exact_exp"}, "m": 1, "p": 1, "T": 1.0})
    assert cc.check_conditions(sys_).all_pass


def test_little_o_flags():
    L = cc.random_generator(np.random.default_rng(1), 3)
    cond = cc.check_conditions(cc.fractional_defect_system(L), lattice=8, max_power=8)
    # t^{eps-1} t^2 -> 0
    assert cond.k_little_o[3]


@settings(max_examples=30, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-2, 2)), st.integers(1, 12))
def test_telescoping_property(Z, n):
    Y = Z.T * 0.5
    assert cc.telescoping_residual(Z, Y, n) <= 1e-12 * max(1.0, svd_norm(Z)) ** n * n * n


def test_expm_diagonal_and_unit_nilpotent():
    lam = np.array([-2.0, 0.0, 0.7])
    np.testing.assert_allclose(cc.expm(np.diag(lam), 1.3), np.diag(np.exp(1.3 * lam)), rtol=1e-14)
    np.testing.assert_allclose(cc.expm(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0), [[1, 1], [0, 1]], atol=1e-15)


def test_expm_rejects_bad_tol():
    with pytest.raises(DomainError):
        cc.expm(np.eye(2), 1.0, tol=0.0)


def test_semigroup_law():
    rng = np.random.default_rng(4)
    for _ in range(50):
        d = int(rng.integers(1, 7))
        L = rng.uniform(-1, 1, (d, d))
        s, t = rng.uniform(0, 2, 2)
        assert svd_norm(cc.expm(L, s) @ cc.expm(L, t) - cc.expm(L, s + t)) < 1e-10
