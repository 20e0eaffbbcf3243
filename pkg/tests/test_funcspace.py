import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from chernoff_lab import funcspace as fs
from chernoff_lab.errors import CapabilityError, DomainError, EvaluationError


def brute_modulus(f, x, domain, points=4001):
    """Pairwise max over a dense lattice with offsets up to x."""
    xs = np.linspace(*domain, points)
    vals = f(xs)
    k = int(round(x / (xs[1] - xs[0])))
    best = 0.0
    for j in range(1, k + 1):
        best = max(best, float(np.max(np.abs(vals[j:] - vals[:-j]))))
    return best


def test_sup_norm_ramp_plateau():
    assert fs.sup_norm(fs.ramp(), (-2, 3)).value == 1.0


def test_sup_norm_zero():
    assert fs.sup_norm(fs.constant(0.0), (-1, 1)).value == 0.0


def test_sup_norm_sine_matches_analytic_max():
    est = fs.sup_norm(fs.sine(), (0, 2 * math.pi), tol=1e-9)
    assert abs(est.value - 1.0) <= 1e-9
    dense = np.max(np.abs(np.sin(np.linspace(0, 2 * math.pi, 10**6 + 1))))
    assert abs(est.value - dense) <= 1e-9


def test_sup_norm_oscillatory_not_fooled_by_coarse_lattice():
    f = fs.from_expr(sympy.sin(3 * fs.X) * sympy.exp(-fs.X**2 / 4))
    xs = np.linspace(-15, 15, 3_000_001)
    dense = float(np.max(np.abs(f(xs))))
    assert fs.sup_norm(f, (-15, 15)).value == pytest.approx(dense, abs=1e-9)


def test_sup_norm_piecewise_linear_exact_with_off_lattice_kink():
    f = fs.piecewise_linear([0.123456789, 0.2, 0.3], [0.0, 7.25, 0.0])
    assert fs.sup_norm(f, (-1, 1)).value == 7.25


@pytest.mark.filterwarnings("ignore:divide by zero")
def test_sup_norm_rejects_non_finite():
    f = fs.from_expr(1 / fs.X)
    with pytest.raises(EvaluationError) as err:
        fs.sup_norm(f, (-1, 1), initial_points=3)
    assert err.value.x == 0.0


def test_sup_norm_bad_args():
    with pytest.raises(DomainError):
        fs.sup_norm(fs.ramp(), (0, 1), tol=0)
    with pytest.raises(DomainError):
        fs.sup_norm(fs.ramp(), (0, math.inf))


def test_sup_norm_monotone_under_domain_enlargement():
    f = fs.gaussian_bump(1.0, 0.3)
    a = fs.sup_norm(f, (2, 3)).value
    b = fs.sup_norm(f, (1.5, 3)).value
    c = fs.sup_norm(f, (-5, 5)).value
    assert a <= b <= c


def test_modulus_ramp():
    assert fs.modulus_of_continuity(fs.ramp(), 0.5, (-2, 3)) == pytest.approx(0.5)
    assert fs.modulus_of_continuity(fs.ramp(), 0.5, (-2, 3), use_analytic=False) == pytest.approx(0.5, abs=1e-12)


def test_modulus_zero_and_negative():
    assert fs.modulus_of_continuity(fs.sine(), 0.0, (0, 7)) == 0.0
    with pytest.raises(DomainError):
        fs.modulus_of_continuity(fs.ramp(), -0.1, (0, 1))


def test_modulus_sine_at_pi_against_pair_lattice():
    num = fs.modulus_of_continuity(fs.sine(), math.pi, (-10, 10))
    brute = brute_modulus(fs.sine(), math.pi, (-10, 10), points=20001)
    assert num == pytest.approx(2.0, abs=1e-5)
    # both are lattice lower estimates of the same supremum
    assert abs(num - brute) <= 1e-5


@pytest.mark.parametrize("f", [fs.ramp(), fs.sine(), fs.gaussian_bump(0, 0.7)])
def test_modulus_non_decreasing(f):
    xs = np.linspace(0, 2, 21)
    vals = [fs.modulus_of_continuity(f, x, (-6, 6), use_analytic=False) for x in xs]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_numeric_and_analytic_modulus_agree_for_ramp_and_sine():
    for f in (fs.ramp(), fs.sine()):
        for x in np.linspace(0, 2, 9):
            a = fs.modulus_of_continuity(f, x, (-8, 8))
            n = fs.modulus_of_continuity(f, x, (-8, 8), use_analytic=False)
            # both functions are 1-Lipschitz; the numeric lattice is finer than 1e-2
            assert abs(a - n) <= 2 * 1e-2


def test_smooth_slow_vector_shape():
    f = fs.smooth_slow_vector()
    xs = np.array([-5, -3, -1, -0.5, 0, 0.5, 1, 3, 5])
    np.testing.assert_allclose(f(xs), [-2, -2, -1, -0.5, 0, 0.5, 1, 2, 2], atol=1e-12)
    assert fs.modulus_of_continuity(f, 0.5, (-5, 5)) == pytest.approx(0.5, abs=1e-9)


def test_function_metadata_and_derivatives():
    g = fs.gaussian_bump()
    assert g.derivative_order_available == fs.UNLIMITED
    assert g.derivative(2)(np.array([0.0]))[0] == pytest.approx(-2.0)
    pl = fs.ramp()
    assert pl.derivative_order_available == 1
    with pytest.raises(CapabilityError):
        pl.derivative(2)


def test_sampled_grid_constant_extension():
    f = fs.sampled_grid(0.0, 1.0, [0.0, 1.0, 3.0])
    assert f(np.array([-4.0]))[0] == 0.0
    assert f(np.array([9.0]))[0] == 3.0
    assert f(np.array([0.25]))[0] == pytest.approx(0.5)


def test_shifted_moves_kinks_and_flat_region():
    r = fs.ramp().shifted(1.0)
    assert r(np.array([0.0]))[0] == 1.0
    assert r.breakpoints == (-1.0, 0.0)
    assert r.flat_outside == (-1.0, 0.0)


def test_from_spec_roundtrip():
    f = fs.from_spec({"kind": "gaussian", "params": {"center": 1, "width": 2}})
    assert f(np.array([1.0]))[0] == 1.0
    with pytest.raises(DomainError):
        fs.from_spec({"kind": "nope"})


def test_axioms_sqrt_pass():
    rep = fs.check_modulus_axioms(math.sqrt, np.linspace(0, 4, 81))
    assert rep.all_pass and rep.ratio_nonincreasing


def test_axioms_square_fails_semiadditivity():
    rep = fs.check_modulus_axioms(lambda x: x * x, np.linspace(0, 4, 81))
    assert not rep.semiadditive
    assert rep.zero_at_zero and rep.monotone


def test_axioms_linear_pass():
    rep = fs.check_modulus_axioms(lambda x: 2 * x, np.linspace(0, 4, 81))
    assert rep.all_pass and rep.ratio_nonincreasing


def test_continuity_proxy_is_conservative_for_steep_roots():
    rep = fs.check_modulus_axioms(lambda x: x**0.25, np.linspace(0, 3, 61))
    assert rep.semiadditive and rep.monotone and not rep.continuity_proxy


def test_axioms_jump_fails_continuity_proxy():
    rep = fs.check_modulus_axioms(lambda x: 0.0 if x < 1 else 1.0, np.linspace(0, 2, 41))
    assert not rep.continuity_proxy


def test_axioms_lattice_validation():
    with pytest.raises(DomainError):
        fs.check_modulus_axioms(math.sqrt, [])
    with pytest.raises(DomainError):
        fs.check_modulus_axioms(math.sqrt, [1.0, 0.5])


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 1.0), st.floats(0.05, 2.0))
def test_concave_powers_are_moduli(p, c):
    # the midpoint proxy shrinks jumps at 0 by 2^-p, so p >= 1/2 clears 0.8
    rep = fs.check_modulus_axioms(lambda x: c * x**p, np.linspace(0, 3, 61))
    assert rep.all_pass
