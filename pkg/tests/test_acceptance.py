"""Exit criteria, each checked at its stated tolerance and time limit."""

import math
import time

import numpy as np
import pytest
import sympy

from chernoff_lab import cli
from chernoff_lab import funcspace as fs
from chernoff_lab import parabolic as pb
from chernoff_lab import translation as tr
from chernoff_lab.parabolic.grid import KAPPA
from chernoff_lab.parabolic.operator import bounded_smooth_preset
from chernoff_lab.parabolic.scheme import ROUNDOFF
from chernoff_lab.presets import preset_config
from chernoff_lab.rates import fit_order

pytestmark = pytest.mark.acceptance
X = fs.X


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_exact_error_law_inv_x(acceptance_report):
    ns = (1, 2, 4, 8, 16, 32, 64)
    with Clock() as c:
        exp = tr.TranslationExperiment(fs.ramp(), tr.inv_x(), 1.0, ns, lattice_size=512)
        rep = tr.exact_error_law(exp)
    worst = max(abs(r.error - 1.0 / r.n) for r in rep.rows)
    ok = worst <= 1e-6 and c.seconds < 5
    assert acceptance_report(1, ok, f"max |error - 1/n| = {worst:.2e}, {c.seconds:.2f}s")


def test_slow_convergence_inv_log(acceptance_report):
    ns = tuple(range(1, 4097))
    with Clock() as c:
        exp = tr.TranslationExperiment(fs.ramp(), tr.inv_log(), 1.0, ns, lattice_size=512)
        rep = tr.exact_error_law(exp)
        order, _ = fit_order(rep.rows)
    worst = max(abs(r.error - 1.0 / math.log(r.n + math.e)) for r in rep.rows)
    ok = worst <= 1e-6 and order < 0.2 and c.seconds < 10
    assert acceptance_report(2, ok, f"max deviation {worst:.2e}, fitted order {order:.3f}, {c.seconds:.2f}s")


def test_counterexample_no_norm_convergence(acceptance_report):
    with Clock() as c:
        res = cli.execute(preset_config("translation:counterexample"))
    ns = [r[0] for r in res.rows]
    worst_norm = max(abs(r[1] - 1.0) for r in res.rows)
    min_err = min(min(r[2], r[3]) for r in res.rows)
    ok = ns == list(range(1, 1025)) and worst_norm == 0.0 and min_err >= 1 - 1e-9 and c.seconds < 5
    assert acceptance_report(3, ok, f"min error {min_err:.12f}, norm deviation {worst_norm:g}, {c.seconds:.2f}s")


def _suite(**kw):
    rng = np.random.Generator(np.random.PCG64(7))
    base = dict(pairs=1000, d_max=6, n_max=20, taylor_draws=200, m_max=4, t_values=(0.1, 0.5, 1.0), semigroup_draws=0)
    base.update(kw)
    return cli.identity_suite(rng, **base)


def test_telescoping_identity(acceptance_report):
    with Clock() as c:
        rows = _suite(taylor_draws=0)
    tele = [r for r in rows if r[0] == "telescoping"]
    worst = max(r[5] / r[6] for r in tele)
    ok = len(tele) == 1000 and all(r[2] <= 6 and r[3] <= 20 for r in tele) and worst < 1 and c.seconds < 10
    assert acceptance_report(4, ok, f"worst residual / (1e-10 (|Z|+|Y|)^n) = {worst:.2e}, {c.seconds:.2f}s")


def test_taylor_remainder(acceptance_report):
    with Clock() as c:
        rows = _suite(pairs=0)
    tay = [r for r in rows if r[0] == "taylor_remainder"]
    worst = max(r[5] / r[6] for r in tay)
    covered = {(r[3], r[4]) for r in tay}
    ok = len(tay) == 200 and worst <= 1 and len(covered) == 15 and c.seconds < 10
    assert acceptance_report(5, ok, f"worst lhs/rhs {worst:.3f} over {len(covered)} (m, t) cells, {c.seconds:.2f}s")


def test_main_bound_fractional_defect(acceptance_report):
    cfg = preset_config("matrix:fractional_defect")
    with Clock() as c:
        res = cli.execute(cfg)
    slacks = [r[5] for r in res.rows]
    ns = sorted({r[1] for r in res.rows})
    ratio = res.metrics.get("rate_ratio")
    ok = (
        res.all_passed
        and ns == list(range(1, 257))
        and min(slacks) >= -1e-10
        and ratio is not None
        and ratio < 10
        and c.seconds < 30
    )
    assert acceptance_report(6, ok, f"min slack {min(slacks):.3e}, lhs n^1.5 ratio {ratio:.3f}, {c.seconds:.2f}s")


def test_parabolic_exact_quadratic(acceptance_report):
    heat = pb.ParabolicCoefficients.constant(1.0)
    f = fs.from_expr(X**2)
    t, interest, h = 1.0, (-1.0, 1.0), 0.05
    worst = 0.0
    fails = []
    with Clock() as c:
        for n in range(1, 33):
            lo, hi = pb.chernoff_window(heat, interest, t, n, h)
            g = pb.grid_from_function(f, lo, hi, h=h, margin=0.0)
            res = pb.iterate_chernoff(heat, g, t, n, interest)
            err = res.error_against(lambda x: x**2 + 2 * t)
            worst = max(worst, err / res.budget if res.budget > 0 else (0.0 if err == 0 else math.inf))
            if err > res.budget:
                fails.append(n)
    ok = not fails and c.seconds < 5
    assert acceptance_report(7, ok, f"worst error/budget {worst:.3f}, failing n {fails}, {c.seconds:.2f}s")


def test_parabolic_rate(acceptance_report):
    with Clock() as c:
        heat = cli.execute(preset_config("parabolic:heat_bump"))
        var = cli.execute(preset_config("parabolic:variable_diffusion"))
    o1, r1 = heat.metrics["fitted_order"], heat.metrics["r2"]
    o2 = var.metrics["fitted_order"]
    ok = 0.85 <= o1 <= 1.15 and r1 >= 0.99 and 0.8 <= o2 <= 1.2 and c.seconds < 120
    assert acceptance_report(8, ok, f"heat order {o1:.3f} r2 {r1:.5f}, variable-a order {o2:.3f}, {c.seconds:.2f}s")


def smooth_suite():
    """Twenty smooth functions, each negligible outside [-12, 12]."""
    g = lambda c, w: sympy.exp(-((X - c) / w) ** 2)
    exprs = [g(c, w) for c, w in [(0, 1), (1, 0.5), (-2, 2), (0.5, 0.3), (3, 1.5)]]
    exprs += [g(0, 1) * sympy.cos(k * X) for k in (1, 2, 3)]
    exprs += [g(0, 2) * sympy.sin(X), X * g(0, 1), X**2 * g(0, 1.5), 1 / sympy.cosh(X) ** 2]
    exprs += [sympy.exp(-X**4 / 4), g(-1, 0.7) - g(1, 0.7), g(0, 1) / (1 + X**2), sympy.tanh(X) * g(0, 3)]
    exprs += [g(0, 1) * sympy.cos(X) ** 2, 2 * g(0.2, 0.8), -g(0, 4), g(0, 1) * (1 + X / 3)]
    return [fs.from_expr(e) for e in exprs]


def test_one_step_defect(acceptance_report):
    coeff_sets = [
        pb.ParabolicCoefficients.constant(1.0),
        pb.ParabolicCoefficients.constant(0.5, 1.0, -0.3),
        pb.ParabolicCoefficients(bounded_smooth_preset("bump_half"), bounded_smooth_preset("tanh_drift"),
                                 bounded_smooth_preset("sech_potential"), window=(-12.0, 12.0)),
    ]
    ts = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
    funcs = smooth_suite()
    worst = 0.0
    cases = 0
    bad = []
    h = 0.01
    with Clock() as c:
        for coeffs in coeff_sets:
            for i, f in enumerate(funcs):
                # the suite is below roundoff beyond |x| = 14
                g = pb.grid_from_function(f, -14.0, 14.0, h=h, margin=math.inf)
                mask = g.mask((-10.0, 10.0))
                xs = g.nodes[mask]
                a, b, cc_ = coeffs.values(xs)
                Af = a * f.derivative(2)(xs) + b * f.derivative(1)(xs) + cc_ * f(xs)
                for t in ts:
                    lhs, rhs = pb.one_step_defect(coeffs, f, t, window=(-10.0, 10.0))
                    # grid step: cubic interpolation adds at most KAPPA max|delta^4 f|
                    step = pb.apply_chernoff_step(coeffs, g, t)
                    lhs_grid = float(np.max(np.abs(step.values[mask] - f(xs) - t * Af)))
                    budget = KAPPA * g.fourth_difference().max() + ROUNDOFF * 4 * g.sup()
                    cases += 1
                    worst = max(worst, lhs / rhs, lhs_grid / (rhs + budget))
                    if lhs > rhs or lhs_grid > rhs + budget:
                        bad.append((coeffs.name, i, t))
    ok = not bad and cases == 300
    assert acceptance_report(9, ok, f"{cases} cases, worst lhs/rhs {worst:.3f}, {c.seconds:.2f}s")


def smoke_suite():
    g = lambda c, w: sympy.exp(-((X - c) / w) ** 2)
    exprs = [g(0, 1), g(1, 0.5), g(-2, 2), g(0, 1) * sympy.cos(2 * X), X * g(0, 1),
             1 / sympy.cosh(X) ** 2, sympy.exp(-X**4 / 4), g(-1, 0.7) - g(1, 0.7), g(0, 2) * sympy.sin(X), -3 * g(0.5, 1.2)]
    return [fs.from_expr(e) for e in exprs]


def test_derivative_machinery(acceptance_report):
    coeffs = pb.ParabolicCoefficients(
        bounded_smooth_preset("bump_half"), bounded_smooth_preset("tanh_drift"),
        bounded_smooth_preset("sech_potential"), window=(-15.0, 15.0),
    )
    a, b, c_ = coeffs.a, coeffs.b, coeffs.c
    d = lambda e, k=1: sympy.diff(e, X, k)
    displayed = [
        a * d(c_, 2) + b * d(c_) + c_**2,
        a * d(b, 2) + b * d(b) + 2 * a * d(c_) + 2 * b * c_,
        a * d(a, 2) + d(a) * b + b**2 + 2 * a * d(b) + 2 * a * c_,
        2 * a * d(a) + 2 * a * b,
        a**2,
    ]
    with Clock() as clock:
        exp = pb.expand_power(coeffs, 2)
        xs = np.random.default_rng(10).uniform(-10, 10, 100)
        coef_gap = max(
            float(np.max(np.abs(fs._lambdified(got, 0)(xs) - fs._lambdified(want, 0)(xs))))
            for got, want in zip(exp.coefficients, displayed)
        )
        table = pb.derive_derivative_constants(coeffs, 4)
        landau_ok = True
        ineq_ok = True
        worst = 0.0
        for f in smoke_suite():
            for h in (0.25, 1.0, 2.0):
                landau_ok &= pb.landau_inequality_check(f, h, coeffs.window).holds
            for n, lhs, rhs in cli.derivative_check(coeffs, table, f):
                worst = max(worst, lhs / rhs)
                ineq_ok &= lhs <= rhs * (1 + 1e-9)
    ok = coef_gap <= 1e-10 and len(exp.coefficients) == 5 and landau_ok and ineq_ok
    assert acceptance_report(
        10, ok, f"coefficient gap {coef_gap:.1e}, interpolation inequality {landau_ok}, "
        f"derivative bound worst ratio {worst:.3f}, {clock.seconds:.2f}s"
    )
