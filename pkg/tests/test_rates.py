import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chernoff_lab import rates
from chernoff_lab.errors import InsufficientDataError


def test_fit_exact_power_law():
    rows = [(n, 3.0 * n**-1.5) for n in (1, 2, 4, 8, 16)]
    order, r2 = rates.fit_order(rows)
    assert order == pytest.approx(1.5, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_matches_numpy_lstsq():
    rng = np.random.default_rng(3)
    ns = np.arange(1, 30)
    errs = ns**-0.7 * np.exp(rng.normal(0, 0.1, ns.size))
    A = np.column_stack([np.log(ns), np.ones(ns.size)])
    slope = np.linalg.lstsq(A, np.log(errs), rcond=None)[0][0]
    order, _ = rates.fit_order(list(zip(ns, errs)))
    assert order == pytest.approx(-slope, abs=1e-12)


def test_noise_floor_excludes_rows():
    rows = [(1, 1.0), (2, 0.5), (4, 0.25), (8, 0.125), (16, 1e-15), (32, 1e-15)]
    order, _ = rates.fit_order(rows, noise_floor=1e-14)
    assert order == pytest.approx(1.0)
    assert [r.n for r in rates.usable_rows(rows, 1e-14)] == [1, 2, 4, 8]


def test_insufficient_rows():
    with pytest.raises(InsufficientDataError):
        rates.fit_order([(1, 1.0), (2, 0.5), (4, 0.0), (8, 0.0)])


def test_build_report_without_fit():
    rep = rates.build_report("x", [(1, 0.0), (2, 0.0)])
    assert rep.fitted_order is None and rep.fit_window == []


def test_track_bound_slack_and_violation():
    tr = rates.track_bound([(1, 0.5, 1.0), (2, 0.3, 0.25), (4, 0.1, 0.5)])
    assert tr.min_slack == pytest.approx(-0.05)
    assert tr.violations == [2] and not tr.passed
    assert rates.track_bound([(2, 0.3, 0.25)], tolerance=0.1).passed


def test_ratio_trend_sign():
    tr = rates.track_bound([(n, n**-2.0, 1.0 / n) for n in (1, 2, 4, 8)])
    assert tr.ratio_trend == pytest.approx(-1.0)


def test_track_bound_requires_bounds():
    with pytest.raises(InsufficientDataError):
        rates.track_bound([(1, 0.1)])


def test_csv_roundtrip_exact():
    rows = [rates.ConvergenceRow(1, 0.1 + 0.2, 1 / 3), rates.ConvergenceRow(2, math.pi, None)]
    back = rates.rows_from_csv("# comment\n" + rates.rows_to_csv(rows))
    assert back == rows


def test_summary_dict_rounding():
    rep = rates.build_report("x", [(n, n**-1.23456) for n in (1, 2, 4, 8)])
    tr = rates.track_bound([(1, 0.1, 0.2)])
    assert rates.summary_dict(rep, tr) == {"fitted_order": 1.235, "r2": 1.0, "min_slack": pytest.approx(0.1)}


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 4.0), st.floats(1e-3, 1e3), st.integers(4, 20))
def test_fit_recovers_any_order(p, c, k):
    rows = [(n, c * n**-p) for n in range(1, k + 1)]
    assert rates.fit_order(rows)[0] == pytest.approx(p, abs=1e-9)
