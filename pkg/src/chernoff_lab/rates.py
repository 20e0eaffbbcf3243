"""Empirical convergence orders and bound tracking across n."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientDataError

MIN_ROWS = 4
FLOOR_FACTOR = 10.0


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    error: float
    bound: float | None = None


def _as_rows(rows: Iterable) -> list[ConvergenceRow]:
    out = []
    for r in rows:
        if isinstance(r, ConvergenceRow):
            out.append(r)
        else:
            r = tuple(r)
            bound = r[2] if len(r) > 2 else None
            out.append(ConvergenceRow(int(r[0]), float(r[1]), None if bound is None else float(bound)))
    return sorted(out, key=lambda r: r.n)


@dataclass
class ConvergenceReport:
    """Per-n errors of one scheme and the fitted decay order."""

    scheme: str
    rows: list[ConvergenceRow]
    fitted_order: float | None = None
    r_squared: float | None = None
    fit_window: list[int] = field(default_factory=list)
    noise_floor: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def ns(self) -> np.ndarray:
        return np.array([r.n for r in self.rows])

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows])

    def summary(self) -> dict:
        return {
            "scheme": self.scheme,
            "fitted_order": None if self.fitted_order is None else round(self.fitted_order, 3),
            "r2": None if self.r_squared is None else round(self.r_squared, 3),
            "fit_window": list(self.fit_window),
        }


def usable_rows(rows: Sequence, noise_floor: float = 0.0) -> list[ConvergenceRow]:
    rows = _as_rows(rows)
    cut = FLOOR_FACTOR * noise_floor
    return [r for r in rows if r.error > cut and r.error > 0 and r.n > 0]


def fit_order(rows: Sequence, noise_floor: float = 0.0) -> tuple[float, float]:
    """Least-squares slope of log(error) against log(n), negated.

    Rows whose error does not exceed ten times ``noise_floor`` are carrier
    noise and are left out of the fit.

    Returns:
        ``(order, r_squared)``.

    Raises:
        InsufficientDataError: fewer than four usable rows.
    """
    use = usable_rows(rows, noise_floor)
    if len(use) < MIN_ROWS:
        raise InsufficientDataError(
            f"need at least {MIN_ROWS} rows with error > {FLOOR_FACTOR:g} x noise floor, got {len(use)}"
        )
    logn = np.log([r.n for r in use])
    loge = np.log([r.error for r in use])
    slope, intercept = np.polyfit(logn, loge, 1)
    resid = loge - (slope * logn + intercept)
    ss_res = float(resid @ resid)
    centred = loge - loge.mean()
    ss_tot = float(centred @ centred)
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(-slope), float(r2)


def build_report(scheme: str, rows: Sequence, noise_floor: float = 0.0, **extras) -> ConvergenceReport:
    """Sort rows and attach a fit when enough rows clear the noise floor."""
    rows = _as_rows(rows)
    report = ConvergenceReport(scheme, rows, noise_floor=noise_floor, extras=dict(extras))
    try:
        report.fitted_order, report.r_squared = fit_order(rows, noise_floor)
        report.fit_window = [r.n for r in usable_rows(rows, noise_floor)]
    except InsufficientDataError:
        pass
    return report


@dataclass
class BoundTrack:
    ns: list[int]
    slacks: list[float]
    ratios: list[float]
    min_slack: float
    violations: list[int]
    ratio_trend: float | None
    tolerance: float

    @property
    def passed(self) -> bool:
        return not self.violations


def track_bound(rows: Sequence, tolerance: float = 0.0) -> BoundTrack:
    """Slack ``bound - error`` per row; rows below ``-tolerance`` are violations.

    ``ratio_trend`` is the log-log slope of error/bound against n (negative
    when the bound overestimates more and more as n grows).
    """
    rows = _as_rows(rows)
    if any(r.bound is None for r in rows):
        raise InsufficientDataError("every row needs a bound to track")
    slacks = [r.bound - r.error for r in rows]
    ratios = [r.error / r.bound if r.bound > 0 else (0.0 if r.error == 0 else math.inf) for r in rows]
    violations = [r.n for r, s in zip(rows, slacks) if s < -tolerance]
    pos = [(r.n, q) for r, q in zip(rows, ratios) if 0 < q < math.inf]
    trend = None
    if len(pos) >= 2 and len({n for n, _ in pos}) >= 2:
        trend = float(np.polyfit(np.log([p[0] for p in pos]), np.log([p[1] for p in pos]), 1)[0])
    return BoundTrack(
        ns=[r.n for r in rows],
        slacks=slacks,
        ratios=ratios,
        min_slack=min(slacks) if slacks else math.inf,
        violations=violations,
        ratio_trend=trend,
        tolerance=tolerance,
    )


def rows_to_csv(rows: Sequence) -> str:
    """CSV text with columns ``n, error, bound`` (bound blank when absent)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "error", "bound"])
    for r in _as_rows(rows):
        w.writerow([r.n, repr(r.error), "" if r.bound is None else repr(r.bound)])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ConvergenceRow]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    out = []
    for rec in csv.DictReader(lines):
        bound = rec.get("bound")
        out.append(ConvergenceRow(int(rec["n"]), float(rec["error"]), float(bound) if bound else None))
    return _as_rows(out)


def summary_dict(report: ConvergenceReport, track: BoundTrack | None = None) -> dict:
    """``{fitted_order, r2, min_slack}`` as written next to the CSV."""
    out = {
        "fitted_order": None if report.fitted_order is None else round(report.fitted_order, 3),
        "r2": None if report.r_squared is None else round(report.r_squared, 3),
        "min_slack": None,
    }
    if track is not None:
        out["min_slack"] = track.min_slack
    return out
