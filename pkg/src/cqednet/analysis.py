"""Sudden changes, freezing intervals and crossings in correlation time series.

A sudden change at sample i is a jump between the least-squares slopes fitted
on the ``window`` samples to its left and to its right.  The jump is compared
with the typical slope jump in the surrounding stretch of the series (two to
three windows away on either side), which is what a smooth curve of the same
curvature would produce; all thresholds are therefore invariant under
rescaling of the time axis.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

BRANCH_JUMP = 0.1


@dataclass(frozen=True)
class DetectionParams:
    window: int = 5
    slope_jump_threshold: float = 3.0
    branch_jump: float = BRANCH_JUMP
    epsilon: float = 1e-3
    min_length_fraction: float = 0.05


@dataclass
class CorrelationSeries:
    times: np.ndarray
    values: dict[str, np.ndarray]
    arguments: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        n = len(self.times)
        self.values = {k: np.asarray(v, dtype=float) for k, v in self.values.items()}
        self.arguments = {k: np.asarray(v, dtype=float) for k, v in self.arguments.items()}
        for name, arr in list(self.values.items()) + list(self.arguments.items()):
            if len(arr) != n:
                raise ValueError(f"series {name!r} has {len(arr)} samples, expected {n}")

    def span(self) -> float:
        return float(self.times[-1] - self.times[0]) if len(self.times) else 0.0

    def time_average(self, measure: str) -> float:
        v = self.values[measure]
        if len(v) < 2:
            return float(v.mean())
        return float(np.trapezoid(v, self.times) / self.span())


@dataclass(frozen=True)
class SuddenChange:
    time: float
    index: int
    measure: str
    left_slope: float
    right_slope: float
    branch_jump: bool


@dataclass(frozen=True)
class FreezingInterval:
    t_start: float
    t_end: float
    measure: str
    level: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class Crossing:
    time: float
    measures: tuple[str, str]


@dataclass
class TransitionReport:
    sudden_changes: list[SuddenChange] = field(default_factory=list)
    freezing_intervals: list[FreezingInterval] = field(default_factory=list)
    crossings: list[Crossing] = field(default_factory=list)

    def changes_for(self, measure: str) -> list[SuddenChange]:
        return [c for c in self.sudden_changes if c.measure == measure]

    def freezing_for(self, measure: str) -> list[FreezingInterval]:
        return [f for f in self.freezing_intervals if f.measure == measure]

    def frozen_duration(self, measure: str) -> float:
        return sum(f.duration for f in self.freezing_for(measure))

    def to_dict(self) -> dict:
        return {
            "sudden_changes": [asdict(c) for c in self.sudden_changes],
            "freezing_intervals": [dict(asdict(f), duration=f.duration) for f in self.freezing_intervals],
            "crossings": [{"time": c.time, "measures": list(c.measures)} for c in self.crossings],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def changes_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "index", "measure", "left_slope", "right_slope", "branch_jump"])
        for c in self.sudden_changes:
            w.writerow([repr(c.time), c.index, c.measure, repr(c.left_slope), repr(c.right_slope),
                        int(c.branch_jump)])
        return buf.getvalue()


def _ls_slope(t: np.ndarray, y: np.ndarray) -> float:
    tc = t - t.mean()
    denom = float(tc @ tc)
    return float(tc @ (y - y.mean()) / denom) if denom > 0 else 0.0


def one_sided_slopes(times, values, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares slopes over ``window`` intervals left and right of every sample.

    Windows are truncated at the ends of the series; undefined slopes are nan.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(t)
    left = np.full(n, np.nan)
    right = np.full(n, np.nan)
    for i in range(n):
        lo, hi = max(0, i - window), min(n - 1, i + window)
        if i - lo >= 1:
            left[i] = _ls_slope(t[lo:i + 1], y[lo:i + 1])
        if hi - i >= 1:
            right[i] = _ls_slope(t[i:hi + 1], y[i:hi + 1])
    return left, right


def detect_sudden_changes(series: CorrelationSeries, measure: str,
                          params: DetectionParams = DetectionParams()) -> list[SuddenChange]:
    """Kinks in ``measure`` plus jumps of its optimizer argument between branches."""
    w = params.window
    t = series.times
    y = series.values[measure]
    n = len(t)
    if n < 2 * w + 1:
        raise ValueError(f"need at least {2 * w + 1} samples for window {w}, got {n}")
    left, right = one_sided_slopes(t, y, w)
    jump = np.abs(right - left)
    interior = np.zeros(n, dtype=bool)
    interior[w:n - w] = True
    jump_int = np.where(interior, jump, 0.0)
    slope_mag = np.nanmax(np.abs(np.concatenate([left, right])))
    floor = 1e-9 * slope_mag if np.isfinite(slope_mag) and slope_mag > 0 else np.inf

    found: dict[int, SuddenChange] = {}
    for i in range(w, n - w):
        ji = jump_int[i]
        if not ji > floor:
            continue
        lo, hi = max(w, i - w), min(n - w - 1, i + w)
        seg = jump_int[lo:hi + 1]
        if ji < seg.max() or (ji == seg.max() and int(np.argmax(seg)) + lo != i):
            continue
        ring = np.concatenate([jump_int[max(w, i - 3 * w):max(w, i - w)],
                               jump_int[min(n - w, i + w + 1):min(n - w, i + 3 * w + 1)]])
        scale = float(np.median(ring)) if len(ring) else 0.0
        if ji > params.slope_jump_threshold * max(scale, floor):
            found[i] = SuddenChange(float(t[i]), i, measure, float(left[i]), float(right[i]), False)

    arg = series.arguments.get(measure)
    if arg is not None:
        for i in np.nonzero(np.abs(np.diff(arg)) > params.branch_jump)[0] + 1:
            i = int(i)
            near = [j for j in (i, i - 1, i + 1) if j in found]
            if near:
                j = near[0]
                found[j] = SuddenChange(**{**asdict(found[j]), "branch_jump": True})
            else:
                ls = left[i] if np.isfinite(left[i]) else right[i]
                rs = right[i] if np.isfinite(right[i]) else left[i]
                found[i] = SuddenChange(float(t[i]), i, measure, float(ls), float(rs), True)
    return [found[i] for i in sorted(found)]


def detect_freezing(series: CorrelationSeries, measure: str,
                    params: DetectionParams = DetectionParams(),
                    min_length: float | None = None) -> list[FreezingInterval]:
    """Maximal non-overlapping intervals where max - min of the measure stays below epsilon."""
    if params.epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if min_length is None:
        min_length = params.min_length_fraction * series.span()
    t = series.times
    y = series.values[measure]
    n = len(t)
    out = []
    i = 0
    while i < n:
        j = i
        lo = hi = y[i]
        while j + 1 < n:
            lo2, hi2 = min(lo, y[j + 1]), max(hi, y[j + 1])
            if hi2 - lo2 >= params.epsilon:
                break
            lo, hi = lo2, hi2
            j += 1
        if j > i and t[j] - t[i] >= min_length:
            out.append(FreezingInterval(float(t[i]), float(t[j]), measure, float(y[i:j + 1].mean())))
            i = j + 1
        else:
            i += 1
    return out


def detect_crossings(series: CorrelationSeries, first: str, second: str) -> list[Crossing]:
    d = series.values[first] - series.values[second]
    t = series.times
    out = []
    for i in range(len(d) - 1):
        if d[i] == 0 and (i == 0 or d[i - 1] != 0):
            out.append(Crossing(float(t[i]), (first, second)))
        elif d[i] * d[i + 1] < 0:
            tc = t[i] + (t[i + 1] - t[i]) * d[i] / (d[i] - d[i + 1])
            out.append(Crossing(float(tc), (first, second)))
    return out


CROSSING_PAIRS = (("CC", "QD"), ("CC", "GQD"), ("QD", "GQD"))


def analyze(series: CorrelationSeries, params: DetectionParams = DetectionParams(),
            measures=None) -> TransitionReport:
    """Run change, freezing and crossing detection on every available measure."""
    if measures is None:
        measures = list(series.values)
    report = TransitionReport()
    for m in measures:
        if m not in series.values or np.any(~np.isfinite(series.values[m])):
            continue
        if len(series.times) >= 2 * params.window + 1:
            report.sudden_changes.extend(detect_sudden_changes(series, m, params))
        report.freezing_intervals.extend(detect_freezing(series, m, params))
    for a, b in CROSSING_PAIRS:
        if a in series.values and b in series.values:
            report.crossings.extend(detect_crossings(series, a, b))
    report.sudden_changes.sort(key=lambda c: (c.time, c.measure))
    return report


@dataclass
class SweepPoint:
    value: float
    report: TransitionReport | None
    averages: dict[str, float]
    error: str | None = None

    def summary(self) -> dict:
        out = {"value": self.value, "error": self.error, "averages": self.averages}
        if self.report is not None:
            measures = sorted({c.measure for c in self.report.sudden_changes}
                              | {f.measure for f in self.report.freezing_intervals})
            out["sudden_changes"] = {m: len(self.report.changes_for(m)) for m in measures}
            out["frozen_duration"] = {m: self.report.frozen_duration(m) for m in measures}
        return out


def _sweep_point(args):
    from .config import with_parameter
    from .pipeline import simulate

    base, axis, value, measures = args
    try:
        result = simulate(with_parameter(base, axis, value, measures=measures))
    except Exception as exc:  # recorded per point; the sweep carries on
        return SweepPoint(value, None, {}, f"{type(exc).__name__}: {exc}")
    averages = {m: result.series.time_average(m) for m in sorted(result.series.values)}
    return SweepPoint(value, result.report, averages)


def run_sweep(base, axis: str, values, measures=None, workers: int = 1) -> list[SweepPoint]:
    """Simulate ``base`` once per value of ``axis``; output follows ``values`` order."""
    from .config import SWEEP_AXES
    from .errors import ConfigError

    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    configs = [(base, axis, v, measures) for v in values]
    if not configs:
        return []
    if workers <= 1:
        return [_sweep_point(c) for c in configs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, configs))
