"""End-to-end run: basis, dressing, rates, propagation, projection, measures, detection."""

from __future__ import annotations

import csv
import io
import json
import logging
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .analysis import CorrelationSeries, TransitionReport, analyze
from .basis import CHANNELS, enumerate_basis, lowering_operator
from .config import RunConfig
from .correlations import CorrelationSuite, evaluate_suite
from .dressing import build_hamiltonian, dress
from .errors import ConfigError, CqedError, NumericalError
from .evolution import Trajectory, check_state, propagate, rk_propagate
from .rates import build_rate_table
from .states import ROW_FIELDS, TwoQubitXState, bell_diagonal_state, embed, project_vacuum

log = logging.getLogger(__name__)

MEASURE_COLUMNS = ("p_vac", "MI", "CC", "QD", "GQD_B_norm", "GQD_B_raw", "REE", "GE")
CSV_COLUMNS = ("t",) + MEASURE_COLUMNS + ("CC_theta", "GQD_theta") + ROW_FIELDS
# the default rtol of 1e-8 accumulates ~1e-7 phase error over the preset spans
CROSS_CHECK_RTOL = 1e-10
SERIES_KEYS = {"MI": "MI", "CC": "CC", "QD": "QD", "GQD_B_norm": "GQD", "REE": "REE", "GE": "GE"}
THETA_KEYS = {"CC_theta": "CC", "GQD_theta": "GQD"}


class StageError(CqedError):
    """Wraps a failure with the name of the pipeline stage it came from."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, Exception):
            raise StageError(self.name, exc) from exc
        return False


@dataclass
class SimulationResult:
    config: RunConfig
    times: np.ndarray
    trajectory: Trajectory
    xstates: list[TwoQubitXState]
    p_vac: np.ndarray
    suites: list[CorrelationSuite]
    series: CorrelationSeries
    report: TransitionReport
    diagnostics: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        out = []
        for t, x, s in zip(self.times, self.xstates, self.suites):
            row = {"t": float(t), **s.row(), **suite_angles(s)}
            row.update(zip(ROW_FIELDS, x.to_row()))
            out.append(row)
        return out

    def provenance(self) -> dict:
        return provenance(self.config, self.trajectory.fingerprint)

    def csv_text(self) -> str:
        return format_csv(self.rows(), self.provenance())

    def report_json(self) -> str:
        doc = {"provenance": self.provenance(), "diagnostics": self.diagnostics,
               **self.report.to_dict()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, csv_path=None, report_path=None) -> None:
        csv_path = csv_path or self.config.csv_path
        report_path = report_path or self.config.report_path
        if csv_path:
            with open(csv_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.csv_text())
        if report_path:
            with open(report_path, "w", encoding="utf-8") as fh:
                fh.write(self.report_json())


def provenance(config: RunConfig, rates_fingerprint: str = "") -> dict:
    return {"package": f"cqednet {__version__}", "preset": config.name,
            "config_sha256": config.fingerprint(), "mode": config.mode,
            "rates_fingerprint": rates_fingerprint, "time_unit": f"1/gamma, gamma={config.gamma_ref!r}",
            "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float) and np.isnan(v):
        return "nan"
    return repr(float(v))


def format_csv(rows, header: dict, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(path_or_text) -> tuple[dict, list[dict]]:
    """Provenance header and float rows of a CSV written by :func:`format_csv`."""
    if "\n" in str(path_or_text):
        text = str(path_or_text)
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    header, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    rows = []
    for rec in csv.DictReader(body):
        row = {}
        for k, v in rec.items():
            try:
                row[k] = None if v in ("", None) else float(v)
            except ValueError:
                raise ConfigError(f"column {k!r} holds non-numeric value {v!r}") from None
        rows.append(row)
    return header, rows


def series_from_rows(rows) -> CorrelationSeries:
    if not rows or "t" not in rows[0]:
        raise ConfigError("table needs a 't' column and at least one row")
    times = np.array([r["t"] for r in rows])
    values, args = {}, {}
    for col, key in SERIES_KEYS.items():
        if col in rows[0] and all(r.get(col) is not None for r in rows):
            values[key] = np.array([r[col] for r in rows])
    for col, key in THETA_KEYS.items():
        if key in values and col in rows[0] and all(r.get(col) is not None for r in rows):
            args[key] = np.array([r[col] for r in rows])
    return CorrelationSeries(times, values, args)


def suite_angles(suite: CorrelationSuite) -> dict:
    """Optimizer polar angles, nan where the optimum is not unique."""
    out = {}
    if suite.CC is not None:
        out["CC_theta"] = np.nan if suite.CC.certificate.get("flat") else float(suite.CC.argument[0])
    if suite.GQD is not None:
        raw = suite.GQD.certificate["raw"]
        out["GQD_theta"] = np.nan if raw < 1e-9 else float(suite.GQD.argument["axis"][0])
    return out


def _evaluate(args):
    x, measures, p_vac, starts = args
    return evaluate_suite(x, measures, p_vac=p_vac, gqd_starts=starts)


def evaluate_states(xstates, measures, p_vacs=None, gqd_starts=16, workers: int = 1):
    """Measure suites for a list of X states; output order follows the input."""
    if p_vacs is None:
        p_vacs = [None] * len(xstates)
    jobs = [(x, tuple(measures), p, gqd_starts) for x, p in zip(xstates, p_vacs)]
    if workers <= 1 or len(jobs) < 2:
        return [_evaluate(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def prepare(config: RunConfig):
    """Dressed basis, rate table and initial dressed-basis state of a run."""
    with _Stage("config"):
        config.validate()
        if not config.system.is_markovian(max(r.gamma for r in config.reservoirs)):
            log.warning("2 min(g1, g2) <= gamma: outside the regime of the microscopic master equation")
    with _Stage("basis"):
        basis = enumerate_basis(config.system.n_max)
    with _Stage("dressing"):
        dressed = dress(build_hamiltonian(config.system, basis), basis)
    with _Stage("rates"):
        lowering = [lowering_operator(basis, ch) for ch in CHANNELS]
        rates = build_rate_table(dressed, config.reservoirs, lowering, mode=config.mode)
    with _Stage("state-io"):
        rho0 = embed(bell_diagonal_state(config.c), dressed)
    return dressed, rates, rho0


def simulate(config: RunConfig, workers: int = 1, cross_check: bool = False) -> SimulationResult:
    """Run the full pipeline; errors are re-raised as :class:`StageError`."""
    dressed, rates, rho0 = prepare(config)
    times = config.times()
    phys_times = times / config.gamma_ref
    with _Stage("evolution"):
        traj = propagate(rho0, dressed, rates, phys_times)
        traj.meta["preset"] = config.name
    diagnostics = physicality(traj)
    if cross_check:
        with _Stage("evolution"):
            rk = rk_propagate(rho0, dressed, rates, phys_times, rtol=CROSS_CHECK_RTOL, atol=1e-13)
        diagnostics["rk_max_deviation"] = float(np.abs(rk.states - traj.states).max())
    with _Stage("projection"):
        projected = [project_vacuum(rho, dressed) for rho in traj.states]
    xstates = [x for x, _ in projected]
    p_vac = np.array([p for _, p in projected])
    with _Stage("measures"):
        suites = evaluate_states(xstates, config.measures, p_vac, config.gqd_starts, workers)
    with _Stage("detection"):
        rows = []
        for t, s in zip(times, suites):
            rows.append({"t": float(t), **s.row(), **suite_angles(s)})
        series = series_from_rows(rows)
        report = analyze(series, config.detection)
    return SimulationResult(config, times, traj, xstates, p_vac, suites, series, report, diagnostics)


def physicality(traj: Trajectory) -> dict:
    worst = {"trace_error": 0.0, "hermiticity_error": 0.0, "min_eigenvalue": np.inf}
    for t, rho in zip(traj.times, traj.states):
        d = check_state(rho, t)
        worst["trace_error"] = max(worst["trace_error"], d["trace_error"])
        worst["hermiticity_error"] = max(worst["hermiticity_error"], d["hermiticity_error"])
        worst["min_eigenvalue"] = min(worst["min_eigenvalue"], d["min_eigenvalue"])
    return worst


__all__ = ["SimulationResult", "StageError", "simulate", "prepare", "evaluate_states",
           "format_csv", "read_csv", "series_from_rows", "physicality", "NumericalError"]
