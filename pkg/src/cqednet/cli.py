"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import DetectionParams, analyze, run_sweep
from .config import PRESETS, SWEEP_AXES, RunConfig, load, preset
from .correlations import MEASURES
from .errors import ConfigError, NumericalError
from .pipeline import (CSV_COLUMNS, StageError, evaluate_states, format_csv, provenance,
                       read_csv, series_from_rows, simulate, suite_angles)
from .states import ROW_FIELDS, TwoQubitXState

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("cqednet")


def _measures(text: str) -> tuple[str, ...]:
    out = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in out if m not in MEASURES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown measures {bad}; choose from {','.join(MEASURES)}")
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_detection(p):
    g = p.add_argument_group("detection")
    d = DetectionParams()
    g.add_argument("--window", type=int, help=f"slope window in samples (default {d.window})")
    g.add_argument("--threshold", type=float,
                   help=f"slope-jump threshold relative to the local scale (default {d.slope_jump_threshold})")
    g.add_argument("--branch-jump", type=float,
                   help=f"optimizer-angle jump in rad flagged as a branch switch (default {d.branch_jump})")
    g.add_argument("--epsilon", type=float, help=f"freezing tolerance (default {d.epsilon})")
    g.add_argument("--min-length", type=float,
                   help=f"minimum freezing duration as a fraction of the span (default {d.min_length_fraction})")


def _detection(args, base: DetectionParams) -> DetectionParams:
    kw = {}
    for attr, field_name in (("window", "window"), ("threshold", "slope_jump_threshold"),
                             ("branch_jump", "branch_jump"), ("epsilon", "epsilon"),
                             ("min_length", "min_length_fraction")):
        if getattr(args, attr) is not None:
            kw[field_name] = getattr(args, attr)
    return replace(base, **kw)


def _add_run_options(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS), help="start from a figure preset")
    src.add_argument("--config", type=Path, help="INI run configuration")
    p.add_argument("--mode", choices=("cascade", "literal"), help="rate-table mode")
    p.add_argument("--t-max", type=float, help="span in units of 1/gamma")
    p.add_argument("--samples", type=int, help="number of time samples")
    p.add_argument("--measures", type=_measures, help="comma-separated subset of " + ",".join(MEASURES))
    p.add_argument("--gqd-starts", type=int, help="multi-start count for the Bures discord")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    _add_detection(p)


def _run_config(args) -> RunConfig:
    cfg = preset(args.preset) if args.preset else load(args.config)
    kw = {}
    for attr in ("mode", "t_max", "samples", "measures", "gqd_starts"):
        if getattr(args, attr) is not None:
            kw[attr] = getattr(args, attr)
    cfg = replace(cfg, detection=_detection(args, cfg.detection), **kw)
    cfg.validate()
    return cfg


def cmd_simulate(args) -> int:
    cfg = _run_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = args.csv or str(out / f"{cfg.name}.csv")
    report_path = args.report or str(out / f"{cfg.name}.report.json")
    result = simulate(cfg, workers=args.workers, cross_check=args.cross_check)
    result.write(csv_path, report_path)
    changes_path = out / f"{cfg.name}.changes.csv"
    changes_path.write_text(result.report.changes_csv(), encoding="utf-8")
    if args.save_trajectory:
        result.trajectory.save(args.save_trajectory)
    print(f"wrote {csv_path}, {report_path}, {changes_path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    points = run_sweep(cfg, args.axis, args.values, measures=args.measures, workers=args.workers)
    doc = {"provenance": provenance(cfg), "axis": args.axis,
           "points": [p.summary() for p in points]}
    if args.details:
        for d, p in zip(doc["points"], points):
            d["report"] = None if p.report is None else p.report.to_dict()
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    failed = [p for p in points if p.error]
    for p in failed:
        log.error("sweep point %s=%r failed: %s", args.axis, p.value, p.error)
    return EXIT_NUMERICAL if failed and len(failed) == len(points) else 0


def _read_states(path: Path) -> list[TwoQubitXState]:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if isinstance(data, dict):
            data = data.get("states", [])
        rows = []
        for item in data:
            rows.append([item[k] for k in ROW_FIELDS] if isinstance(item, dict) else list(item))
    else:
        _, table = read_csv(text + "\n")
        rows = []
        for r in table:
            missing = [k for k in ROW_FIELDS if r.get(k) is None]
            if missing:
                raise ConfigError(f"{path}: rows need columns {', '.join(ROW_FIELDS)}; missing {missing}")
            rows.append([r[k] for k in ROW_FIELDS])
    states = []
    for i, row in enumerate(rows):
        if len(row) != len(ROW_FIELDS):
            raise ConfigError(f"{path}: state {i} has {len(row)} numbers, expected {len(ROW_FIELDS)}")
        try:
            states.append(TwoQubitXState.from_row([float(v) for v in row]))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}: state {i} is invalid: {exc}") from None
    return states


def cmd_measures(args) -> int:
    states = _read_states(Path(args.input))
    measures = args.measures or MEASURES
    suites = evaluate_states(states, measures, workers=args.workers)
    columns = ("index",) + CSV_COLUMNS[1:]
    rows = []
    for i, (x, s) in enumerate(zip(states, suites)):
        row = {"index": i, **s.row(), **suite_angles(s)}
        row.update(zip(ROW_FIELDS, x.to_row()))
        rows.append(row)
    text = format_csv(rows, {"package": f"cqednet {__version__}", "measures": ",".join(measures)},
                      columns)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_detect(args) -> int:
    _, rows = read_csv(str(args.csv))
    series = series_from_rows(rows)
    report = analyze(series, _detection(args, DetectionParams()))
    text = report.to_json() + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.changes:
        Path(args.changes).write_text(report.changes_csv(), encoding="utf-8")
    return 0


def cmd_preset(args) -> int:
    if args.action == "list":
        for name in PRESETS:
            print(name)
        return 0
    if not args.name:
        raise ConfigError("preset show needs a preset name")
    sys.stdout.write(preset(args.name).to_ini())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqednet", description=__doc__.splitlines()[0].strip() or None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the full pipeline for one configuration")
    _add_run_options(p)
    p.add_argument("--out-dir", default=".", help="directory for the CSV and report (default .)")
    p.add_argument("--csv", help="CSV path (default OUT_DIR/NAME.csv)")
    p.add_argument("--report", help="JSON report path (default OUT_DIR/NAME.report.json)")
    p.add_argument("--cross-check", action="store_true",
                   help="also integrate with adaptive Runge-Kutta and report the deviation")
    p.add_argument("--save-trajectory", help="write the dressed-basis trajectory (.npz)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    _add_run_options(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, type=_floats, help="comma-separated values")
    p.add_argument("--output", help="JSON output path (default stdout)")
    p.add_argument("--details", action="store_true", help="include full reports per point")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("measures", help="evaluate correlation measures for X states in CSV/JSON")
    p.add_argument("input", help=f"CSV with columns {','.join(ROW_FIELDS)} or JSON list")
    p.add_argument("--measures", type=_measures)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("detect", help="re-run change and freezing detection on a results CSV")
    p.add_argument("csv", type=Path)
    _add_detection(p)
    p.add_argument("--output", help="JSON report path (default stdout)")
    p.add_argument("--changes", help="also write the change points as CSV")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("preset", help="list presets or print one as INI")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_preset)
    return parser


def _is_config_error(exc: BaseException) -> bool:
    while exc is not None:
        if isinstance(exc, (ConfigError, FileNotFoundError, IsADirectoryError)):
            return True
        if isinstance(exc, NumericalError):
            return False
        exc = getattr(exc, "cause", None) or exc.__cause__
    return False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, StageError, NumericalError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"cqednet: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if _is_config_error(exc) else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
