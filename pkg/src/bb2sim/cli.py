"""Command-line entry point.

Subcommands::

    bb2sim validate SCENARIO...
    bb2sim run SCENARIO [--out DIR] [--seed N] [--l1 on|off]
    bb2sim batch SCENARIO... [--out DIR] [--workers N] [--seed N] [--l1 on|off]
    bb2sim metrics LOG_CSV
    bb2sim plot LOG_CSV --channels depth,track [--out DIR]

Standard output is line oriented; every line starts with a fixed tag:

    OK <scenario>
    ISSUE <source>\t<field>\t<reason>
    RUN <name> rows=<n> t_end=<s> termination=<why> hash=<sha256> dir=<path>
    FAIL <scenario>\t<error>
    PLOT <svg path>

``metrics`` prints a single JSON object. Exit codes: 0 success, 1 simulation
failure, 2 usage or validation error, 3 file I/O error. The default output
directory is ``$BB2SIM_OUTPUT_DIR`` or ``./runs``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import SimulationError, ValidationError

EXIT_OK, EXIT_SIM, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3
OUTPUT_ENV = "BB2SIM_OUTPUT_DIR"


def _default_out() -> str:
    return os.environ.get(OUTPUT_ENV, "runs")


def _l1_flag(value: str | None):
    return None if value is None else value == "on"


def _print_issues(exc: ValidationError) -> None:
    for source, fld, reason in exc.issues:
        print(f"ISSUE {source}\t{fld}\t{reason}")


def cmd_validate(args) -> int:
    from .sim_engine import load_scenario

    code = EXIT_OK
    for path in args.scenarios:
        try:
            load_scenario(path)
            print(f"OK {path}")
        except ValidationError as exc:
            _print_issues(exc)
            code = EXIT_INVALID
    return code


def run_one(path: str, out_root: str, seed=None, l1=None):
    """Run a scenario and write log.csv, metrics.json and manifest.json; returns a RUN line."""
    from .sim_engine import load_scenario, manifest, metrics, run

    sc = load_scenario(path, l1=l1, seed=seed)
    lg = run(sc)
    out = Path(out_root) / sc.name
    out.mkdir(parents=True, exist_ok=True)
    lg.to_csv(out / "log.csv")
    (out / "metrics.json").write_text(json.dumps(metrics(lg), indent=2, sort_keys=True) + "\n")
    (out / "manifest.json").write_text(json.dumps(manifest(sc, lg), indent=2, sort_keys=True) + "\n")
    return (f"RUN {sc.name} rows={len(lg)} t_end={lg.meta['t_end']:.17g} termination={lg.meta['termination']} "
            f"hash={sc.config_hash()} dir={out}")


def _run_guarded(path, out_root, seed, l1):
    try:
        return EXIT_OK, run_one(path, out_root, seed, l1)
    except ValidationError as exc:
        return EXIT_INVALID, "\n".join(f"ISSUE {s}\t{f}\t{r}" for s, f, r in exc.issues)
    except SimulationError as exc:
        return EXIT_SIM, f"FAIL {path}\t{type(exc).__name__}: {exc}"
    except OSError as exc:
        return EXIT_IO, f"FAIL {path}\tOSError: {exc}"


def cmd_run(args) -> int:
    code, line = _run_guarded(args.scenario, args.out, args.seed, _l1_flag(args.l1))
    print(line)
    return code


def cmd_batch(args) -> int:
    l1 = _l1_flag(args.l1)
    jobs = [(p, args.out, args.seed, l1) for p in args.scenarios]
    if args.workers == 1:
        results = [_run_guarded(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_guarded, *zip(*jobs)))
    for _, line in results:
        print(line)
    return max(c for c, _ in results)


def cmd_metrics(args) -> int:
    from .sim_engine import TimeSeriesLog, metrics

    try:
        lg = TimeSeriesLog.from_csv(args.log)
    except (OSError, ValueError) as exc:
        print(f"FAIL {args.log}\t{exc}")
        return EXIT_IO
    print(json.dumps(metrics(lg), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import UnknownChannel, plot_channels
    from .sim_engine import TimeSeriesLog

    log_path = Path(args.log)
    try:
        lg = TimeSeriesLog.from_csv(log_path)
    except (OSError, ValueError) as exc:
        print(f"FAIL {log_path}\t{exc}")
        return EXIT_IO
    h = ""
    man = log_path.parent / "manifest.json"
    if man.exists():
        h = json.loads(man.read_text()).get("config_hash", "")
    channels = [c.strip() for c in args.channels.split(",") if c.strip()]
    out = args.out or str(log_path.parent)
    try:
        paths = plot_channels(lg, channels, out, h, stem=log_path.stem)
    except UnknownChannel as exc:
        print(f"FAIL {log_path}\t{exc}")
        return EXIT_INVALID
    except ValueError as exc:
        print(f"FAIL {log_path}\t{exc}")
        return EXIT_INVALID
    for p in paths:
        print(f"PLOT {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bb2sim", description="Submarine maneuvering simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate scenario files and everything they reference")
    p.add_argument("scenarios", nargs="+")
    p.set_defaults(fn=cmd_validate)

    def run_flags(p):
        p.add_argument("--out", default=_default_out(), help=f"output root (default ${OUTPUT_ENV} or ./runs)")
        p.add_argument("--seed", type=int, default=None, help="override the scenario RNG seed")
        p.add_argument("--l1", choices=["on", "off"], default=None, help="force the L1 augmentation on or off")

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("scenario")
    run_flags(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("batch", help="run several scenarios in parallel")
    p.add_argument("scenarios", nargs="+")
    run_flags(p)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.set_defaults(fn=cmd_batch)

    p = sub.add_parser("metrics", help="summary metrics of a log CSV as JSON")
    p.add_argument("log")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("plot", help="SVG figures from a log CSV")
    p.add_argument("log")
    p.add_argument("--channels", required=True, help="comma-separated channel names")
    p.add_argument("--out", default=None, help="directory for the SVG files (default: next to the log)")
    p.set_defaults(fn=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("FAIL --workers must be >= 1")
        return EXIT_INVALID
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
