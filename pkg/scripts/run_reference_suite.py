"""Run every bundled scenario and write logs, metrics and the standard figures.

    python3 scripts/run_reference_suite.py [--out runs/reference] [--workers 1]

Figures per scenario: depth, planes, heading, track, speed and sigma; the canyon
runs add the normalized position error and the virtual-time rate.
"""
import argparse
import json
from pathlib import Path

import bb2sim
from bb2sim.cli import main as cli

SCENARIOS = Path(bb2sim.__file__).parent / "data" / "scenarios"
FIGURES = "depth,planes,heading,track,speed,sigma"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/reference")
    ap.add_argument("--workers", default="1")
    args = ap.parse_args()
    files = sorted(str(p) for p in SCENARIOS.glob("*.json"))
    code = cli(["batch", *files, "--out", args.out, "--workers", args.workers])
    if code:
        raise SystemExit(code)
    for f in files:
        name = Path(f).stem
        log = Path(args.out) / name / "log.csv"
        channels = FIGURES + (",error,gamma_dot" if name.startswith("canyon_pf") else "")
        cli(["plot", str(log), "--channels", channels])
        m = json.loads((log.parent / "metrics.json").read_text())
        print(f"SUMMARY {name} t_end={m['t_end']:.1f} depth_err_final={m['depth_error_final']:.3f} "
              f"cross_track_rms={m['cross_track_rms']:.2f}")


if __name__ == "__main__":
    main()
