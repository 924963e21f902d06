#!/usr/bin/env python3
"""Run every built-in scenario and collect the output bundles.

Usage:
    python scripts/run_paper_examples.py [--out DIR] [--seed S]

Writes one subdirectory per scenario with trace.csv, trace.json,
report.json and plot.svg, then prints a one-line summary per scenario.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from fixpoint.cli import execute_run
from fixpoint.scenarios import builtin_names


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/examples")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    worst = 0
    for name in builtin_names():
        out = Path(args.out) / name
        code = execute_run(scenario=name, out_dir=str(out), seed=args.seed)
        report = json.loads((out / "report.json").read_text())
        diag = report["diagnostics"]
        print(
            f"{name:>20}: exit={code} stop={diag.get('stop_reason')} "
            f"iters={diag.get('iterations')} q={diag.get('q_rate')}"
        )
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
