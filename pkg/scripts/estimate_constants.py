#!/usr/bin/env python3
"""Sweep the neighborhood radius and print a table of constant estimates.

Usage:
    python scripts/estimate_constants.py two_lines_pi3 [--samples K] [--seed S]

For each radius the table shows sr', sr, kappa (over the first set) and
sigma, which makes it easy to eyeball whether a scenario's constants
stabilize (subtransversal) or blow up as the radius shrinks or grows.
"""

from __future__ import annotations

import argparse
import math

from fixpoint.engine import AlternatingProjections
from fixpoint.regularity import (
    estimate_kappa,
    estimate_sigma,
    estimate_sr,
    estimate_sr_prime,
)
from fixpoint.scenarios import build, builtin_names


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", help=f"one of {builtin_names()}")
    ap.add_argument("--samples", type=int, default=192)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--radii", type=float, nargs="+", default=[0.8, 0.4, 0.2, 0.1])
    args = ap.parse_args()

    sc = build(args.scenario)
    if sc.base_point is None or sc.intersection is None:
        print("scenario has no base point / intersection to estimate at")
        return 1
    op = AlternatingProjections(sc.A, sc.B)
    print(f"{'radius':>8} {'sr_prime':>12} {'sr':>12} {'kappa':>12} {'sigma':>12}")
    for d in args.radii:
        kw = dict(intersection=sc.intersection, samples=args.samples, seed=args.seed)
        srp = estimate_sr_prime(sc.A, sc.B, sc.base_point, d, **kw).value
        sr = estimate_sr(sc.A, sc.B, sc.base_point, d, **kw).value
        kap = estimate_kappa(
            op, sc.intersection, sc.base_point, d,
            on_set=sc.A, samples=args.samples, seed=args.seed,
        ).value
        sig = estimate_sigma(sc.A, sc.B, sc.base_point, d, samples=args.samples, seed=args.seed).value
        fmt = lambda v: f"{v:12.6f}" if math.isfinite(v) else f"{'inf':>12}"
        print(f"{d:8.3f} {fmt(srp)} {fmt(sr)} {fmt(kap)} {fmt(sig)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
