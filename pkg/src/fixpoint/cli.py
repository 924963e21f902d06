"""Batch front-end: run scenarios, export traces, verify suites.

Subcommands:
  run <name|path>       run a scenario; write trace.csv/.json, report.json, plot.svg
  verify <suite>        run a verification suite; print a pass/fail table
  estimate <constant> <name|path>   print one regularity estimate as JSON

Exit codes: 0 success, 1 error, 2 scenario expectation mismatch.
The FIXPOINT_SEED environment variable overrides the --seed flag.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import regularity as reg
from .engine import (
    AlternatingProjections,
    DouglasRachford,
    IterationConfig,
    Trace,
    run,
    trace_to_json_text,
)
from .geometry import distance, norm
from .scenarios import Scenario, build, builtin_names, load_scenario


def _load(name_or_path: str) -> Scenario:
    if name_or_path in builtin_names():
        return build(name_or_path)
    if Path(name_or_path).exists():
        return load_scenario(name_or_path)
    raise ValueError(
        f"unknown scenario {name_or_path!r}: not a built-in name {builtin_names()} and not a file"
    )


def _resolve_seed(seed: int) -> int:
    env = os.environ.get("FIXPOINT_SEED")
    return int(env) if env else int(seed)


# ---------------------------------------------------------------------------
# run


def _sequence_trace(sc: Scenario) -> Trace:
    """Wrap an explicitly shipped sequence as a trace record."""
    xs = [np.asarray(p, float) for p in sc.sequence]
    dist_o = [distance(sc.A, p) for p in xs]
    dist_t = [diag.omega_distance(p, sc.intersection) for p in xs]
    steps = [norm(xs[k + 1] - xs[k]) for k in range(len(xs) - 1)] + [0.0]
    return Trace(
        x=xs,
        b=[],
        z=[],
        dist_A=dist_o,
        dist_B=dist_o,
        dist_target=dist_t,
        residual=[math.nan] * len(xs),
        step_norm=steps,
        stop_reason="sequence",
        metadata={"operator": "none", "seed_point": [float(t) for t in xs[0]]},
    )


def _seed_point(sc: Scenario, seed: int) -> np.ndarray:
    from .geometry import ball_point

    center, radius = sc.seed_region
    return ball_point(center, radius, seed, 0)


def _run_diagnostics(sc: Scenario, tr: Trace) -> dict:
    out: dict = {"stop_reason": tr.stop_reason, "iterations": len(tr.x) - 1,
                 "limit": [float(t) for t in tr.limit],
                 "final_residual": float(tr.residual[-1])}
    probe = sc.intersection
    if probe is not None and len(tr.x) >= 2:
        mon = diag.check_linear_monotone(tr.x, probe)
        out["monotonicity_c"] = mon.c
        out["monotonicity_degenerate"] = mon.degenerate
    try:
        out["q_rate"] = diag.estimate_q_rate(tr.x, limit=tr.limit).c
    except ValueError:
        out["q_rate"] = None
    try:
        r = diag.estimate_r_rate(tr.x, limit=tr.limit)
        out["r_rate"] = r.c
        out["r_gamma"] = r.gamma
    except ValueError:
        out["r_rate"] = None
    if len(tr.z) >= 4:
        ext = diag.check_linear_extendible(tr.z, 2)
        out["extendible_m2"] = {"holds": ext.holds, "c": ext.c, "gamma": ext.gamma}
    if sc.convex and tr.b:
        rep = diag.check_convex_dichotomy(tr)
        out["dichotomy"] = {"outcome": rep.outcome, "c": rep.c, "bound_holds": rep.bound_holds}
    return out


def _check_expectations(sc: Scenario, tr: Trace, measured: dict, estimates: dict) -> list[dict]:
    checks = []

    def add(name, expected, got, tol, ok):
        checks.append(
            {"name": name, "expected": expected, "measured": got, "tol": tol, "ok": bool(ok)}
        )

    for key, exp in sc.expected.items():
        tol = exp.tol
        if key in ("sr_prime", "sr", "sr_prime_local", "kappa_on_A"):
            got = estimates.get(key)
            if got is None:
                continue
            add(key, exp.value, got, tol, abs(got - exp.value) <= tol)
        elif key in ("q_rate", "monotonicity_c", "linear_c"):
            got = measured.get("q_rate" if key == "q_rate" else "monotonicity_c")
            if got is None:
                add(key, exp.value, None, tol, False)
            else:
                add(key, exp.value, got, tol, abs(got - exp.value) <= tol)
        elif key == "extendible_c":
            got = measured.get("extendible_m2", {}).get("c")
            add(key, exp.value, got, tol, got is not None and abs(got - exp.value) <= tol)
        elif key == "fejer_holds":
            witness = sc.expected.get("fejer_witness")
            probe = [np.asarray(witness.value, float)] if witness else list(sc.intersection or [])
            rep = diag.check_fejer(tr.x, probe)
            add(key, exp.value, rep.holds, 0, rep.holds == exp.value)
        elif key == "fejer_witness":
            continue  # consumed by fejer_holds
        elif key == "iterations_to_solve":
            solved = [
                k for k in range(len(tr.x))
                if tr.dist_A[k] <= 1e-12 and tr.dist_B[k] <= 1e-12
            ]
            got = solved[0] if solved else None
            add(key, exp.value, got, 0, got == exp.value)
        elif key == "solution":
            got = [float(t) for t in tr.limit]
            ok = norm(tr.limit - np.asarray(exp.value, float)) <= max(tol, 1e-12)
            add(key, exp.value, got, tol, ok)
        elif key == "stuck_points":
            got = [float(t) for t in tr.limit]
            pts = np.asarray(exp.value, float)
            near = float(np.min(np.linalg.norm(pts - tr.limit, axis=1)))
            in_intersection = diag.omega_distance(tr.limit, sc.intersection) <= 1e-9
            add(key, "limit is a listed stuck point or the intersection", got, 1e-9,
                near <= 1e-9 or in_intersection)
        elif key == "intersection":
            p = np.asarray(exp.value, float)
            ok = distance(sc.A, p) <= 1e-9 and distance(sc.B, p) <= 1e-9
            add(key, exp.value, exp.value, 1e-9, ok)
        elif key == "global_ratio_diverges":
            ratios = []
            t = 0.02
            for _ in range(3):
                x = np.array([t, t * t])
                ratios.append(distance(sc.intersection, x) / distance(sc.B, x))
                t /= 2
            diverges = all(
                ratios[j + 1] >= (2 - 1e-2) * ratios[j] for j in range(len(ratios) - 1)
            )
            add(key, exp.value, diverges, 0, diverges == exp.value)
        else:
            add(key, exp.value, None, tol, False)
    return checks


def _plot_svg(ys: list[float], title: str) -> str:
    """Static SVG polyline of log10 values against the index."""
    w, h, pad = 640, 400, 50
    floor = 1e-16
    logs = [math.log10(max(float(y), floor)) if math.isfinite(y) else math.log10(floor) for y in ys]
    lo, hi = min(logs), max(logs)
    if hi - lo < 1e-12:
        hi = lo + 1.0
    n = max(len(logs) - 1, 1)
    pts = []
    for k, v in enumerate(logs):
        x = pad + (w - 2 * pad) * k / n
        y = h - pad - (h - 2 * pad) * (v - lo) / (hi - lo)
        pts.append(f"{x:.2f},{y:.2f}")
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{pad}" y1="{h-pad}" x2="{w-pad}" y2="{h-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h-pad}" stroke="black"/>',
        f'<text x="{w//2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{w//2}" y="{h-12}" text-anchor="middle" font-size="12">k</text>',
        f'<text x="14" y="{h//2}" font-size="12" transform="rotate(-90 14 {h//2})" text-anchor="middle">log10 dist to target</text>',
        f'<text x="{pad-6}" y="{h-pad}" text-anchor="end" font-size="10">{lo:.1f}</text>',
        f'<text x="{pad-6}" y="{pad+4}" text-anchor="end" font-size="10">{hi:.1f}</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{" ".join(pts)}"/>',
        "</svg>",
    ]
    return "\n".join(lines) + "\n"


def execute_run(
    scenario: str,
    out_dir: str,
    seed: int = 0,
    max_iter: int = 100_000,
    residual_tol: float = 1e-12,
    delta: float = 0.5,
    samples: int = 256,
    operator: str = "ap",
) -> int:
    """Run one scenario end to end and write the output bundle."""
    try:
        sc = _load(scenario)
        seed = _resolve_seed(seed)
        if operator not in ("ap", "dr"):
            raise ValueError("operator must be 'ap' or 'dr'")
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)

        if sc.sequence is not None:
            tr = _sequence_trace(sc)
        else:
            op_cls = AlternatingProjections if operator == "ap" else DouglasRachford
            op = op_cls(sc.A, sc.B)
            cfg = IterationConfig(
                seed_point=_seed_point(sc, seed),
                max_iter=max_iter,
                residual_tol=residual_tol,
                target=sc.intersection,
            )
            tr = run(op, cfg)

        measured = _run_diagnostics(sc, tr)
        estimates: dict = {}
        if sc.base_point is not None and sc.intersection is not None and sc.sequence is None:
            srp = reg.estimate_sr_prime(
                sc.A, sc.B, sc.base_point, delta,
                intersection=sc.intersection, samples=samples, seed=seed,
            )
            estimates["sr_prime"] = srp.value
            estimates["sr_prime_local"] = srp.value
            if sc.convex:
                sr = reg.estimate_sr(
                    sc.A, sc.B, sc.base_point, delta,
                    intersection=sc.intersection, samples=samples, seed=seed,
                )
                estimates["sr"] = sr.value
            if "kappa_on_A" in sc.expected:
                op = AlternatingProjections(sc.A, sc.B)
                kap = reg.estimate_kappa(
                    op, sc.intersection, sc.base_point, 1.0,
                    on_set=sc.A, samples=samples, seed=seed,
                )
                estimates["kappa_on_A"] = kap.value

        checks = _check_expectations(sc, tr, measured, estimates)
        report = {
            "scenario": sc.name,
            "config": {
                "seed": seed, "max_iter": max_iter, "residual_tol": residual_tol,
                "delta": delta, "samples": samples, "operator": operator,
            },
            "diagnostics": measured,
            "estimates": estimates,
            "expectation_checks": checks,
            "ok": all(c["ok"] for c in checks),
        }

        (out / "trace.csv").write_text(tr.to_csv_text(), encoding="utf-8")
        (out / "trace.json").write_text(trace_to_json_text(tr), encoding="utf-8")
        (out / "report.json").write_text(
            json.dumps(report, sort_keys=True, indent=1), encoding="utf-8"
        )
        (out / "plot.svg").write_text(
            _plot_svg(tr.dist_target, f"{sc.name}: distance to target"), encoding="utf-8"
        )
        for c in checks:
            mark = "ok " if c["ok"] else "MISMATCH"
            print(f"  {mark} {c['name']}: expected={c['expected']} measured={c['measured']}")
        print(f"wrote {out}/trace.csv trace.json report.json plot.svg")
        return 0 if report["ok"] else 2
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def execute_verify(suite: str) -> int:
    from .verify import run_suite

    try:
        results = run_suite(suite)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for r in results:
        print(r.line())
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


def execute_estimate(constant: str, scenario: str, delta: float, samples: int, seed: int) -> int:
    try:
        sc = _load(scenario)
        seed = _resolve_seed(seed)
        if sc.base_point is None:
            raise ValueError("scenario has no base point to estimate at")
        if constant == "sr_prime":
            est = reg.estimate_sr_prime(
                sc.A, sc.B, sc.base_point, delta,
                intersection=sc.intersection, samples=samples, seed=seed,
            )
        elif constant == "sr":
            est = reg.estimate_sr(
                sc.A, sc.B, sc.base_point, delta,
                intersection=sc.intersection, samples=samples, seed=seed,
            )
        elif constant == "kappa":
            op = AlternatingProjections(sc.A, sc.B)
            est = reg.estimate_kappa(
                op, sc.intersection, sc.base_point, delta,
                on_set=sc.A, samples=samples, seed=seed,
            )
        elif constant == "sigma":
            est = reg.estimate_sigma(sc.A, sc.B, sc.base_point, delta, samples=samples, seed=seed)
        else:
            raise ValueError("constant must be one of: sr_prime, sr, kappa, sigma")
        print(json.dumps(est.to_json_dict(), sort_keys=True, indent=1))
        return 0
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fixpoint", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run a scenario and write the output bundle")
    pr.add_argument("scenario", help=f"built-in name ({', '.join(builtin_names())}) or JSON file")
    pr.add_argument("--max-iter", type=int, default=100_000)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--delta", type=float, default=0.5)
    pr.add_argument("--samples", type=int, default=256)
    pr.add_argument("--out", default="out")
    pr.add_argument("--operator", choices=("ap", "dr"), default="ap")
    pr.add_argument("--residual-tol", type=float, default=1e-12)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", help="paper_examples | convex_properties | necessity_bounds | all")

    pe = sub.add_parser("estimate", help="estimate one regularity constant")
    pe.add_argument("constant", help="sr_prime | sr | kappa | sigma")
    pe.add_argument("scenario")
    pe.add_argument("--delta", type=float, default=0.5)
    pe.add_argument("--samples", type=int, default=256)
    pe.add_argument("--seed", type=int, default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return execute_run(
            scenario=args.scenario, out_dir=args.out, seed=args.seed,
            max_iter=args.max_iter, residual_tol=args.residual_tol,
            delta=args.delta, samples=args.samples, operator=args.operator,
        )
    if args.command == "verify":
        return execute_verify(args.suite)
    if args.command == "estimate":
        return execute_estimate(args.constant, args.scenario, args.delta, args.samples, args.seed)
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
