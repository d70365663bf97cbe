"""Command-line entry point: run, sweep, oracle, gradcheck, solve."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .allocator import SizeError, solve, solve_exact
from .allocator.instances import random_small_instance
from .allocator.io import load_instance, result_to_dict
from .allocator.oracle import brute_force, relative_gap
from .forecast import gradient_check, init_params, min_abs_preactivation
from .harness import (ConfigError, ExperimentConfig, emit_report, load_config, run_experiment,
                      with_override)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _experiment_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    if args.method:
        cfg = with_override(cfg, "methods", list(args.method))
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    report = run_experiment(cfg, jobs=args.jobs)
    files = emit_report(report, cfg, cfg.output_dir, timestamp=args.timestamp)
    for m, agg in report.aggregates.items():
        print(f"{m:10s} objective={agg['objective']:.6f} tet={agg['tet']['mean']:.4f}s "
              f"energy={agg['energy']['mean']:.4f}J completion={agg['completion_rate']:.3f}")
    for e in report.errors:
        print(f"error seed={e['seed']} method={e['method']}: {e['error']}", file=sys.stderr)
    print("wrote " + ", ".join(str(f) for f in files))
    return EXIT_OK


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_sweep(args) -> int:
    base = _experiment_config(args)
    root = Path(base.output_dir)
    rows = []
    for raw in args.values.split(","):
        value = _parse_value(raw.strip())
        cfg = with_override(base, args.key, value)
        out = root / f"{args.key}={raw.strip()}"
        report = run_experiment(cfg, jobs=args.jobs)
        emit_report(report, cfg, out)
        for m, agg in report.aggregates.items():
            rows.append([args.key, raw.strip(), m, repr(agg["objective"]), repr(agg["tet"]["mean"]),
                         repr(agg["energy"]["mean"]), repr(agg["completion_rate"])])
        print(f"{args.key}={raw.strip()}: {len(report.records)} runs, {len(report.errors)} errors")
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "sweep_summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value", "method", "mean_objective", "mean_tet", "mean_energy",
                    "completion_rate"])
        w.writerows(rows)
    return EXIT_OK


def cmd_oracle(args) -> int:
    start = time.perf_counter()
    worst, failures = 0.0, 0
    for k in range(args.instances):
        inst = random_small_instance(args.seed + k)
        exact = solve_exact(inst)
        ref, _ = brute_force(inst)
        gap = relative_gap(exact.objective, ref)
        worst = max(worst, gap)
        if gap > args.rtol:
            failures += 1
            print(f"instance {args.seed + k}: exact={exact.objective!r} oracle={ref!r} gap={gap:.3e}")
    print(f"oracle: {args.instances} instances, worst relative gap {worst:.3e}, "
          f"{failures} above {args.rtol:g} ({time.perf_counter() - start:.1f}s)")
    return EXIT_OK if failures == 0 else EXIT_RUNTIME


def cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    configs = [[8, 32, 16, 3], [5, 7, 6, 4, 2], [3, 4, 2]]
    worst = 0.0
    done = 0
    while done < args.pairs:
        sizes = configs[done % len(configs)]
        params = init_params(sizes, int(rng.integers(2**32)))
        params = replace(params, biases=tuple(rng.normal(0, 0.1, b.shape) for b in params.biases))
        X = rng.normal(size=(int(rng.integers(1, 9)), sizes[0]))
        Y = rng.normal(size=(X.shape[0], sizes[-1]))
        if min_abs_preactivation(params, X) < 1e-6:
            continue  # too close to a ReLU kink for finite differences
        err = gradient_check(params, X, Y, step=1e-5)
        worst = max(worst, err)
        done += 1
        print(f"pair {done}: layers={sizes} batch={X.shape[0]} max_rel_err={err:.3e}")
    ok = worst < args.rtol
    print(f"gradcheck: worst relative error {worst:.3e} ({'PASS' if ok else 'FAIL'} at {args.rtol:g})")
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    result = solve(inst, args.method)
    print(json.dumps(result_to_dict(result), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edgealloc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def experiment_flags(sp):
        sp.add_argument("--config", help="JSON config merged over the built-in defaults")
        sp.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
        sp.add_argument("--method", action="append",
                        help="method to run (repeatable): Ours, Exact, Heuristic, DLD, MEC, GSA")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    sp = sub.add_parser("run", help="full experiment")
    experiment_flags(sp)
    sp.add_argument("--timestamp", action="store_true", help="stamp report.json with the run time")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="vary one config key over a list of values")
    experiment_flags(sp)
    sp.add_argument("--key", required=True, help="dotted key, e.g. scenario.n_tasks")
    sp.add_argument("--values", required=True, help="comma-separated JSON values")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="check solve_exact against brute force on small instances")
    sp.add_argument("--instances", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rtol", type=float, default=1e-6)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gradcheck", help="audit backprop against central differences")
    sp.add_argument("--pairs", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rtol", type=float, default=1e-4)
    sp.set_defaults(func=cmd_gradcheck)

    sp = sub.add_parser("solve", help="solve a ProblemInstance JSON file, print a SolveResult")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--method", default="Heuristic",
                    choices=["Exact", "Heuristic", "DLD", "MEC", "GSA"])
    sp.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SizeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
