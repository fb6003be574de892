#!/usr/bin/env python3
"""Command-line front door: analyze, shift, approx, oracle, sweep, estimate."""
import argparse
import sys
from typing import List, Optional

from cli.commands import (EXIT_IO, cmd_analyze, cmd_approx, cmd_estimate, cmd_oracle, cmd_shift,
                          cmd_sweep, parse_checks, parse_grid, run_command)
from core.config import reload_config
from core.file_parsing import JsonReportParser
from core.sampling import QUANTITIES
from sweeps.sweep_framework import DEFAULT_CHECKS, FAMILIES, SweepConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Exact laboratory for Boolean functions of small total influence")
    parser.add_argument("--config", help="YAML configuration file (default: $CUBELAB_CONFIG or config.yml)")
    parser.add_argument("--out", help="Write the JSON document here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Influence report with isoperimetric and KKL bounds")
    analyze.add_argument("--fn", required=True, help="Function spec, e.g. 'subcube:k=3,n=8' or 'n=2:8'")

    shift = sub.add_parser("shift", help="Apply S_ST or the compression pipeline")
    shift.add_argument("--fn", required=True)
    shift.add_argument("--S", dest="S", default="", help="Comma-separated coordinates, e.g. 1,3")
    shift.add_argument("--T", dest="T", default="", help="Comma-separated coordinates, e.g. 2")
    shift.add_argument("--pipeline", action="store_true", help="Run the full compression pipeline")

    approx = sub.add_parser("approx", help="Certified DNF approximation")
    approx.add_argument("--fn", required=True)
    approx.add_argument("--eps", required=True, type=float)
    approx.add_argument("--policy", help="Split rule name or 'split_rule=...,rho=1/16,budget_mode=eps-mu'")

    oracle = sub.add_parser("oracle", help="Exhaustive best DNF with a bounded number of terms")
    oracle.add_argument("--fn", required=True)
    oracle.add_argument("--size", type=int, default=None)

    sweep = sub.add_parser("sweep", help="Bound-verification sweep")
    sweep.add_argument("--family", required=True, choices=FAMILIES)
    sweep.add_argument("--n", type=int)
    sweep.add_argument("--count", type=int, default=1000)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--checks", default=",".join(DEFAULT_CHECKS))
    sweep.add_argument("--grid", default="", help="';'-separated function specs for generator-grid")
    sweep.add_argument("--output", default="sweep_results.csv")
    sweep.add_argument("--parallelism", type=int)
    sweep.add_argument("--chunk-size", type=int)
    sweep.add_argument("--eps", type=float, default=0.1)
    sweep.add_argument("--delta", type=float, default=0.5)

    est = sub.add_parser("estimate", help="Monte-Carlo estimate with a Hoeffding radius")
    est.add_argument("--fn", required=True)
    est.add_argument("--quantity", required=True, choices=QUANTITIES)
    est.add_argument("--samples", type=int, default=100000)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--k", type=int, help="Coordinate for influence estimates")
    est.add_argument("--dnf", help="DNF text for dnf-error estimates, e.g. '1&!2|2&3'")
    est.add_argument("--confidence", type=float)
    return parser


def dispatch(args: argparse.Namespace):
    reproducer = getattr(args, "fn", None)
    if args.command == "analyze":
        return run_command("analyze", cmd_analyze, args.fn, reproducer=reproducer)
    if args.command == "shift":
        return run_command("shift", cmd_shift, args.fn, args.S, args.T, args.pipeline, reproducer=reproducer)
    if args.command == "approx":
        return run_command("approx", cmd_approx, args.fn, args.eps, args.policy, reproducer=reproducer)
    if args.command == "oracle":
        return run_command("oracle", cmd_oracle, args.fn, args.size, reproducer=reproducer)
    if args.command == "sweep":
        def sweep():
            config = SweepConfig(
                family=args.family, n=args.n, count=args.count, seed=args.seed,
                checks=tuple(parse_checks(args.checks)), output=args.output,
                parallelism=args.parallelism, chunk_size=args.chunk_size,
                grid=tuple(parse_grid(args.grid)), eps=args.eps, delta=args.delta,
            )
            return cmd_sweep(config)
        return run_command("sweep", sweep)
    return run_command("estimate", cmd_estimate, args.fn, args.quantity, args.samples, args.seed,
                       args.k, args.dnf, args.confidence, reproducer=reproducer)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.config:
        reload_config(args.config)
    document, code = dispatch(args)
    if args.out:
        try:
            JsonReportParser.write_json(document, args.out)
        except OSError:
            return EXIT_IO
    else:
        print(JsonReportParser.dumps(document))
    return code


if __name__ == "__main__":
    sys.exit(main())
