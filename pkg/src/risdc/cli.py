"""Command-line interface: single-user / multi-user sweeps and one-shot solve."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments
from .errors import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigurationError,
    DomainError,
    NumericalError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risdc",
        description="RIS passive-beamforming sweeps and regulation-matrix solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("single-user", "multi-user"):
        p = sub.add_parser(name, help=f"run the {name} Monte Carlo sweep")
        p.add_argument("--config", help="JSON experiment config (defaults built in)")
        p.add_argument("--out", default=f"risdc_{name.replace('-', '_')}.csv",
                       help="output CSV path (summary goes to <out>.summary.csv)")
        p.add_argument("--seed", type=int, help="override master seed")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument("--threads", help="worker threads (integer or 'auto'); "
                       "falls back to RISDC_THREADS, then 1")
        p.add_argument("--no-timing", action="store_true",
                       help="zero the wall-time column for byte-comparable output")
        p.add_argument("--no-fig", action="store_true",
                       help="skip rendering the figure next to the CSV")

    p = sub.add_parser("solve", help="solve one instance from matrix JSON files")
    p.add_argument("--g", required=True, help="NB->RIS matrix JSON (N x M)")
    p.add_argument("--h", required=True, action="append", dest="h_paths",
                   help="RIS->UE matrix JSON (N x K); repeat for multiple UEs")
    p.add_argument("--method", default="decouple",
                   help="decouple | thin | mirror | pa")
    p.add_argument("--out", required=True, help="output JSON path")
    return parser


def _run_sweep_command(args, scenario: str) -> int:
    if args.config:
        cfg = experiments.load_config(args.config)
        if cfg.scenario != scenario:
            raise ConfigurationError(
                f"config scenario {cfg.scenario!r} does not match subcommand {scenario!r}"
            )
    elif scenario == "single_user":
        cfg = experiments.default_single_user_config()
    else:
        cfg = experiments.default_multi_user_config()

    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    threads = experiments.resolve_threads(args.threads)

    runner = (
        experiments.run_single_user_sweep
        if scenario == "single_user"
        else experiments.run_multi_user_sweep
    )
    result = runner(cfg, threads=threads, include_timing=not args.no_timing)
    experiments.write_csv(result, args.out)
    if not args.no_fig:
        from .report import render_sweep_figure

        render_sweep_figure(result, Path(args.out).with_suffix(".png"))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "single-user":
            return _run_sweep_command(args, "single_user")
        if args.command == "multi-user":
            return _run_sweep_command(args, "multi_user")
        if args.command == "solve":
            return experiments.solve_once(args.g, args.h_paths, args.method, args.out)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:  # console-script entry point
    sys.exit(main())


if __name__ == "__main__":
    entry()
