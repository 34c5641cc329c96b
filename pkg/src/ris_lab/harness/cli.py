"""Command-line entry point.

    ris-lab run --config cfg.toml [--experiment NAME] [--seed S]
                [--trials T] [--out DIR] [--threads N]
    ris-lab validate --config cfg.toml

Exit codes: 0 success, 1 configuration error, 2 runtime error. The thread
count falls back to the RIS_LAB_THREADS environment variable, then 1.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .config import ConfigError, load_config
from .experiments import run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ris-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the configured experiment")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--experiment", help="override the experiment name")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--out", help="override the output directory")
    run_p.add_argument("--threads", type=int)

    val_p = sub.add_parser("validate", help="parse and validate a config")
    val_p.add_argument("--config", required=True)
    return parser


def _resolve_threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("RIS_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"RIS_LAB_THREADS={env!r} is not an integer") from exc
    return 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        loaded = load_config(args.config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        spec = loaded.experiment
        print(
            f"ok: experiment={spec.name} trials={spec.trials} seed={spec.seed} "
            f"out={spec.output_dir}"
        )
        return 0

    overrides = {}
    if args.experiment is not None:
        overrides["name"] = args.experiment
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["output_dir"] = args.out
    try:
        threads = _resolve_threads(args.threads)
        if overrides:
            loaded.experiment = dataclasses.replace(loaded.experiment, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        rows = run_experiment(loaded, threads=threads)
    except Exception as exc:  # runtime failure, distinct from bad config
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    print(
        f"{loaded.experiment.name}: {len(rows)} rows -> "
        f"{loaded.experiment.output_dir}/{loaded.experiment.name}.csv"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
