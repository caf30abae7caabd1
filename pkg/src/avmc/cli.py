"""Command line interface: ``avmc run`` (online experiment) and
``avmc validate`` (tail Monte Carlo)."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import (ExperimentConfig, ValidationConfig, run_experiment,
                      run_validation)


def _add_run_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=("gaussian", "binomial", "poisson"))
    parser.add_argument("--d1", type=int)
    parser.add_argument("--d2", type=int)
    parser.add_argument("--rank", type=int)
    parser.add_argument("--scale", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--runs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--checkpoints",
                        help="comma separated checkpoint counts, e.g. 5,20,500")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avmc",
        description="Online matrix completion with always-valid risk bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the online experiment")
    run_p.add_argument("--config", help="JSON config file")
    run_p.add_argument("--out", default=".", help="output directory")
    _add_run_overrides(run_p)

    val_p = sub.add_parser("validate", help="Monte Carlo tail validation")
    val_p.add_argument("--config", help="JSON config file")
    val_p.add_argument("--out", default=".", help="output directory")
    val_p.add_argument("--trials", type=int)
    val_p.add_argument("--seed", type=int)
    return parser


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    overrides = {}
    for name in fields:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if overrides.get("checkpoints") is not None:
        overrides["checkpoints"] = tuple(
            int(f) for f in str(overrides["checkpoints"]).split(","))
    return dataclasses.replace(cfg, **overrides)


def _validation_config(args: argparse.Namespace) -> ValidationConfig:
    cfg = ValidationConfig.from_json(args.config) if args.config else ValidationConfig()
    overrides = {}
    for name in ("trials", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return dataclasses.replace(cfg, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        cfg = _experiment_config(args)
        result = run_experiment(cfg, args.out)
        print(f"wrote {result.trace_path} and {result.summary_path} "
              f"(coverage {result.coverage_rate:.3f})")
        return 0
    cfg = _validation_config(args)
    path = run_validation(cfg, args.out)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
