"""Command-line batch runner: one subcommand per experiment.

Exit codes: 0 criterion met (or none stated), 1 criterion failed,
2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bounds import BoundError
from .config import EXPERIMENTS, ConfigError, ExperimentConfig
from .evolution import IntegrationError
from .experiments import run_experiment, to_csv
from .reduction import ReductionError
from .schedules import ScheduleError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lowrank-aqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--workers", type=int, help="worker processes for parallel grids")
        p.add_argument("--seed", type=int, help="seed for random schedules and instances")
        p.add_argument("--tol", type=float, help="integrator tolerance in [1e-12, 1e-6]")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.load(args.config)
        if cfg.experiment != args.experiment:
            raise ConfigError("experiment", f"config is for {cfg.experiment!r}, not {args.experiment!r}")
    else:
        cfg = ExperimentConfig.default(args.experiment)
    for name in ("out", "workers", "seed", "tol"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, str(v) if name == "out" else v)
    return cfg.validate()


def write_outputs(outcome, cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.dumps(), encoding="utf-8")
    with open(out / "results.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(outcome))
    (out / "summary.txt").write_text("\n".join(outcome.summary) + "\n", encoding="utf-8")
    if outcome.svg is not None:
        (out / "plot.svg").write_text(outcome.svg, encoding="utf-8")
    for name, text in outcome.files.items():
        (out / name).write_text(text, encoding="utf-8")
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    try:
        cfg = resolve_config(args)
        outcome = run_experiment(cfg)
    # LinAlgError subclasses ValueError, so numerical failures are caught first
    except (IntegrationError, np.linalg.LinAlgError, FloatingPointError, RuntimeError) as e:
        print(f"{args.experiment}: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, BoundError, ReductionError, ScheduleError, ValueError, TypeError, KeyError) as e:
        print(f"{args.experiment}: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = write_outputs(outcome, cfg)
    for line in outcome.notes + outcome.summary:
        print(line)
    print(f"artifacts written to {out}")
    if outcome.passed is None:
        return EXIT_PASS
    return EXIT_PASS if outcome.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
