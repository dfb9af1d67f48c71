"""The `mmabtk` command line.

```bash
mmabtk run --config configs/static.json --runs 20 --seed 3 --out results/
mmabtk sweep --config configs/static.json --param gap --values 4e-3 2e-3 1.25e-3
mmabtk report --in results/
```

Values given as flags override those of the config file. The exit code is `0`
on success, `2` for an invalid configuration and `3` when a policy broke its
protocol.
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from mmabtk.exceptions import ConfigurationError, ProtocolError
from mmabtk.harness.batch import read_report, run_batch
from mmabtk.harness.config import ExperimentConfig
from mmabtk.harness.plots import (
    SWEEP_PARAMS,
    emit_plot_data,
    emit_sweep_data,
    run_sweep,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with the `run`, `sweep` and `report` commands."""
    parser = argparse.ArgumentParser(
        prog="mmabtk",
        description="Simulate decentralized multiplayer bandits with collisions.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: %(default)s)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def experiment_args(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            "--config", type=Path, required=True, help="Experiment JSON file"
        )
        sub.add_argument("--runs", type=int, help="Number of runs")
        sub.add_argument("--seed", type=int, help="Master seed")
        sub.add_argument("--algo", help="Policy played by every player")
        sub.add_argument("--workers", type=int, help="Number of worker processes")
        sub.add_argument("--out", type=Path, help="Output directory")

    run = commands.add_parser("run", help="Run a batch of episodes")
    experiment_args(run)

    sweep = commands.add_parser("sweep", help="Run a batch per value of a parameter")
    experiment_args(sweep)
    sweep.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    sweep.add_argument("--values", type=float, nargs="*", default=[])

    report = commands.add_parser(
        "report", help="Show and re-emit the report of a batch"
    )
    report.add_argument("--in", dest="input_dir", type=Path, required=True)
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """The config file with the flags given on the command line over it."""
    config = ExperimentConfig.from_json(args.config)
    return config.replace(
        runs=args.runs,
        seed=args.seed,
        algorithm=args.algo,
        workers=args.workers,
        output_dir=str(args.out) if args.out is not None else None,
    )


def _run(args: argparse.Namespace) -> None:
    config = load_config(args)
    report = run_batch(config)
    path = emit_plot_data(report, config.output_dir)
    print(  # noqa: T201
        f"{report.n_runs} runs, {report.n_flagged} flagged,"
        f" final regret {report.final_regret_mean:.2f} +- {report.final_regret_std:.2f}"
        f" -> {path.parent}",
    )


def _sweep(args: argparse.Namespace) -> None:
    config = load_config(args)
    points = run_sweep(config, args.param, args.values)
    path = emit_sweep_data(points, config.output_dir)
    print(f"{len(points)} sweep points -> {path}")  # noqa: T201


def _report(args: argparse.Namespace) -> None:
    try:
        report = read_report(args.input_dir)
    except (OSError, ValueError, KeyError) as e:
        raise ConfigurationError(f"No report to read in {args.input_dir}: {e}") from e

    emit_plot_data(report, args.input_dir)
    print(report.df().to_string(index=False))  # noqa: T201
    print(f"flagged: {report.n_flagged}/{report.n_runs}")  # noqa: T201
    for group, regret in report.regret_by_phase.items():
        print(f"regret in {group}: {regret:.2f}")  # noqa: T201


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line.

    Args:
        argv: The arguments, those of the process if not given.

    Returns:
        The exit code.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    commands = {"run": _run, "sweep": _sweep, "report": _report}
    try:
        commands[args.command](args)
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)  # noqa: T201
        return EXIT_CONFIG
    except ProtocolError as e:
        print(f"protocol error: {e}", file=sys.stderr)  # noqa: T201
        return EXIT_PROTOCOL

    return EXIT_OK
