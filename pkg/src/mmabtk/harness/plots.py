"""Plot data: regret curves and final-regret sweeps as CSV.

Nothing is rendered here, the files are meant for any plotting tool.

* `regret_curve.csv` has the regret of a report against time, with columns
    `t, mean_regret, std_regret, mean_regret_valid, std_regret_valid`.
* `sweep.csv` has the final regret against a swept parameter, with columns
    `param, value, x, final_regret_mean, final_regret_std, n_runs, n_flagged`.
    For a sweep over the gap `x` is `1/gap`, for one over the horizon it is
    the horizon.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING, Literal, NamedTuple

import pandas as pd

from mmabtk.exceptions import ConfigurationError
from mmabtk.harness.batch import run_batch

if TYPE_CHECKING:
    from mmabtk.harness.config import ExperimentConfig
    from mmabtk.harness.report import AggregateReport

logger = logging.getLogger(__name__)

REGRET_CURVE_CSV = "regret_curve.csv"
SWEEP_CSV = "sweep.csv"

SweepParam = Literal["gap", "horizon"]
SWEEP_PARAMS: tuple[SweepParam, ...] = ("gap", "horizon")


class SweepPoint(NamedTuple):
    """The final regret of one value of a sweep."""

    param: str
    value: float
    x: float
    final_regret_mean: float
    final_regret_std: float
    n_runs: int
    n_flagged: int


SWEEP_COLUMNS = list(SweepPoint._fields)


def emit_plot_data(report: AggregateReport, output_dir: str | Path) -> Path:
    """Write the regret curve of a report, one row per checkpoint.

    Returns:
        The path of `regret_curve.csv`.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / REGRET_CURVE_CSV
    report.df().to_csv(path, index=False)
    return path


def sweep_config(
    config: ExperimentConfig,
    param: SweepParam,
    value: float,
) -> ExperimentConfig:
    """The experiment of one value of a sweep.

    A gap sweep keeps the best mean of the config and spaces the others
    `value` apart, see the `"gap"` means of
    [`ExperimentConfig`][mmabtk.harness.ExperimentConfig].
    """
    output_dir = str(Path(config.output_dir) / f"{param}={value:g}")
    match param:
        case "gap":
            if value <= 0:
                raise ConfigurationError(f"A gap must be positive, got {value}")
            start = max(config.arm_means())
            return config.replace(
                means={"kind": "gap", "start": start, "gap": float(value)},
                n_arms=len(config.arm_means()),
                output_dir=output_dir,
            )
        case "horizon":
            if int(value) != value:
                raise ConfigurationError(f"A horizon must be an integer, got {value}")
            return config.replace(horizon=int(value), output_dir=output_dir)
        case _:
            raise ConfigurationError(
                f"Can not sweep over {param!r}, use one of {SWEEP_PARAMS}"
            )


def run_sweep(
    config: ExperimentConfig,
    param: SweepParam,
    values: Sequence[float],
    *,
    write: bool = True,
) -> list[SweepPoint]:
    """Run a batch for each value of a parameter.

    Args:
        config: The base experiment.
        param: The parameter swept, `"gap"` or `"horizon"`.
        values: Its values.
        write: Whether each batch writes its files, in a subdirectory
            `<param>=<value>` of the output directory of the config.

    Returns:
        The final regret of each value, in the order given.
    """
    points = []
    for value in values:
        swept = sweep_config(config, param, value)
        logger.info(f"Sweep: {param}={value:g}")
        report = run_batch(swept, write=write)
        points.append(
            SweepPoint(
                param=param,
                value=float(value),
                x=1.0 / value if param == "gap" else float(value),
                final_regret_mean=report.final_regret_mean,
                final_regret_std=report.final_regret_std,
                n_runs=report.n_runs,
                n_flagged=report.n_flagged,
            ),
        )
    return points


def emit_sweep_data(points: Sequence[SweepPoint], output_dir: str | Path) -> Path:
    """Write the rows of a sweep, only the header if there are none.

    Returns:
        The path of `sweep.csv`.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / SWEEP_CSV
    df = pd.DataFrame([p._asdict() for p in points], columns=SWEEP_COLUMNS)
    df.to_csv(path, index=False)
    return path
