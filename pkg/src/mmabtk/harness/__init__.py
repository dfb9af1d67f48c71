"""Experiments: configs, seeded batches of episodes, reports and plot data."""
from __future__ import annotations

from mmabtk.harness.batch import (
    RunSummary,
    checkpoint_grid,
    read_report,
    run_batch,
    run_one,
    write_batch,
)
from mmabtk.harness.config import ExperimentConfig, generate_means
from mmabtk.harness.executors import SequentialExecutor, make_executor
from mmabtk.harness.plots import (
    SweepPoint,
    emit_plot_data,
    emit_sweep_data,
    run_sweep,
    sweep_config,
)
from mmabtk.harness.report import AggregateReport

__all__ = [
    "RunSummary",
    "checkpoint_grid",
    "read_report",
    "run_batch",
    "run_one",
    "write_batch",
    "ExperimentConfig",
    "generate_means",
    "SequentialExecutor",
    "make_executor",
    "SweepPoint",
    "emit_plot_data",
    "emit_sweep_data",
    "run_sweep",
    "sweep_config",
    "AggregateReport",
]
