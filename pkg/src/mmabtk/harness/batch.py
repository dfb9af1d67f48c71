"""Running the seeded episodes of an experiment.

Run `i` of an experiment plays the instance with fresh policies under the seed
`derive_seed(seed, "run", i)`. Runs are independent, so they are spread over
an executor and aggregated in the order of their id, whatever the order they
complete in. Given the master seed and the number of runs, everything written
is byte for byte the same.

```python
from mmabtk.harness import ExperimentConfig, run_batch

config = ExperimentConfig(
    horizon=10_000,
    means=(0.9, 0.75, 0.6, 0.45, 0.3),
    n_players=3,
    algorithm="sic-mmab",
    runs=10,
    seed=1,
)
report = run_batch(config)
print(report.df())
```
"""
from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from concurrent.futures import Future, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from more_itertools import all_unique

from mmabtk.arena.analysis import (
    collisions_by_phase,
    exploits_top_arms,
    regret_by_phase,
    round_groups,
)
from mmabtk.arena.episode import run_episode
from mmabtk.exceptions import ProtocolError
from mmabtk.harness.executors import make_executor, terminate_workers
from mmabtk.harness.report import AggregateReport
from mmabtk.options import get_option
from mmabtk.policies.registry import make_policies
from mmabtk.randomness import derive_seed

if TYPE_CHECKING:
    from mmabtk.arena.instance import BanditInstance
    from mmabtk.arena.policy import Policy
    from mmabtk.harness.config import ExperimentConfig

logger = logging.getLogger(__name__)

RUNS_CSV = "runs.csv"
SUMMARY_JSON = "summary.json"


def checkpoint_grid(horizon: int, base: int | None = None) -> list[int]:
    """The rounds the regret is reported at.

    These are the powers of `base` below `horizon`, followed by `horizon`.

    Args:
        horizon: The horizon `T`.
        base: The base of the grid, the option `checkpoint_base` if not given.
    """
    base = int(get_option("checkpoint_base", 2)) if base is None else base
    if base < 2:
        raise ValueError(f"{base=} must be at least 2")

    grid = []
    t = 1
    while t < horizon:
        grid.append(t)
        t *= base
    grid.append(horizon)
    return grid


def initialisation_flags(
    instance: BanditInstance,
    policies: Sequence[Policy],
) -> set[str]:
    """Initialisation failures only visible from outside the players.

    For a static instance, a player which estimated another number of players
    raises `"m-misestimated"` and players sharing an internal rank raise
    `"ranks-not-distinct"`.
    """
    if not instance.is_static:
        return set()

    states = [getattr(policy, "state", None) for policy in policies]
    flags = set()
    totals = [getattr(s, "n_players_total", None) for s in states]
    if any(m is not None and m != instance.M for m in totals):
        flags.add("m-misestimated")

    ranks = [getattr(s, "internal_rank", None) for s in states]
    if not all_unique(r for r in ranks if r is not None):
        flags.add("ranks-not-distinct")

    return flags


@dataclass(frozen=True, kw_only=True)
class RunSummary:
    """What a batch keeps of one episode.

    Attributes:
        run_id: The index of the run in the batch.
        seed: The seed the episode was played with.
        checkpoints: The rounds `t` summarized.
        regret: The cumulative pseudo-regret at each checkpoint.
        collisions: The cumulative collided pulls at each checkpoint.
        phases: The phase group of each checkpoint round.
        final_regret: The pseudo-regret at the horizon.
        collisions_by_phase: The collided pulls of each phase tag.
        regret_by_phase: The regret of each phase group.
        flags: The flags raised by the players or the batch.
        exploited_arms: The arms exploited at the end, sorted.
        top_m: Whether the top-M arms end up exploited, one player each.
    """

    run_id: int
    seed: int
    checkpoints: tuple[int, ...]
    regret: tuple[float, ...]
    collisions: tuple[int, ...]
    phases: tuple[str, ...]
    final_regret: float
    collisions_by_phase: dict[str, int] = field(default_factory=dict)
    regret_by_phase: dict[str, float] = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    exploited_arms: tuple[int, ...] = ()
    top_m: bool = False

    @property
    def flagged(self) -> bool:
        """Whether the run raised any flag."""
        return len(self.flags) > 0

    def df(self) -> pd.DataFrame:
        """The rows of the run in `runs.csv`."""
        return pd.DataFrame(
            {
                "run_id": self.run_id,
                "t": self.checkpoints,
                "cum_regret": self.regret,
                "collisions": self.collisions,
                "phase": self.phases,
            },
        )


def run_one(
    config: ExperimentConfig,
    run_id: int,
    checkpoints: Sequence[int] | None = None,
) -> RunSummary:
    """Play run `run_id` of an experiment.

    Args:
        config: The experiment.
        run_id: The index of the run.
        checkpoints: The rounds to summarize, the
            [`checkpoint_grid()`][mmabtk.harness.batch.checkpoint_grid] if not given.

    Returns:
        The summary of the run.

    Raises:
        ProtocolError: If a policy breaks its contract.
    """
    instance = config.instance()
    policies = make_policies(instance, config.policy_algorithms(), config.params)
    seed = derive_seed(config.seed, "run", run_id)
    trace, ledger = run_episode(instance, policies, seed)

    if checkpoints is None:
        checkpoints = checkpoint_grid(instance.horizon)
    index = np.asarray(checkpoints) - 1
    groups = round_groups(trace)

    flags = set().union(*(p.flags for p in policies))
    flags |= initialisation_flags(instance, policies)
    if flags:
        logger.warning(f"Run {run_id} (seed {seed}) flagged: {sorted(flags)}")

    return RunSummary(
        run_id=run_id,
        seed=seed,
        checkpoints=tuple(checkpoints),
        regret=tuple(float(r) for r in ledger.cum_regret[index]),
        collisions=tuple(int(c) for c in np.cumsum(ledger.collisions)[index]),
        phases=tuple(str(g) for g in groups[index]),
        final_regret=ledger.final_regret,
        collisions_by_phase=collisions_by_phase(trace),
        regret_by_phase=regret_by_phase(trace, ledger),
        flags=tuple(sorted(flags)),
        exploited_arms=tuple(ledger.exploited_arms()),
        top_m=exploits_top_arms(instance, ledger.per_player_exploit_arm),
    )


def write_batch(
    config: ExperimentConfig,
    runs: Sequence[RunSummary],
    report: AggregateReport,
    output_dir: str | Path,
) -> tuple[Path, Path]:
    """Write `runs.csv` and `summary.json` of a batch.

    The summary holds the config under `"config"` and the report under
    `"report"`.

    Returns:
        The paths of the two files.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    runs_path = output_dir / RUNS_CSV
    frames = [run.df() for run in sorted(runs, key=lambda r: r.run_id)]
    pd.concat(frames, ignore_index=True).to_csv(runs_path, index=False)

    summary_path = output_dir / SUMMARY_JSON
    summary = {"config": config.to_dict(), "report": report.to_dict()}
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return runs_path, summary_path


def read_report(input_dir: str | Path) -> AggregateReport:
    """Read the report of a batch from the `summary.json` in `input_dir`."""
    summary = json.loads((Path(input_dir) / SUMMARY_JSON).read_text())
    return AggregateReport.from_dict(summary["report"])


def run_batch(
    config: ExperimentConfig,
    *,
    output_dir: str | Path | None = None,
    write: bool = True,
) -> AggregateReport:
    """Run every episode of an experiment and aggregate them.

    Args:
        config: The experiment.
        output_dir: Where to write, `config.output_dir` if not given.
        write: Whether to write `runs.csv` and `summary.json`.

    Returns:
        The report of the batch.

    Raises:
        ConfigurationError: If the config does not describe a valid experiment.
        ProtocolError: If a policy breaks its contract in any run. The other
            runs are stopped.
    """
    # Fail on a bad config here rather than in every worker
    instance = config.instance()
    make_policies(instance, config.policy_algorithms(), config.params)

    logger.info(
        f"Running {config.runs} runs of {config.algorithm} with K={instance.K},"
        f" M={instance.M}, T={instance.horizon} on {config.workers} worker(s)",
    )

    checkpoints = checkpoint_grid(instance.horizon)
    executor = make_executor(config.workers)
    futures: dict[Future[RunSummary], int] = {
        executor.submit(run_one, config, run_id, checkpoints): run_id
        for run_id in range(config.runs)
    }

    runs: list[RunSummary] = []
    try:
        for future in as_completed(futures):
            run_id = futures[future]
            try:
                runs.append(future.result())
            except ProtocolError:
                logger.error(f"Run {run_id} broke the protocol, stopping the batch")
                raise
            except Exception:
                logger.exception(f"Run {run_id} crashed, stopping the batch")
                raise

            logger.info(f"Finished run {run_id} ({len(runs)}/{config.runs})")
    except BaseException:
        terminate_workers(executor)
        raise
    else:
        executor.shutdown(wait=True)

    report = AggregateReport.from_runs(runs, checkpoints)
    if report.n_flagged:
        logger.warning(f"{report.n_flagged}/{report.n_runs} runs were flagged")

    if write:
        write_batch(config, runs, report, output_dir or config.output_dir)

    return report
