"""Aggregating the runs of a batch into a report."""
from __future__ import annotations

import dataclasses
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any
from typing_extensions import Self

import numpy as np
import pandas as pd

from mmabtk.exceptions import ConfigurationError

if TYPE_CHECKING:
    from mmabtk.harness.batch import RunSummary


def exploitation_key(arms: Sequence[int]) -> str:
    """The key of an end-state exploitation map, its sorted arms joined by commas."""
    return ",".join(str(arm) for arm in sorted(arms))


@dataclass(frozen=True, kw_only=True)
class AggregateReport:
    """Statistics over the runs of a batch.

    Runs which raised a flag, such as a failed initialisation, are counted in
    `n_flagged` and the regret is given both over all runs and over the
    unflagged runs only. Standard deviations are those of the population.

    Attributes:
        checkpoints: The rounds `t` the regret is reported at.
        n_runs: The number of runs.
        n_flagged: The number of runs with at least one flag.
        mean_regret: The mean cumulative regret at each checkpoint.
        std_regret: Its standard deviation.
        mean_regret_valid: The mean over the unflagged runs, `None` if all
            runs were flagged.
        std_regret_valid: Its standard deviation.
        final_regret_mean: The mean regret at the horizon.
        final_regret_std: Its standard deviation.
        collisions_by_phase: The total collided pulls of each phase tag.
        regret_by_phase: The mean regret of each phase group.
        failure_rates: The fraction of runs raising each flag.
        exploitation_frequencies: The number of runs ending with each set of
            exploited arms, see
            [`exploitation_key()`][mmabtk.harness.report.exploitation_key].
        top_m_rate: The fraction of runs ending with the top-M arms exploited
            by one player each.
    """

    checkpoints: list[int]
    n_runs: int
    n_flagged: int
    mean_regret: list[float]
    std_regret: list[float]
    mean_regret_valid: list[float] | None
    std_regret_valid: list[float] | None
    final_regret_mean: float
    final_regret_std: float
    collisions_by_phase: dict[str, int]
    regret_by_phase: dict[str, float]
    failure_rates: dict[str, float]
    exploitation_frequencies: dict[str, int]
    top_m_rate: float

    @classmethod
    def from_runs(cls, runs: Sequence[RunSummary], checkpoints: Sequence[int]) -> Self:
        """Aggregate the runs of a batch, in any order.

        Args:
            runs: The summaries of the runs.
            checkpoints: The checkpoints the runs were summarized at.

        Returns:
            The report.
        """
        if len(runs) == 0:
            raise ValueError("Can not aggregate an empty batch.")

        runs = sorted(runs, key=lambda r: r.run_id)
        n = len(runs)
        regret = np.array([r.regret for r in runs], dtype=float)
        valid = np.array([not r.flagged for r in runs])
        valid_mean = valid_std = None
        if valid.any():
            valid_mean = regret[valid].mean(axis=0).tolist()
            valid_std = regret[valid].std(axis=0).tolist()
        final = np.array([r.final_regret for r in runs], dtype=float)

        collisions: Counter[str] = Counter()
        for r in runs:
            collisions.update(r.collisions_by_phase)

        groups = sorted({g for r in runs for g in r.regret_by_phase})
        flags = Counter(flag for r in runs for flag in r.flags)
        maps = Counter(exploitation_key(r.exploited_arms) for r in runs)

        return cls(
            checkpoints=[int(t) for t in checkpoints],
            n_runs=n,
            n_flagged=int((~valid).sum()),
            mean_regret=regret.mean(axis=0).tolist(),
            std_regret=regret.std(axis=0).tolist(),
            mean_regret_valid=valid_mean,
            std_regret_valid=valid_std,
            final_regret_mean=float(final.mean()),
            final_regret_std=float(final.std()),
            collisions_by_phase={k: int(collisions[k]) for k in sorted(collisions)},
            regret_by_phase={
                g: float(np.mean([r.regret_by_phase.get(g, 0.0) for r in runs]))
                for g in groups
            },
            failure_rates={k: flags[k] / n for k in sorted(flags)},
            exploitation_frequencies={k: maps[k] for k in sorted(maps)},
            top_m_rate=float(np.mean([r.top_m for r in runs])),
        )

    def df(self) -> pd.DataFrame:
        """The regret curve, one row per checkpoint.

        Columns are `t, mean_regret, std_regret, mean_regret_valid,
        std_regret_valid`, the last two empty if every run was flagged.
        """
        missing = [np.nan] * len(self.checkpoints)
        return pd.DataFrame(
            {
                "t": self.checkpoints,
                "mean_regret": self.mean_regret,
                "std_regret": self.std_regret,
                "mean_regret_valid": self.mean_regret_valid or missing,
                "std_regret_valid": self.std_regret_valid or missing,
            },
        )

    def to_dict(self) -> dict[str, Any]:
        """The report as a JSON compatible dictionary."""
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Self:
        """Read a report back from the output of `to_dict()`.

        Raises:
            ConfigurationError: If the keys are not those of a report.
        """
        fields = {f.name for f in dataclasses.fields(cls)}
        if set(d) != fields:
            raise ConfigurationError(
                f"Not a report, keys differ by {sorted(set(d) ^ fields)}",
            )
        return cls(**d)
