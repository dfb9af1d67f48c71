"""Regret accounting of an episode."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

if TYPE_CHECKING:
    from mmabtk.arena.instance import BanditInstance
    from mmabtk.arena.trace import EpisodeTrace


@dataclass
class RegretLedger:
    """The regret of one episode, round by round.

    Attributes:
        increments: The pseudo-regret of each round,
            `sum of the best #M(t) means - sum_j mu_{pi_j} (1 - eta)`.
        realized_increments: The same with the realized rewards in place of
            the means of the pulled arms, for cross-checking.
        collisions: The number of players who collided in each round.
        per_player_exploit_arm: The arm each player exploits at the end of the
            episode, `None` for a player who does not.
    """

    increments: np.ndarray
    realized_increments: np.ndarray
    collisions: np.ndarray
    per_player_exploit_arm: dict[int, int | None] = field(default_factory=dict)

    @property
    def cum_regret(self) -> np.ndarray:
        """The cumulative pseudo-regret after each round."""
        return np.cumsum(self.increments)

    @property
    def realized_cum_regret(self) -> np.ndarray:
        """The cumulative realized regret after each round."""
        return np.cumsum(self.realized_increments)

    @property
    def final_regret(self) -> float:
        """The pseudo-regret at the horizon."""
        return float(self.increments.sum())

    @property
    def total_collisions(self) -> int:
        """The number of collided pulls over the episode."""
        return int(self.collisions.sum())

    def at(self, checkpoints: Sequence[int]) -> np.ndarray:
        """The cumulative pseudo-regret at the given rounds `t`."""
        return self.cum_regret[np.asarray(checkpoints, dtype=int) - 1]

    def exploited_arms(self) -> list[int]:
        """The arms exploited at the end, one entry per exploiting player."""
        return sorted(a for a in self.per_player_exploit_arm.values() if a is not None)

    def df(self) -> pd.DataFrame:
        """The ledger as a frame with columns `t, cum_regret, collisions`."""
        return pd.DataFrame(
            {
                "t": np.arange(1, len(self.increments) + 1),
                "cum_regret": self.cum_regret,
                "collisions": self.collisions,
            },
        )

    def to_csv(self, path: str | Path) -> Path:
        """Write the ledger as a csv with columns `t, cum_regret, collisions`."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.df().to_csv(path, index=False)
        return path


def pseudo_regret(
    trace: EpisodeTrace,
    instance: BanditInstance,
    exploit_arms: Mapping[int, int | None] | None = None,
) -> RegretLedger:
    """Account the regret of a complete trace.

    The pseudo-regret of a round compares the best achievable expected sum of
    rewards for the players present with the expected reward the players got,
    `sum_{k <= #M(t)} mu_(k) - sum_j mu_{pi_j(t)} (1 - eta_{pi_j(t)}(t))`.

    Args:
        trace: The trace of the episode.
        instance: The instance played.
        exploit_arms: The final exploited arm of each player.

    Returns:
        The regret ledger of the episode.
    """
    n = len(trace)
    means = np.asarray(instance.means, dtype=float)
    pulls = trace.pulls[:n]
    active = pulls >= 0
    free = active & (trace.collisions[:n] == 0)

    n_active = active.sum(axis=1)
    best = instance.top_sums[n_active]

    # Sorting each row the way `top_sums` is built makes an optimal round exactly 0
    got = np.where(free, means[np.where(active, pulls, 0)], 0.0)
    got = np.cumsum(-np.sort(-got, axis=1), axis=1)[:, -1]
    realized = np.where(active, trace.rewards[:n], 0.0).sum(axis=1)

    return RegretLedger(
        increments=np.maximum(best - got, 0.0),
        realized_increments=best - realized,
        collisions=np.where(active, trace.collisions[:n], 0).sum(axis=1),
        per_player_exploit_arm=dict(exploit_arms or {}),
    )
