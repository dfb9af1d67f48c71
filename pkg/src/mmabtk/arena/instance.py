"""The bandit instance, the ground truth a game is played on."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from mmabtk.exceptions import ConfigurationError
from mmabtk.options import get_option

logger = logging.getLogger(__name__)


class Feedback(str, Enum):
    """What a player observes after a pull."""

    COLLISION_SENSING = "collision_sensing"
    """The reward and the collision bit of the pulled arm."""

    NO_SENSING = "no_sensing"
    """The reward only. A zero reward can not be told apart from a collision."""


class Distribution(str, Enum):
    """The family of the arm rewards, all supported on [0, 1]."""

    BERNOULLI = "bernoulli"
    BETA = "beta"
    """Bounded-general rewards, `Beta(c * mu, c * (1 - mu))` for a concentration `c`."""


@dataclass(frozen=True, kw_only=True)
class BanditInstance:
    """A multiplayer bandit instance.

    ```python
    from mmabtk.arena import BanditInstance

    instance = BanditInstance(means=(0.9, 0.8, 0.1), horizon=1_000, entries=(0, 0))
    print(instance.K, instance.M, instance.is_static)
    ```

    Attributes:
        means: The mean reward of each arm.
        horizon: The number of rounds `T`, played as `t = 1, ..., T`.
        entries: The entry time `tau_j` of each player. Player `j` plays the
            rounds `tau_j < t <= T`.
        feedback: What the players observe.
        distribution: The family of the arm rewards.
    """

    means: tuple[float, ...]
    horizon: int
    entries: tuple[int, ...]
    feedback: Feedback = Feedback.COLLISION_SENSING
    distribution: Distribution = Distribution.BERNOULLI
    _means: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))
        object.__setattr__(self, "feedback", Feedback(self.feedback))
        object.__setattr__(self, "distribution", Distribution(self.distribution))

        if len(self.means) < 1:
            raise ConfigurationError("An instance needs at least one arm.")

        if any(not 0.0 <= m <= 1.0 for m in self.means):
            raise ConfigurationError(f"Arm means must lie in [0, 1], got {self.means}")

        if self.horizon < 1:
            raise ConfigurationError(f"The horizon must be >= 1, got {self.horizon}")

        if not 1 <= len(self.entries) <= len(self.means):
            raise ConfigurationError(
                f"Need 1 <= M <= K players, got M={len(self.entries)}"
                f" for K={len(self.means)} arms.",
            )

        if any(not 0 <= e < self.horizon for e in self.entries):
            raise ConfigurationError(
                f"Entry times must lie in [0, {self.horizon - 1}], got {self.entries}",
            )

        object.__setattr__(self, "_means", np.asarray(self.means, dtype=float))

    @property
    def K(self) -> int:  # noqa: N802
        """The number of arms."""
        return len(self.means)

    @property
    def M(self) -> int:  # noqa: N802
        """The number of players."""
        return len(self.entries)

    @property
    def is_static(self) -> bool:
        """Whether all players enter at the start of the game."""
        return all(e == 0 for e in self.entries)

    @property
    def mu_min(self) -> float:
        """The smallest arm mean."""
        return min(self.means)

    @cached_property
    def ranked_arms(self) -> tuple[int, ...]:
        """The arms by decreasing mean, ties broken by the lowest index."""
        return tuple(int(k) for k in np.argsort(-self._means, kind="stable"))

    @cached_property
    def top_sums(self) -> np.ndarray:
        """`top_sums[m]` is the summed mean of the best `m` arms, `m = 0, ..., K`."""
        ranked = np.sort(self._means)[::-1]
        return np.concatenate([[0.0], np.cumsum(ranked)])

    def personal_horizon(self, player: int) -> int:
        """The number of rounds `T - tau_j` played by a player."""
        return self.horizon - self.entries[player]

    def active_players(self, t: int) -> list[int]:
        """The players with `tau_j < t`, i.e. playing round `t`."""
        return [j for j, e in enumerate(self.entries) if e < t]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw `n` rounds of arm rewards, one draw per arm per round.

        Bernoulli draws consume one uniform per arm per round in row order,
        so drawing in chunks gives the same values as drawing all at once.

        Args:
            rng: The environment stream.
            n: The number of rounds to draw.

        Returns:
            An `(n, K)` array of rewards in [0, 1].
        """
        match self.distribution:
            case Distribution.BERNOULLI:
                return (rng.random((n, self.K)) < self._means).astype(float)
            case Distribution.BETA:
                c = float(get_option("beta_concentration", 4.0))
                degenerate = (self._means <= 0.0) | (self._means >= 1.0)
                a = np.where(degenerate, 1.0, c * self._means)
                b = np.where(degenerate, 1.0, c * (1.0 - self._means))
                draws = rng.beta(a, b, size=(n, self.K))
                return np.where(degenerate, self._means, draws)

        raise ConfigurationError(f"Unknown distribution {self.distribution}")

    @classmethod
    def create(
        cls,
        means: Sequence[float],
        horizon: int,
        *,
        n_players: int | None = None,
        entries: Sequence[int] | None = None,
        feedback: Feedback | str = Feedback.COLLISION_SENSING,
        distribution: Distribution | str = Distribution.BERNOULLI,
    ) -> BanditInstance:
        """Create an instance, static with `n_players` if no entries are given."""
        if entries is None:
            if n_players is None:
                raise ConfigurationError("Give either `n_players` or `entries`.")
            entries = [0] * n_players
        elif n_players is not None and n_players != len(entries):
            raise ConfigurationError(f"{n_players=} does not match {len(entries)=}")

        return cls(
            means=tuple(means),
            horizon=horizon,
            entries=tuple(entries),
            feedback=Feedback(feedback),
            distribution=Distribution(distribution),
        )
