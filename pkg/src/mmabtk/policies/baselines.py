"""Reference policies: every player running UCB on its own, and a centralized oracle."""
from __future__ import annotations

import math
from typing import TYPE_CHECKING
from typing_extensions import override

import numpy as np

from mmabtk.arena.policy import Policy
from mmabtk.exceptions import ConfigurationError

if TYPE_CHECKING:
    from mmabtk.arena.instance import BanditInstance
    from mmabtk.arena.rounds import Observation
    from mmabtk.types import Arm, Seed


class Selfish(Policy):
    """UCB on the observed rewards, ignoring the other players.

    After pulling each arm once, lowest index first, the player pulls the arm
    of highest index `s/t + sqrt(2 ln n / t)`, breaking ties uniformly at random.
    Collisions are seen as zero rewards. Players with identical statistics pull
    the same arm, and keep colliding.

    Attributes:
        sums: The reward sums `s` of each arm.
        pulls: The pull counts `t` of each arm.
        n: The number of rounds played.
    """

    name = "selfish"

    def __init__(self, n_arms: int, horizon: int, *, seed: Seed | None = None) -> None:
        """Initialize the player."""
        super().__init__(n_arms, horizon, seed=seed)
        self.sums = np.zeros(n_arms)
        self.pulls = np.zeros(n_arms, dtype=np.int64)
        self.n = 0
        self._last: Arm | None = None

    @override
    def reset(self, rng: Seed | None = None) -> None:
        super().reset(rng)
        self.sums = np.zeros(self.n_arms)
        self.pulls = np.zeros(self.n_arms, dtype=np.int64)
        self.n = 0
        self._last = None

    def index(self) -> np.ndarray:
        """The UCB index of every arm, only defined once every arm was pulled."""
        return self.sums / self.pulls + np.sqrt(2 * math.log(self.n) / self.pulls)

    @override
    def choose(self, personal_time: int) -> Arm:
        self.n += 1
        if self.n <= self.n_arms:
            self.phase = "explore/warmup"
            self._last = self.n - 1
            return self._last

        self.phase = "explore"
        index = self.index()
        best = np.flatnonzero(index == index.max())
        self._last = int(best[0]) if len(best) == 1 else int(self.rng.choice(best))
        return self._last

    @override
    def observe(self, obs: Observation) -> None:
        assert self._last is not None, "Observed before choosing"
        self.sums[self._last] += obs.reward
        self.pulls[self._last] += 1


class Pinned(Policy):
    """A player pulling one arm from the start to its horizon.

    Attributes:
        arm: The arm pulled.
    """

    name = "pinned"

    def __init__(
        self,
        n_arms: int,
        horizon: int,
        *,
        arm: Arm,
        seed: Seed | None = None,
    ) -> None:
        """Initialize the player."""
        super().__init__(n_arms, horizon, seed=seed)
        if not 0 <= arm < n_arms:
            raise ConfigurationError(f"{arm=} out of range [0, {n_arms})")
        self.arm = arm
        self.phase = "exploit"

    @override
    def reset(self, rng: Seed | None = None) -> None:
        super().reset(rng)
        self.phase = "exploit"

    @override
    def choose(self, personal_time: int) -> Arm:
        return self.arm

    @override
    def observe(self, obs: Observation) -> None:
        pass

    @override
    def is_exploiting(self) -> Arm | None:
        return self.arm


def oracle_static(instance: BanditInstance) -> list[Pinned]:
    """The centralized benchmark, one pinned player per entry.

    Players are served in order of entry, earliest first and by index on equal
    entries, each taking the best arm not taken by an earlier player. Its
    pseudo-regret is zero.

    ```python
    instance = BanditInstance.create([0.9, 0.8, 0.1], horizon=100, n_players=2)
    assert [p.arm for p in oracle_static(instance)] == [0, 1]
    ```
    """
    order = sorted(range(instance.M), key=lambda j: instance.entries[j])
    arms = dict(zip(order, instance.ranked_arms, strict=False))
    return [
        Pinned(instance.K, instance.personal_horizon(j), arm=arms[j])
        for j in range(instance.M)
    ]
