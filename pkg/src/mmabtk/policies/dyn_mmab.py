"""DYN-MMAB, for players entering at different times without Collision Sensing.

A player explores uniformly at random over all arms. Since every exploring
player does so, the others only scale the expected reward of every free arm
by a common factor, which keeps the ordering of the free arms. An arm taken by
another player gives zeros only, which the player detects as a long enough
run of zeros on that arm.

The player keeps a list of `preferences`, the successive best free arms, and
tries to take the one its pointer is on. It takes it the first time it pulls
it and gets a positive reward.

```python
from mmabtk.policies import DynMmab

policy = DynMmab(n_arms=5, horizon=200_000)
```
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING
from typing_extensions import override

import numpy as np

from mmabtk.arena.policy import Protocol, ProtocolPolicy
from mmabtk.exceptions import ConfigurationError

if TYPE_CHECKING:
    from mmabtk.types import Arm, Seed

logger = logging.getLogger(__name__)


@dataclass
class DynPlayerState:
    """Everything a DYN-MMAB player knows.

    Attributes:
        n_arms: The number of arms `K`.
        horizon: The personal horizon `T^j`.
        confidence_scale: A multiplier on the confidence radius.
        sums: Reward sums of each arm.
        pulls: Pull counts of each arm.
        block_sums: Reward sums of each arm within its current block.
        block_pulls: Pull counts of each arm within its current block.
        block_len: The block length `L` of each arm, the number of zeros in a
            row after which the arm is deemed taken.
        lower: The lower confidence bound of each arm.
        upper: The upper confidence bound of each arm.
        preferences: The successive best free arms.
        occupied: The arms deemed taken by another player.
        pointer: The 1-based position in `preferences` of the arm to take.
        fixed: The exploited arm.
    """

    n_arms: int
    horizon: int
    confidence_scale: float = 1.0
    sums: np.ndarray = field(init=False)
    pulls: np.ndarray = field(init=False)
    block_sums: np.ndarray = field(init=False)
    block_pulls: np.ndarray = field(init=False)
    block_len: np.ndarray = field(init=False)
    lower: np.ndarray = field(init=False)
    upper: np.ndarray = field(init=False)
    preferences: list[Arm] = field(default_factory=list)
    occupied: set[Arm] = field(default_factory=set)
    pointer: int = 1
    fixed: Arm | None = None

    def __post_init__(self) -> None:
        self.sums = np.zeros(self.n_arms)
        self.pulls = np.zeros(self.n_arms, dtype=np.int64)
        self.block_sums = np.zeros(self.n_arms)
        self.block_pulls = np.zeros(self.n_arms, dtype=np.int64)
        self.block_len = np.full(self.n_arms, np.inf)
        self.lower = np.zeros(self.n_arms)
        self.upper = np.ones(self.n_arms)

    @property
    def log_horizon(self) -> float:
        """`ln T^j`."""
        return math.log(self.horizon)

    @property
    def target(self) -> Arm | None:
        """The arm the pointer is on, if any."""
        if self.pointer <= len(self.preferences):
            return self.preferences[self.pointer - 1]
        return None

    def active_arms(self) -> list[Arm]:
        """The arms neither preferred nor occupied."""
        taken = set(self.preferences) | self.occupied
        return [k for k in range(self.n_arms) if k not in taken]

    def radius(self, t: int) -> float:
        """The confidence radius `2 sqrt(6 K ln T^j / t)` at personal time `t`."""
        width = math.sqrt(6 * self.n_arms * self.log_horizon / t)
        return self.confidence_scale * 2.0 * width

    def explore_step(self, rng: np.random.Generator) -> Arm:
        """An arm uniformly at random among all arms, taken ones included."""
        return int(rng.integers(self.n_arms))

    def update_statistics(self, arm: Arm, reward: float, t: int) -> None:
        """Account a pull, then refresh every bound and the block length of `arm`.

        Arms never pulled keep the bounds `[0, 1]`. The block length only ever
        decreases, `L <- min(2e ln T^j / lower, L)` with `x / 0 = inf`.
        """
        self.sums[arm] += reward
        self.pulls[arm] += 1
        self.block_sums[arm] += reward
        self.block_pulls[arm] += 1

        pulled = self.pulls > 0
        means = np.divide(
            self.sums, self.pulls, out=np.zeros(self.n_arms), where=pulled
        )
        b = self.radius(t)
        self.lower = np.where(pulled, np.maximum(means - b, 0.0), 0.0)
        self.upper = np.where(pulled, np.minimum(means + b, 1.0), 1.0)

        if self.lower[arm] > 0:
            candidate = 2 * math.e * self.log_horizon / self.lower[arm]
            self.block_len[arm] = min(candidate, self.block_len[arm])

    def try_fix(self, arm: Arm, reward: float) -> None:
        """Take `arm` if it is the target and the pull was free."""
        if arm == self.target and reward > 0:
            self.fixed = arm

    def advance_pointer(self) -> None:
        """Move the pointer past the target if it is occupied."""
        target = self.target
        if target is not None and target in self.occupied:
            self.pointer += 1

    def close_zero_block(self, arm: Arm) -> None:
        """End a complete block of `arm`, deeming `arm` taken if it gave only zeros."""
        if self.block_pulls[arm] >= self.block_len[arm]:
            if self.block_sums[arm] == 0:
                if arm not in self.occupied:
                    logger.debug(f"dyn-mmab: arm {arm} deemed occupied")
                self.occupied.add(arm)
            self.block_sums[arm] = 0.0
            self.block_pulls[arm] = 0

    def ingest(self, arm: Arm, reward: float, t: int) -> None:
        """Account a pull and close the zero block of `arm` if it is complete."""
        self.update_statistics(arm, reward, t)
        self.close_zero_block(arm)

    def preference_update(self) -> None:
        """Prefer the active arm whose interval lies above all other active ones."""
        active = self.active_arms()
        for i in active:
            others = [k for k in active if k != i]
            if all(self.lower[i] > self.upper[k] for k in others):
                self.preferences.append(i)
                position = len(self.preferences)
                logger.debug(f"dyn-mmab: preferring arm {i} at position {position}")
                return

    def occupied_demotion(self) -> None:
        """Deem the target occupied if an arm past the `p` first preferences wins."""
        target = self.target
        if target is None:
            return

        ahead = set(self.preferences[: self.pointer])
        if any(
            self.lower[k] > self.upper[target]
            for k in range(self.n_arms)
            if k not in ahead
        ):
            self.occupied.add(target)

        self.advance_pointer()

    def step(self, arm: Arm, reward: float, t: int) -> None:
        """Process the observation of a pull, in the order of the protocol."""
        self.update_statistics(arm, reward, t)
        self.try_fix(arm, reward)
        self.advance_pointer()
        self.close_zero_block(arm)
        self.preference_update()
        self.occupied_demotion()


class DynMmab(ProtocolPolicy):
    """A DYN-MMAB player.

    Attributes:
        confidence_scale: A multiplier on the confidence radius. Below 1 the
            player decides sooner, losing the guarantee of the radius.
        state: The state of the player, set once the episode starts.
    """

    name = "dyn-mmab"

    state: DynPlayerState

    def __init__(
        self,
        n_arms: int,
        horizon: int,
        *,
        confidence_scale: float = 1.0,
        seed: Seed | None = None,
    ) -> None:
        """Initialize the player.

        Args:
            n_arms: The number of arms.
            horizon: The personal horizon `T^j`.
            confidence_scale: A positive multiplier on the confidence radius.
            seed: The seed of the private stream.
        """
        super().__init__(n_arms, horizon, seed=seed)
        if confidence_scale <= 0:
            raise ConfigurationError(f"{confidence_scale=} must be positive")
        self.confidence_scale = confidence_scale

    @override
    def is_exploiting(self) -> Arm | None:
        state = getattr(self, "state", None)
        return None if state is None else state.fixed

    @override
    def protocol(self) -> Protocol:
        state = self.state = DynPlayerState(
            self.n_arms,
            self.horizon,
            confidence_scale=self.confidence_scale,
        )

        self.phase = "explore"
        while state.fixed is None:
            arm = state.explore_step(self.rng)
            obs = yield arm
            state.step(arm, obs.reward, obs.personal_time)

        self.phase = "exploit"
        logger.debug(f"{self.name}: exploiting arm {state.fixed}")
        while True:
            yield state.fixed
