"""Building blocks shared by the protocols.

The sub-procedures here are generators in the form of a
[`Protocol`][mmabtk.arena.Protocol]: they yield arms, are sent back the
observation of each pull and return their result, so that a policy composes
them with `yield from`.
"""
from __future__ import annotations

import math
from collections.abc import Generator, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, TypeVar

import numpy as np

from mmabtk.arena.rounds import SensingObservation

if TYPE_CHECKING:
    from mmabtk.arena.rounds import Observation
    from mmabtk.types import Arm

T = TypeVar("T")

SubProtocol = Generator["Arm", "Observation", T]


def is_free(obs: Observation, *, sensing: bool) -> bool:
    """Whether an observation proves the pulled arm had no other player on it.

    With Collision Sensing this is the collision bit. Without it, only a
    positive reward proves there was no collision.
    """
    if sensing:
        assert isinstance(obs, SensingObservation)
        return obs.collision == 0
    return obs.reward > 0


class ChairsResult(NamedTuple):
    """The outcome of a musical chairs procedure."""

    fixed: Arm | None
    """The fixed arm, `None` if no pull was free."""

    last: Arm | None
    """The arm of the last pull, `None` for an empty procedure."""


def musical_chairs(
    rng: np.random.Generator,
    arms: Sequence[Arm],
    duration: int,
    *,
    sensing: bool,
) -> SubProtocol[ChairsResult]:
    """Reach an orthogonal setting by pulling random arms until one is free.

    Until fixed, pull an arm uniformly at random among `arms` and fix on it
    if the pull was free. Once fixed, keep pulling the fixed arm until the
    `duration` is spent.

    Args:
        rng: The stream of the player.
        arms: The arms to choose from.
        duration: The number of pulls of the procedure.
        sensing: Whether the collision bit is observed, else a positive reward
            is required to fix.

    Returns:
        The fixed arm, `None` if no pull was free within the duration, and
        the arm of the last pull.
    """
    fixed: Arm | None = None
    arm: Arm | None = None
    for _ in range(duration):
        arm = fixed if fixed is not None else arms[int(rng.integers(len(arms)))]
        obs = yield arm
        if fixed is None and is_free(obs, sensing=sensing):
            fixed = arm

    return ChairsResult(fixed, arm)


@dataclass
class HopCursor:
    """The position of a player in sequential hopping over a list of arms.

    Players who start on different positions of the same list and advance
    together never pull the same arm.

    Attributes:
        arms: The arms hopped over, in order.
        position: The index of the current arm in `arms`.
    """

    arms: list[Arm]
    position: int = 0

    @property
    def arm(self) -> Arm:
        """The current arm."""
        return self.arms[self.position % len(self.arms)]

    def advance(self, steps: int = 1) -> None:
        """Move `steps` arms forward, wrapping around."""
        self.position = (self.position + steps) % len(self.arms)

    @classmethod
    def on(cls, arms: Sequence[Arm], arm: Arm) -> HopCursor:
        """A cursor over `arms` placed on `arm`."""
        return cls(list(arms), list(arms).index(arm))


def general_radius(pulls: np.ndarray, horizon: int) -> np.ndarray:
    """The confidence radius `3 sqrt(ln T / 2s)` after `s` pulls of bounded rewards."""
    return _radius(pulls, math.log(horizon) / 2.0, scale=3.0)


def bernoulli_radius(pulls: np.ndarray, horizon: int) -> np.ndarray:
    """The confidence radius `sqrt(2 ln T / s)` after `s` pulls."""
    return _radius(pulls, 2.0 * math.log(horizon), scale=1.0)


def _radius(pulls: np.ndarray, numerator: float, *, scale: float) -> np.ndarray:
    s = np.asarray(pulls, dtype=float)
    out = np.full(s.shape, np.inf)
    np.divide(numerator, s, out=out, where=s > 0)
    return scale * np.sqrt(out)


def accept_reject_positions(
    means: np.ndarray,
    radii: np.ndarray,
    n_players: int,
) -> tuple[list[int], list[int]]:
    """Decide which arms are surely among the best `n_players`, and which surely not.

    An arm is accepted if its lower bound is above the upper bound of at least
    `K_p - M_p` other arms, and rejected if at least `M_p` other arms have their
    lower bound above its upper bound. Overlapping intervals decide nothing.

    With a zero radius and distinct means this accepts exactly the top
    `n_players` arms and rejects the others.

    Args:
        means: The estimated mean of each active arm.
        radii: The confidence radius of each active arm.
        n_players: The number of active players `M_p`.

    Returns:
        The positions of the accepted arms, ascending, and of the rejected arms,
        ascending, both into `means`.
    """
    means = np.asarray(means, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n_arms = len(means)
    lower = means - radii
    upper = means + radii

    # dominates[k, i]: the interval of k lies above the one of i
    dominates = lower[:, None] >= upper[None, :]
    np.fill_diagonal(dominates, False)

    accepted = np.flatnonzero(dominates.sum(axis=1) >= n_arms - n_players)
    rejected = np.flatnonzero(dominates.sum(axis=0) >= n_players)
    assert not set(accepted) & set(rejected), f"{accepted=} and {rejected=} overlap"
    return [int(i) for i in accepted], [int(i) for i in rejected]
