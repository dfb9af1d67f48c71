"""Resolving a round of pulls into rewards, and what each player gets to see of it."""
from __future__ import annotations

from collections import Counter
from collections.abc import Mapping
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Any

from mmabtk.arena.instance import Feedback
from mmabtk.exceptions import ConfigurationError
from mmabtk.types import assert_never

if TYPE_CHECKING:
    import numpy as np

    from mmabtk.arena.instance import BanditInstance
    from mmabtk.types import Arm, PlayerId, Pulls


@dataclass(frozen=True, slots=True)
class RoundResult:
    """The ground truth of one round.

    Attributes:
        t: The global time of the round, `1 <= t <= T`.
        pulls: The arm pulled by each player active in the round.
        raw_draws: The draw `X_k(t)` of every arm, shared by all who pull it.
        eta: The collision bit of every arm, 1 iff two or more players pulled it.
        rewards: The reward `X(1 - eta)` of the pulled arm, for each active player.
    """

    t: int
    pulls: Mapping[PlayerId, Arm]
    raw_draws: tuple[float, ...]
    eta: tuple[int, ...]
    rewards: Mapping[PlayerId, float]

    def collided(self, player: PlayerId) -> bool:
        """Whether a player collided this round."""
        return self.eta[self.pulls[player]] == 1

    @property
    def n_collided(self) -> int:
        """The number of players who collided this round."""
        return sum(self.eta[arm] for arm in self.pulls.values())

    def to_dict(self) -> dict[str, Any]:
        """A json serializable view, keyed by player index as a string."""
        return {
            "t": self.t,
            "pulls": {str(j): a for j, a in sorted(self.pulls.items())},
            "raw_draws": list(self.raw_draws),
            "eta": list(self.eta),
            "rewards": {str(j): r for j, r in sorted(self.rewards.items())},
        }


@dataclass(frozen=True, slots=True)
class Observation:
    """What a player observes in the No Sensing setting.

    There is no collision field at all, so a policy can not read one.

    Attributes:
        reward: The reward `r^j(t)`.
        personal_time: The number of rounds played by the player, `t - tau_j`.
    """

    reward: float
    personal_time: int

    def to_dict(self) -> dict[str, Any]:
        """A json serializable view."""
        return asdict(self)


@dataclass(frozen=True, slots=True)
class SensingObservation(Observation):
    """What a player observes in the Collision Sensing setting.

    Attributes:
        collision: The collision bit of the pulled arm.
    """

    collision: int


def resolve_round(
    instance: BanditInstance,
    t: int,
    pulls: Pulls,
    rng: np.random.Generator | None = None,
    *,
    draws: np.ndarray | None = None,
) -> RoundResult:
    """Resolve the pulls of a round.

    One draw `X_k(t)` is made per arm. Players pulling the same arm collide
    and all receive 0, everyone else receives the draw of their arm.

    ```python
    import numpy as np
    from mmabtk.arena import BanditInstance, resolve_round

    instance = BanditInstance.create([0.5, 1.0], horizon=10, n_players=1)
    result = resolve_round(instance, 1, {0: 1}, np.random.default_rng(0))
    assert result.rewards[0] == 1.0
    ```

    Args:
        instance: The instance played.
        t: The global time of the round.
        pulls: The arm of every pulling player.
        rng: The environment stream to draw from, if no `draws` are given.
        draws: The `K` draws of this round, e.g. a row of
            [`BanditInstance.sample()`][mmabtk.arena.BanditInstance.sample].

    Returns:
        The resolved round.

    Raises:
        ConfigurationError: If an arm is out of range, a player is unknown or a
            player pulls outside of its window `tau_j < t <= T`.
    """
    if not 1 <= t <= instance.horizon:
        raise ConfigurationError(f"Round {t=} outside of [1, {instance.horizon}]")

    for player, arm in pulls.items():
        if not 0 <= player < instance.M:
            raise ConfigurationError(f"Unknown player {player} in round {t}")
        if not 0 <= arm < instance.K:
            raise ConfigurationError(
                f"Player {player} pulled arm {arm} out of range [0, {instance.K})",
            )
        if instance.entries[player] >= t:
            raise ConfigurationError(
                f"Player {player} entering at {instance.entries[player]}"
                f" can not pull in round {t}",
            )

    if draws is None:
        if rng is None:
            raise ValueError("Either `rng` or `draws` must be given.")
        draws = instance.sample(rng, 1)[0]

    counts = Counter(pulls.values())
    eta = tuple(int(counts[k] > 1) for k in range(instance.K))
    raw = tuple(float(x) for x in draws)
    rewards = {j: raw[arm] * (1 - eta[arm]) for j, arm in pulls.items()}
    return RoundResult(t=t, pulls=dict(pulls), raw_draws=raw, eta=eta, rewards=rewards)


def feedback_view(
    result: RoundResult,
    mode: Feedback,
    player: PlayerId,
    *,
    entry: int = 0,
) -> Observation:
    """The observation of a player of a resolved round.

    Args:
        result: The resolved round.
        mode: The feedback setting of the instance.
        player: The player observing.
        entry: The entry time of the player, to compute its personal time.

    Returns:
        A [`SensingObservation`][mmabtk.arena.SensingObservation] with Collision
        Sensing, a bare [`Observation`][mmabtk.arena.Observation] otherwise.
    """
    if player not in result.pulls:
        raise ConfigurationError(f"Player {player} did not pull in round {result.t}")

    reward = result.rewards[player]
    personal_time = result.t - entry
    match mode:
        case Feedback.COLLISION_SENSING:
            collision = result.eta[result.pulls[player]]
            return SensingObservation(reward, personal_time, collision)
        case Feedback.NO_SENSING:
            return Observation(reward, personal_time)
        case _:
            assert_never(mode)
