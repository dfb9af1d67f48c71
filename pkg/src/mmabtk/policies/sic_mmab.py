"""SIC-MMAB, for static players with Collision Sensing.

The players first reach an orthogonal setting with Musical Chairs, then count
themselves and get an internal rank from the collisions of a sequential
hopping schedule. They then alternate between

* exploration phases, hopping over the active arms without ever colliding,
* communication phases, where every player sends its quantized reward sums to
  every other player, one bit per round, a bit 1 being a forced collision,
* accepting and rejecting arms from the shared statistics, the accepted arms
  being taken by the players of highest internal rank who exploit them
  until the horizon.

```python
from mmabtk.policies import SicMmab

policy = SicMmab(n_arms=5, horizon=100_000, variant="bernoulli")
```
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import TYPE_CHECKING
from typing_extensions import override

import numpy as np

from mmabtk.arena.policy import Protocol, ProtocolPolicy
from mmabtk.arena.rounds import SensingObservation
from mmabtk.exceptions import ConfigurationError
from mmabtk.policies._protocols import (
    SubProtocol,
    accept_reject_positions,
    bernoulli_radius,
    general_radius,
    musical_chairs,
)

if TYPE_CHECKING:
    from mmabtk.types import Arm, Seed

logger = logging.getLogger(__name__)


class SicPhase(str, Enum):
    """The phases of a SIC-MMAB player, as tagged in the trace."""

    INIT_MC = "init/mc"
    INIT_ESTIMATE_M = "init/estimate_m"
    EXPLORE = "explore"
    COMMUNICATE = "comm"
    EXPLOIT = "exploit"


class Variant(str, Enum):
    """Which confidence radius and statistics are used."""

    GENERAL = "general"
    """Rewards in [0, 1]: radius `3 sqrt(ln T / 2s)`, sums are quantized."""

    BERNOULLI = "bernoulli"
    """Bernoulli rewards: radius `sqrt(2 ln T / s)`, sums are sent as they are."""


@dataclass(frozen=True)
class CommSnapshot:
    """The shared view of a player right after a communication phase.

    Attributes:
        p: The phase index.
        active_arms: The active arms during the phase.
        n_players: The number of active players `M_p` during the phase.
        shared: The quantized sums of every player, restricted to the active arms.
        accepted: The accepted arms.
        rejected: The rejected arms.
    """

    p: int
    active_arms: tuple[int, ...]
    n_players: int
    shared: tuple[tuple[int, ...], ...]
    accepted: tuple[int, ...]
    rejected: tuple[int, ...]


@dataclass
class SicPlayerState:
    """Everything a SIC-MMAB player knows.

    Attributes:
        n_arms: The number of arms `K`.
        horizon: The horizon `T`.
        external_rank: The 1-based arm the player fixed on in Musical Chairs.
        internal_rank: The 1-based rank `j` of the player among all players.
        n_players_total: The estimated number of players `M`.
        n_players: The number of active players `M_p`.
        active_arms: The arms neither accepted nor rejected yet, ascending.
        sums: The own reward sums of the player on each arm.
        shared: `(M, K)` quantized sums of every player, by internal rank.
            The rows of exploiting players keep their last statistics.
        pulls: The centralized pull counts `T_k(p)` of each arm.
        p: The index of the current phase, starting at 1.
        fixed: The exploited arm.
        history: A snapshot after each communication phase.
    """

    n_arms: int
    horizon: int
    external_rank: int | None = None
    internal_rank: int = 1
    n_players_total: int = 1
    n_players: int = 1
    active_arms: list[int] = field(default_factory=list)
    sums: np.ndarray = field(default_factory=lambda: np.zeros(0))
    shared: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=int))
    pulls: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    p: int = 1
    fixed: Arm | None = None
    history: list[CommSnapshot] = field(default_factory=list)

    def start(self, n_players: int, internal_rank: int) -> None:
        """Start the phases with the outcome of the rank estimation."""
        self.n_players_total = n_players
        self.n_players = n_players
        self.internal_rank = internal_rank
        self.active_arms = list(range(self.n_arms))
        self.sums = np.zeros(self.n_arms)
        self.shared = np.zeros((n_players, self.n_arms), dtype=np.int64)
        self.pulls = np.zeros(self.n_arms, dtype=np.int64)
        self.p = 1

    @property
    def comm_arm(self) -> Arm:
        """The communicating arm of the player, its `j`-th active arm."""
        return self.active_arms[self.internal_rank - 1]

    @property
    def is_consistent(self) -> bool:
        """Whether the player still has an arm to hop from and to communicate on."""
        return 1 <= self.internal_rank <= min(self.n_players, len(self.active_arms))

    def empirical_means(self) -> np.ndarray:
        """The mean estimated from the shared sums, `nan` for unexplored arms."""
        totals = self.shared.sum(axis=0).astype(float)
        out = np.full(self.n_arms, np.nan)
        np.divide(totals, self.pulls, out=out, where=self.pulls > 0)
        return out

    def best_guess(self) -> Arm:
        """The arm with the best shared estimate, the last resort of a lost player."""
        means = self.empirical_means()
        if np.all(np.isnan(means)):
            return (self.external_rank or 1) - 1
        return int(np.nanargmax(means))

    def snapshot(
        self,
        accepted: Sequence[Arm],
        rejected: Sequence[Arm],
    ) -> CommSnapshot:
        """Record the shared view of the current phase."""
        shared = self.shared[:, self.active_arms]
        snap = CommSnapshot(
            p=self.p,
            active_arms=tuple(self.active_arms),
            n_players=self.n_players,
            shared=tuple(tuple(int(v) for v in row) for row in shared),
            accepted=tuple(accepted),
            rejected=tuple(rejected),
        )
        self.history.append(snap)
        return snap


def quantize(s: float, rng: np.random.Generator, *, p: int | None = None) -> int:
    """Round a sum stochastically to an integer, without bias.

    Returns `floor(s) + 1` with probability `s - floor(s)`, else `floor(s)`.

    Args:
        s: The sum to round.
        rng: The stream of the player.
        p: The phase index, if given `s` is checked to fit in `p + 1` bits.
    """
    assert s >= 0, f"Can only quantize non-negative sums, got {s=}"
    if p is not None:
        assert s <= 2 ** (p + 1) - 1, f"{s=} does not fit in {p + 1} bits"

    n = math.floor(s)
    d = s - n
    return n + 1 if d > 0 and rng.random() < d else n


def send_stat(
    value: int,
    p: int,
    target: int,
    own: int,
    active_arms: Sequence[Arm],
) -> list[Arm]:
    """The pulls that send `value` in `p + 1` bits to the player of rank `target`.

    Bit `n` of `value`, least significant first, is sent at sub-step `n` by
    pulling the communicating arm of the receiver for a 1, forcing a collision,
    or the own communicating arm for a 0.

    Args:
        value: The value to send, `0 <= value <= 2^(p+1) - 1`.
        p: The phase index.
        target: The 1-based internal rank of the receiver.
        own: The 1-based internal rank of the sender.
        active_arms: The active arms.
    """
    assert 0 <= value <= 2 ** (p + 1) - 1, f"{value=} does not fit in {p + 1} bits"
    assert target != own, "A player does not send to itself"

    theirs = active_arms[target - 1]
    mine = active_arms[own - 1]
    return [theirs if (value >> n) & 1 else mine for n in range(p + 1)]


def decode_stat(collisions: Sequence[int]) -> int:
    """The value whose bits, least significant first, are the given collisions."""
    return sum(int(eta) << n for n, eta in enumerate(collisions))


def receive_stat(p: int, own: int, active_arms: Sequence[Arm]) -> SubProtocol[int]:
    """Pull the own communicating arm for `p + 1` rounds and decode the collisions.

    Args:
        p: The phase index.
        own: The 1-based internal rank of the receiver.
        active_arms: The active arms.

    Returns:
        The received value.
    """
    arm = active_arms[own - 1]
    collisions = []
    for _ in range(p + 1):
        obs = yield arm
        assert isinstance(obs, SensingObservation)
        collisions.append(obs.collision)

    return decode_stat(collisions)


def estimate_m(external_rank: int, n_arms: int) -> SubProtocol[tuple[int, int]]:
    """Count the players and find the internal rank from a hopping schedule.

    The player stays on its arm for `2k` rounds, then hops to the next arm each
    round for `2(K - k)` rounds, `k` being its 1-based external rank. Players of
    external ranks `k < k'` collide exactly once, at round `k + k'`, while the
    higher one is still waiting. Collisions count into the number of players,
    and into the internal rank while waiting.

    Args:
        external_rank: The 1-based external rank `k`.
        n_arms: The number of arms `K`.

    Returns:
        The number of players `M` and the internal rank `j`.
    """
    n_players, rank = 1, 1
    arm = external_rank - 1
    for _ in range(2 * external_rank):
        obs = yield arm
        assert isinstance(obs, SensingObservation)
        if obs.collision:
            n_players += 1
            rank += 1

    for _ in range(2 * (n_arms - external_rank)):
        arm = (arm + 1) % n_arms
        obs = yield arm
        assert isinstance(obs, SensingObservation)
        if obs.collision:
            n_players += 1

    return n_players, rank


def explore_phase(state: SicPlayerState) -> SubProtocol[None]:
    """Hop over the active arms `2^p` times, starting after the own communicating arm.

    Players start on distinct arms and hop together, so they never collide.
    """
    active = state.active_arms
    n_active = len(active)
    j = state.internal_rank
    for step in range(n_active * 2**state.p):
        arm = active[(j + step) % n_active]
        obs = yield arm
        state.sums[arm] += obs.reward


def communication_schedule(
    n_players: int,
    n_active: int,
) -> Iterator[tuple[int, int, int]]:
    """The transmissions `(sender, receiver, arm position)` of a phase, in order.

    Ranks are 1-based, arm positions 0-based into the active arms. Every
    player iterates the same lexicographic order.
    """
    players = range(1, n_players + 1)
    for sender, receiver, k in product(players, players, range(n_active)):
        if sender != receiver:
            yield sender, receiver, k


def communication_phase(
    state: SicPlayerState,
    rng: np.random.Generator,
    *,
    variant: Variant = Variant.GENERAL,
) -> SubProtocol[None]:
    """Exchange the sums of every active player on every active arm.

    Each transmission takes `p + 1` rounds, where the sender sends, the receiver
    receives and everyone else waits on their own communicating arm. The phase
    lasts `M_p (M_p - 1) K_p (p + 1)` rounds.

    Args:
        state: The state of the player, whose `shared` sums are updated.
        rng: The stream of the player, for the quantization.
        variant: Whether the sums are quantized.
    """
    p, j = state.p, state.internal_rank
    active = state.active_arms
    own_arm = state.comm_arm

    values: dict[Arm, int] = {}
    for arm in active:
        s = float(state.sums[arm])
        match variant:
            case Variant.GENERAL:
                values[arm] = quantize(s, rng, p=p)
            case Variant.BERNOULLI:
                values[arm] = int(round(s))
        state.shared[j - 1, arm] = values[arm]

    for sender, receiver, k in communication_schedule(state.n_players, len(active)):
        arm = active[k]
        if sender == j:
            for pull in send_stat(values[arm], p, receiver, j, active):
                yield pull
        elif receiver == j:
            state.shared[sender - 1, arm] = yield from receive_stat(p, j, active)
        else:
            for _ in range(p + 1):
                yield own_arm


def accept_reject(
    shared: np.ndarray,
    pulls: np.ndarray,
    active_arms: Sequence[Arm],
    n_players: int,
    horizon: int,
    *,
    variant: Variant = Variant.GENERAL,
) -> tuple[list[Arm], list[Arm]]:
    """Accept the arms surely in the top `M_p`, reject those surely not.

    The estimate of an arm is the sum over all players of the shared sums,
    over its centralized pull count.

    Args:
        shared: `(M, K)` shared sums.
        pulls: The centralized pull count of each arm.
        active_arms: The active arms, ascending.
        n_players: The number of active players `M_p`.
        horizon: The horizon `T`.
        variant: Which confidence radius to use.

    Returns:
        The accepted arms by ascending index and the rejected arms.
    """
    arms = np.asarray(active_arms, dtype=int)
    counts = np.asarray(pulls)[arms]
    totals = np.asarray(shared)[:, arms].sum(axis=0).astype(float)
    means = np.divide(totals, counts, out=np.zeros(len(arms)), where=counts > 0)

    match variant:
        case Variant.GENERAL:
            radii = general_radius(counts, horizon)
        case Variant.BERNOULLI:
            radii = bernoulli_radius(counts, horizon)

    acc, rej = accept_reject_positions(means, radii, n_players)
    return [int(arms[i]) for i in acc], [int(arms[i]) for i in rej]


def update_sets(
    state: SicPlayerState,
    accepted: Sequence[Arm],
    rejected: Sequence[Arm],
) -> None:
    """Either start exploiting an accepted arm, or drop the decided arms.

    The players of internal rank `j > M_p - |Acc|` take the accepted arm
    `Acc[M_p - j + 1]`, the others carry on with `M_p - |Acc|` players and
    without the accepted and rejected arms. The remaining ranks stay `1..M_{p+1}`.
    """
    m_p, j = state.n_players, state.internal_rank
    if m_p - j + 1 <= len(accepted):
        state.fixed = accepted[m_p - j]
        assert state.fixed in state.active_arms, f"{state.fixed=} is not active"
    else:
        decided = set(accepted) | set(rejected)
        state.n_players = m_p - len(accepted)
        state.active_arms = [a for a in state.active_arms if a not in decided]

    state.p += 1


class SicMmab(ProtocolPolicy):
    """A SIC-MMAB player.

    Attributes:
        variant: Whether rewards are treated as general, with quantized
            statistics, or as Bernoulli.
        t0: The length of the Musical Chairs initialization.
        state: The state of the player, set once the episode starts.
    """

    name = "sic-mmab"
    requires_sensing = True

    state: SicPlayerState

    def __init__(
        self,
        n_arms: int,
        horizon: int,
        *,
        variant: Variant | str = Variant.GENERAL,
        t0: int | None = None,
        seed: Seed | None = None,
    ) -> None:
        """Initialize the player.

        Args:
            n_arms: The number of arms.
            horizon: The horizon.
            variant: `#!python "general"` or `#!python "bernoulli"`.
            t0: The length of Musical Chairs, `ceil(K ln T)` by default.
            seed: The seed of the private stream.
        """
        super().__init__(n_arms, horizon, seed=seed)
        try:
            self.variant = Variant(variant)
        except ValueError as e:
            raise ConfigurationError(f"Unknown SIC-MMAB {variant=}") from e

        if t0 is not None and t0 < 0:
            raise ConfigurationError(f"{t0=} must be non-negative")

        self.t0 = t0 if t0 is not None else math.ceil(n_arms * math.log(horizon))

    @override
    def is_exploiting(self) -> Arm | None:
        state = getattr(self, "state", None)
        return None if state is None else state.fixed

    def _enter(self, phase: SicPhase) -> None:
        self.phase = phase.value
        logger.debug(f"{self.name}: entering {phase.value} (p={self.state.p})")

    @override
    def protocol(self) -> Protocol:
        state = self.state = SicPlayerState(n_arms=self.n_arms, horizon=self.horizon)

        self._enter(SicPhase.INIT_MC)
        chairs = yield from musical_chairs(
            self.rng,
            range(self.n_arms),
            self.t0,
            sensing=True,
        )
        if chairs.fixed is None:
            self.flag("init-unfixed")
        arm = chairs.fixed if chairs.fixed is not None else chairs.last
        state.external_rank = (arm if arm is not None else 0) + 1

        self._enter(SicPhase.INIT_ESTIMATE_M)
        n_players, rank = yield from estimate_m(state.external_rank, self.n_arms)
        state.start(n_players, rank)
        logger.debug(f"{self.name}: estimated M={n_players}, internal rank {rank}")

        while state.fixed is None:
            if not state.is_consistent:
                self.flag("desynchronized")
                state.fixed = state.best_guess()
                break

            self._enter(SicPhase.EXPLORE)
            yield from explore_phase(state)

            self._enter(SicPhase.COMMUNICATE)
            yield from communication_phase(state, self.rng, variant=self.variant)

            state.pulls[state.active_arms] += state.n_players * 2**state.p
            accepted, rejected = accept_reject(
                state.shared,
                state.pulls,
                state.active_arms,
                state.n_players,
                self.horizon,
                variant=self.variant,
            )
            state.snapshot(accepted, rejected)
            update_sets(state, accepted, rejected)

        self._enter(SicPhase.EXPLOIT)
        while True:
            yield state.fixed

