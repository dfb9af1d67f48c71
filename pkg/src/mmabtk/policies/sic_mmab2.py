"""SIC-MMAB2, for static players without Collision Sensing.

A zero reward can not be told apart from a collision, so a bit is sent by
colliding for `T_c = ceil(ln T / mu_min)` rounds, long enough to see a positive
reward on a free arm with high probability. Statistics are not shared.
Instead, a player declares an arm it rejected by pulling it so often that its
empirical reward drops for everyone hopping over it, and takes an arm it
accepted by exploiting it, which turns its reward to zero for everyone else.

A communication phase is a sequence of blocks of equal length `T_d = K_p T_0`,
which keeps all players in lockstep whatever block each of them is in:

* one declaration block per rejected arm nobody declared yet,
* one fixation block if an accepted arm was not declared,
* reception blocks until one brings no new signal.

```python
from mmabtk.policies import SicMmab2

policy = SicMmab2(n_arms=5, horizon=500_000, mu_min=0.3)
```
"""
from __future__ import annotations

import logging
import math
from collections.abc import Collection, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING
from typing_extensions import override

import numpy as np

from mmabtk.arena.policy import Protocol, ProtocolPolicy
from mmabtk.exceptions import ConfigurationError
from mmabtk.policies._protocols import (
    HopCursor,
    SubProtocol,
    accept_reject_positions,
    bernoulli_radius,
    musical_chairs,
)

if TYPE_CHECKING:
    from mmabtk.types import Arm, Seed

logger = logging.getLogger(__name__)

DEFAULT_T0_CONSTANT = 2400
"""The constant `c` of the exploration unit `T_0 = ceil(c ln T / mu_min)`."""


class Sic2Phase(str, Enum):
    """The phases of a SIC-MMAB2 player, as tagged in the trace."""

    INIT_MC = "init/mc"
    INIT_ESTIMATE_M = "init/estimate_m"
    EXPLORE_MC = "explore/mc"
    EXPLORE = "explore"
    DECLARE = "comm/declare"
    FIX = "comm/fix"
    RECEIVE = "comm/receive"
    EXPLOIT = "exploit"


@dataclass
class BlockStats:
    """Reward sums and pull counts of each arm over one block."""

    sums: np.ndarray
    pulls: np.ndarray

    @classmethod
    def zeros(cls, n_arms: int) -> BlockStats:
        """Empty statistics."""
        return cls(np.zeros(n_arms), np.zeros(n_arms, dtype=np.int64))

    def add(self, arm: Arm, reward: float) -> None:
        """Account one pull."""
        self.sums[arm] += reward
        self.pulls[arm] += 1


@dataclass(frozen=True)
class Sic2Snapshot:
    """The view of a player at the end of a communication phase."""

    p: int
    declared: tuple[int, ...]
    active_arms: tuple[int, ...]
    n_players: int


@dataclass
class Sic2PlayerState:
    """Everything a SIC-MMAB2 player knows.

    Attributes:
        n_arms: The number of arms `K`.
        horizon: The horizon `T`.
        t_c: The length of a bit slot, `ceil(ln T / mu_min)`.
        t0: The exploration unit, `ceil(c ln T / mu_min)`.
        phase: The current phase.
        external_rank: The 1-based arm fixed on in the initial Musical Chairs.
        n_players_total: The estimated number of players `M`.
        n_players: The number of active players `M_p`.
        active_arms: The active arms `[K_p]`, ascending.
        sums: The own exploration reward sums `S`.
        pulls: The own exploration pull counts `T`.
        block: The statistics of the last reception block.
        block_len: The block length `T_d` of the current communication phase.
        declared: The arms signaled in the current communication phase, `Decl`.
        accepted: The accepted arms of the current communication phase.
        rejected: The rejected arms of the current communication phase.
        new_signals: The new signals of the last reception block.
        cursor: The sequential hopping cursor.
        p: The index of the current phase, starting at 1.
        fixed: The exploited arm.
        history: A snapshot at the end of each communication phase.
    """

    n_arms: int
    horizon: int
    t_c: int
    t0: int
    phase: Sic2Phase = Sic2Phase.INIT_MC
    external_rank: int | None = None
    n_players_total: int = 1
    n_players: int = 1
    active_arms: list[int] = field(default_factory=list)
    sums: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pulls: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    block: BlockStats = field(default_factory=lambda: BlockStats.zeros(0))
    block_len: int = 0
    declared: set[int] = field(default_factory=set)
    accepted: list[int] = field(default_factory=list)
    rejected: list[int] = field(default_factory=list)
    new_signals: set[int] = field(default_factory=set)
    cursor: HopCursor | None = None
    p: int = 1
    fixed: Arm | None = None
    history: list[Sic2Snapshot] = field(default_factory=list)

    @classmethod
    def create(
        cls,
        n_arms: int,
        horizon: int,
        *,
        mu_min: float,
        t0_constant: float = DEFAULT_T0_CONSTANT,
    ) -> Sic2PlayerState:
        """A fresh state, with the slot and exploration lengths of the instance."""
        log_t = math.log(horizon)
        return cls(
            n_arms=n_arms,
            horizon=horizon,
            t_c=math.ceil(log_t / mu_min),
            t0=math.ceil(t0_constant * log_t / mu_min),
            active_arms=list(range(n_arms)),
            sums=np.zeros(n_arms),
            pulls=np.zeros(n_arms, dtype=np.int64),
            block=BlockStats.zeros(n_arms),
        )

    def explore_length(self) -> int:
        """The length `K_p 2^p T_0` of the exploration of the current phase."""
        return len(self.active_arms) * 2**self.p * self.t0

    def empirical_means(self) -> np.ndarray:
        """The own exploration means, `nan` for unexplored arms."""
        out = np.full(self.n_arms, np.nan)
        np.divide(self.sums, self.pulls, out=out, where=self.pulls > 0)
        return out

    def best_guess(self) -> Arm:
        """The arm with the best own estimate, the last resort of a lost player."""
        means = self.empirical_means()
        if np.all(np.isnan(means)):
            return (self.external_rank or 1) - 1
        return int(np.nanargmax(means))


def estimate_m_nosensing(external_rank: int, n_arms: int, t_c: int) -> SubProtocol[int]:
    """Count the players with slots of `T_c` rounds instead of single rounds.

    Over `2K` slots the player pulls one arm per slot, starting to hop to the
    next arm from slot `2k` onward, `k` being its 1-based external rank. A slot
    without any positive reward is counted as `T_c` collisions, that is one
    more player. Players of external ranks `k < k'` share exactly the slot
    `k + k' - 1`.

    Args:
        external_rank: The 1-based external rank `k`.
        n_arms: The number of arms `K`.
        t_c: The slot length.

    Returns:
        The estimated number of players `M`.
    """
    n_players = 1
    arm = external_rank - 1
    for n in range(1, 2 * n_arms + 1):
        if n >= 2 * external_rank:
            arm = (arm + 1) % n_arms

        total = 0.0
        for _ in range(t_c):
            obs = yield arm
            total += obs.reward

        if total == 0:
            n_players += 1

    return n_players


def signal_detect(
    sums: np.ndarray,
    pulls: np.ndarray,
    block: BlockStats,
    active_arms: Collection[Arm],
) -> set[Arm]:
    """The active arms whose block mean moved by a quarter of their exploration mean.

    An arm is signaled if `|S/T - s/t| >= S / 4T`, `S/T` being its exploration
    mean and `s/t` its mean over the block. Arms not pulled in the block are
    skipped.
    """
    signaled: set[Arm] = set()
    for arm in active_arms:
        if block.pulls[arm] == 0:
            continue

        assert pulls[arm] > 0, f"Arm {arm} was never explored"
        mu = sums[arm] / pulls[arm]
        r = block.sums[arm] / block.pulls[arm]
        if abs(mu - r) >= mu / 4:
            signaled.add(arm)

    return signaled


def declare_block(
    arm: Arm,
    block_len: int,
    cursor: HopCursor,
    sums: np.ndarray,
    pulls: np.ndarray,
    rng: np.random.Generator,
    *,
    declare_prob: float = 0.5,
) -> SubProtocol[set[Arm]]:
    """Declare `arm` sub-optimal, pulling it with probability `declare_prob` a round.

    The other rounds follow the hopping cursor, which advances every round
    whichever arm is pulled, so the player still detects other signals.

    Returns:
        The signaled arms of the block, including `arm`.
    """
    block = BlockStats.zeros(len(sums))
    for _ in range(block_len):
        pulled = arm if rng.random() < declare_prob else cursor.arm
        obs = yield pulled
        block.add(pulled, obs.reward)
        cursor.advance()

    return signal_detect(sums, pulls, block, cursor.arms) | {arm}


def occupy_block(
    candidates: Collection[Arm],
    block_len: int,
    cursor: HopCursor,
    sums: np.ndarray,
    pulls: np.ndarray,
) -> SubProtocol[tuple[Arm | None, set[Arm]]]:
    """Hop until a candidate gives a positive reward, and take it.

    A positive reward proves nobody else is on the arm. The block ends early
    when an arm is taken, the player then exploits it for the rest of the
    game, the remainder of the block included.

    Returns:
        The taken arm, `None` if no candidate was free, and the signaled arms.
    """
    block = BlockStats.zeros(len(sums))
    for _ in range(block_len):
        arm = cursor.arm
        obs = yield arm
        block.add(arm, obs.reward)
        cursor.advance()
        if arm in candidates and obs.reward > 0:
            return arm, signal_detect(sums, pulls, block, cursor.arms)

    return None, signal_detect(sums, pulls, block, cursor.arms)


def receive_block(
    block_len: int,
    cursor: HopCursor,
    sums: np.ndarray,
    pulls: np.ndarray,
) -> SubProtocol[tuple[set[Arm], BlockStats]]:
    """Hop for a whole block and detect the signals of the other players.

    Returns:
        The signaled arms and the statistics of the block.
    """
    block = BlockStats.zeros(len(sums))
    for _ in range(block_len):
        arm = cursor.arm
        obs = yield arm
        block.add(arm, obs.reward)
        cursor.advance()

    return signal_detect(sums, pulls, block, cursor.arms), block


def update_sets_nosensing(
    declared: Collection[Arm],
    block_sums: np.ndarray,
    active_arms: Sequence[Arm],
    n_players: int,
) -> tuple[list[Arm], int]:
    """Drop the declared arms, counting those still giving zeros as taken.

    Taken arms give only zeros to the others, while a declared sub-optimal arm
    gives a positive reward over the last reception block with high probability.

    Returns:
        The new active arms and the new number of active players.
    """
    taken = {arm for arm in declared if block_sums[arm] == 0}
    remaining = [arm for arm in active_arms if arm not in declared]
    return remaining, n_players - len(taken)


def phase_scheduler(state: Sic2PlayerState) -> Sic2Phase:
    """The phase following the current one.

    * Exploration is preceded by Musical Chairs among the active arms when the
      last communication phase had any declaration.
    * A communication phase declares, then tries to fix, then receives until
      a block brings no new signal.
    * A player exploits once it fixed, or once nothing is left to play for.
    """
    match state.phase:
        case Sic2Phase.INIT_MC:
            return Sic2Phase.INIT_ESTIMATE_M
        case Sic2Phase.INIT_ESTIMATE_M | Sic2Phase.EXPLORE_MC:
            return Sic2Phase.EXPLORE
        case Sic2Phase.EXPLORE | Sic2Phase.DECLARE:
            undecided = set(state.rejected) - state.declared
            if undecided:
                return Sic2Phase.DECLARE
            if set(state.accepted) - state.declared:
                return Sic2Phase.FIX
            return Sic2Phase.RECEIVE
        case Sic2Phase.FIX:
            return Sic2Phase.EXPLOIT if state.fixed is not None else Sic2Phase.RECEIVE
        case Sic2Phase.RECEIVE:
            if state.new_signals:
                return Sic2Phase.RECEIVE
            if not state.active_arms or state.n_players < 1:
                return Sic2Phase.EXPLOIT
            return Sic2Phase.EXPLORE_MC if state.declared else Sic2Phase.EXPLORE
        case Sic2Phase.EXPLOIT:
            return Sic2Phase.EXPLOIT

    raise AssertionError(f"Unknown phase {state.phase}")


class SicMmab2(ProtocolPolicy):
    """A SIC-MMAB2 player.

    Attributes:
        mu_min: The known lower bound on the means of the arms.
        t0_constant: The constant `c` of `T_0 = ceil(c ln T / mu_min)`.
        declare_prob: The probability to pull the declared arm in a
            declaration block.
        state: The state of the player, set once the episode starts.
    """

    name = "sic-mmab2"

    state: Sic2PlayerState

    def __init__(
        self,
        n_arms: int,
        horizon: int,
        *,
        mu_min: float,
        t0_constant: float = DEFAULT_T0_CONSTANT,
        declare_prob: float = 0.5,
        seed: Seed | None = None,
    ) -> None:
        """Initialize the player.

        Args:
            n_arms: The number of arms.
            horizon: The horizon.
            mu_min: The lower bound on the means, in (0, 1].
            t0_constant: The constant of the exploration unit.
            declare_prob: The probability of pulling the declared arm, in (0, 1).
            seed: The seed of the private stream.
        """
        super().__init__(n_arms, horizon, seed=seed)
        if not 0 < mu_min <= 1:
            raise ConfigurationError(f"{mu_min=} must lie in (0, 1]")
        if t0_constant <= 0:
            raise ConfigurationError(f"{t0_constant=} must be positive")
        if not 0 < declare_prob < 1:
            raise ConfigurationError(f"{declare_prob=} must lie in (0, 1)")

        self.mu_min = mu_min
        self.t0_constant = t0_constant
        self.declare_prob = declare_prob

    @override
    def is_exploiting(self) -> Arm | None:
        state = getattr(self, "state", None)
        return None if state is None else state.fixed

    def _orthogonalize(
        self,
        arms: Sequence[Arm],
        duration: int,
    ) -> SubProtocol[HopCursor]:
        chairs = yield from musical_chairs(self.rng, arms, duration, sensing=False)
        if chairs.fixed is None:
            self.flag(f"{self.phase}-unfixed")
        arm = chairs.fixed if chairs.fixed is not None else chairs.last
        return HopCursor.on(arms, arm if arm is not None else arms[0])

    def _explore(self, state: Sic2PlayerState) -> SubProtocol[None]:
        assert state.cursor is not None
        length = state.explore_length()
        if not state.declared:
            state.sums += state.block.sums
            state.pulls += state.block.pulls
            length -= state.block_len

        cursor = state.cursor
        for _ in range(length):
            arm = cursor.arm
            obs = yield arm
            state.sums[arm] += obs.reward
            state.pulls[arm] += 1
            cursor.advance()

    def _start_communication(self, state: Sic2PlayerState) -> None:
        state.block_len = len(state.active_arms) * state.t0
        state.declared = set()
        state.new_signals = set()

        arms = np.asarray(state.active_arms, dtype=int)
        counts = state.pulls[arms]
        means = np.divide(
            state.sums[arms],
            counts,
            out=np.zeros(len(arms)),
            where=counts > 0,
        )
        radii = bernoulli_radius(counts, self.horizon)
        acc, rej = accept_reject_positions(means, radii, state.n_players)
        state.accepted = [int(arms[i]) for i in acc]
        state.rejected = [int(arms[i]) for i in rej]
        logger.debug(
            f"{self.name}: p={state.p} accepted {state.accepted},"
            f" rejected {state.rejected}",
        )

    def _finish_communication(self, state: Sic2PlayerState) -> None:
        state.active_arms, state.n_players = update_sets_nosensing(
            state.declared,
            state.block.sums,
            state.active_arms,
            state.n_players,
        )
        state.history.append(
            Sic2Snapshot(
                p=state.p,
                declared=tuple(sorted(state.declared)),
                active_arms=tuple(state.active_arms),
                n_players=state.n_players,
            ),
        )
        state.p += 1

    @override
    def protocol(self) -> Protocol:
        state = self.state = Sic2PlayerState.create(
            self.n_arms,
            self.horizon,
            mu_min=self.mu_min,
            t0_constant=self.t0_constant,
        )

        while True:
            self.phase = state.phase.value
            logger.debug(f"{self.name}: entering {self.phase} (p={state.p})")

            match state.phase:
                case Sic2Phase.INIT_MC:
                    state.cursor = yield from self._orthogonalize(
                        range(self.n_arms),
                        self.n_arms * state.t_c,
                    )
                    state.external_rank = state.cursor.arm + 1
                case Sic2Phase.INIT_ESTIMATE_M:
                    assert state.external_rank is not None
                    state.n_players = yield from estimate_m_nosensing(
                        state.external_rank,
                        self.n_arms,
                        state.t_c,
                    )
                    state.n_players_total = state.n_players
                    logger.debug(f"{self.name}: estimated M={state.n_players}")
                case Sic2Phase.EXPLORE_MC:
                    state.cursor = yield from self._orthogonalize(
                        state.active_arms,
                        len(state.active_arms) * state.t_c,
                    )
                case Sic2Phase.EXPLORE:
                    yield from self._explore(state)
                    self._start_communication(state)
                case Sic2Phase.DECLARE:
                    assert state.cursor is not None
                    arm = min(set(state.rejected) - state.declared)
                    signals = yield from declare_block(
                        arm,
                        state.block_len,
                        state.cursor,
                        state.sums,
                        state.pulls,
                        self.rng,
                        declare_prob=self.declare_prob,
                    )
                    state.declared |= signals
                case Sic2Phase.FIX:
                    assert state.cursor is not None
                    candidates = set(state.accepted) - state.declared
                    state.fixed, signals = yield from occupy_block(
                        candidates,
                        state.block_len,
                        state.cursor,
                        state.sums,
                        state.pulls,
                    )
                    state.declared |= signals
                case Sic2Phase.RECEIVE:
                    assert state.cursor is not None
                    signals, state.block = yield from receive_block(
                        state.block_len,
                        state.cursor,
                        state.sums,
                        state.pulls,
                    )
                    state.new_signals = signals - state.declared
                    state.declared |= state.new_signals
                    if not state.new_signals:
                        self._finish_communication(state)
                case Sic2Phase.EXPLOIT:
                    if state.fixed is None:
                        self.flag("desynchronized")
                        state.fixed = state.best_guess()
                    while True:
                        yield state.fixed

            state.phase = phase_scheduler(state)
