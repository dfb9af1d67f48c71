"""The lockstep episode loop."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from typing import TYPE_CHECKING, Any

from mmabtk.arena.events import Emitter, Event
from mmabtk.arena.ledger import RegretLedger, pseudo_regret
from mmabtk.arena.rounds import RoundResult, feedback_view, resolve_round
from mmabtk.arena.trace import EpisodeTrace
from mmabtk.exceptions import ConfigurationError, ProtocolError
from mmabtk.options import get_option
from mmabtk.randomness import derive_rng

if TYPE_CHECKING:
    from mmabtk.arena.instance import BanditInstance
    from mmabtk.arena.policy import Policy
    from mmabtk.types import Seed

logger = logging.getLogger(__name__)


class Arena(Emitter):
    """Plays one episode of an instance with one policy per player.

    At each round `t = 1, ..., T`, every player with `tau_j < t` is asked for an
    arm, the round is resolved and every pulling player is fed back its own
    observation. The environment and each player draw from their own streams,
    derived from the seed of the episode.

    ```python
    from mmabtk.arena import Arena

    arena = Arena(instance, policies)

    @arena.on_round_resolved
    def no_collisions(result, policies) -> None:
        assert not any(result.eta)

    trace, ledger = arena.run(seed=1)
    ```
    """

    ROUND_RESOLVED: Event[[RoundResult, Sequence[Policy]], Any] = Event(
        "round-resolved",
    )
    """Emitted after every round with the result and all of the policies."""

    EPISODE_FINISHED: Event[[EpisodeTrace, RegretLedger], Any] = Event(
        "episode-finished",
    )
    """Emitted once the horizon is reached, with the trace and its ledger."""

    def __init__(
        self,
        instance: BanditInstance,
        policies: Sequence[Policy],
        *,
        name: str | None = None,
    ) -> None:
        """Initialize the arena.

        Args:
            instance: The instance to play.
            policies: One freshly created policy per entry of the instance.
            name: The name of the arena, used in logging.
        """
        if len(policies) != instance.M:
            raise ConfigurationError(
                f"Got {len(policies)} policies for {instance.M} players.",
            )

        super().__init__(name=name or "arena")
        self.instance = instance
        self.policies = list(policies)
        self.on_round_resolved = self.subscriber(self.ROUND_RESOLVED)
        self.on_episode_finished = self.subscriber(self.EPISODE_FINISHED)

    def run(self, seed: Seed) -> tuple[EpisodeTrace, RegretLedger]:
        """Play the episode.

        Args:
            seed: The master seed of the episode.

        Returns:
            The trace of every round and the regret ledger.

        Raises:
            ProtocolError: If an active policy gives no arm, or a policy
                breaks its contract with the feedback it is given.
        """
        instance = self.instance
        entries = instance.entries
        env_rng = derive_rng(seed, "environment", 0)
        for j, policy in enumerate(self.policies):
            policy.reset(rng=derive_rng(seed, "player", j))

        logger.debug(
            f"{self.name}: Starting episode with K={instance.K}, M={instance.M},"
            f" T={instance.horizon}, {instance.feedback.value}",
        )

        trace = EpisodeTrace.empty(instance)
        chunk_size = int(get_option("draw_chunk_size", 4096))
        hooked = self.on_round_resolved.active
        draws: list[list[float]] = []

        for t in range(1, instance.horizon + 1):
            offset = (t - 1) % chunk_size
            if offset == 0:
                n = min(chunk_size, instance.horizon - t + 1)
                draws = instance.sample(env_rng, n).tolist()

            pulls: dict[int, int] = {}
            phases: dict[int, str] = {}
            for j, policy in enumerate(self.policies):
                if entries[j] >= t:
                    continue

                arm = policy.choose(t - entries[j])
                if arm is None:
                    raise ProtocolError(
                        f"{policy.name} (player {j}) gave no arm in round {t}"
                        f" while active, in phase {policy.phase!r}",
                    )
                pulls[j] = arm
                phases[j] = policy.phase

            result = resolve_round(instance, t, pulls, draws=draws[offset])
            for j in pulls:
                obs = feedback_view(result, instance.feedback, j, entry=entries[j])
                self.policies[j].observe(obs)

            trace.record(result, phases)
            if hooked:
                self.emit(self.ROUND_RESOLVED, result, self.policies)

        exploit_arms = {j: p.is_exploiting() for j, p in enumerate(self.policies)}
        ledger = pseudo_regret(trace, instance, exploit_arms)
        logger.debug(
            f"{self.name}: Finished episode, regret={ledger.final_regret:.2f},"
            f" collisions={ledger.total_collisions}",
        )
        self.emit(self.EPISODE_FINISHED, trace, ledger)
        return trace, ledger


def run_episode(
    instance: BanditInstance,
    policies: Sequence[Policy],
    seed: Seed,
) -> tuple[EpisodeTrace, RegretLedger]:
    """Play one episode, see [`Arena.run()`][mmabtk.arena.Arena.run]."""
    return Arena(instance, policies).run(seed)
