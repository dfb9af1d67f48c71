"""The contract between the arena and a player.

A [`Policy`][mmabtk.arena.Policy] only ever sees its own personal time and its
own [`Observation`][mmabtk.arena.Observation]s. It holds no reference to the
means of the instance, to the other players or to the global time, which is
what makes a protocol decentralized.

Most protocols are written as a
[`ProtocolPolicy`][mmabtk.arena.ProtocolPolicy], a generator which yields the
arm to pull and receives the observation back,

```python
class AlwaysFirst(ProtocolPolicy):
    name = "always-first"

    def protocol(self):
        while True:
            obs = yield 0
```

Sub-procedures are then plain generators composed with `yield from`.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Generator
from typing import TYPE_CHECKING, ClassVar, TypeAlias
from typing_extensions import override

from mmabtk.arena.rounds import Observation, SensingObservation
from mmabtk.exceptions import ConfigurationError, ProtocolError
from mmabtk.randomness import as_rng

if TYPE_CHECKING:
    import numpy as np

    from mmabtk.types import Arm, Seed

logger = logging.getLogger(__name__)

Protocol: TypeAlias = Generator["Arm", Observation, None]
"""A protocol yields arms to pull and is sent back the observation of each pull."""


class Policy(ABC):
    """A single player.

    Attributes:
        n_arms: The number of arms `K`, known to every player.
        horizon: The personal horizon `T^j = T - tau_j` of the player.
        rng: The private random stream of the player.
        phase: A tag of what the player is doing, recorded in the trace for
            every pull. A `/` separates the group of a tag from its detail,
            e.g. `#!python "init/mc"`.
        flags: Failures the player noticed about itself, e.g. an unfinished
            initialization. A flagged run is reported separately.
    """

    name: ClassVar[str]
    """The name the policy is registered under."""

    requires_sensing: ClassVar[bool] = False
    """Whether the policy needs Collision Sensing observations."""

    def __init__(self, n_arms: int, horizon: int, *, seed: Seed | None = None) -> None:
        """Initialize the policy.

        Args:
            n_arms: The number of arms.
            horizon: The personal horizon of the player.
            seed: The seed of the private stream. The arena re-seeds every
                policy with its own derived stream when an episode starts.
        """
        super().__init__()
        if n_arms < 1:
            raise ConfigurationError(f"A policy needs at least one arm, got {n_arms=}")
        if horizon < 1:
            raise ConfigurationError(f"The horizon must be >= 1, got {horizon=}")

        self.n_arms = n_arms
        self.horizon = horizon
        self.phase = "idle"
        self.flags: set[str] = set()
        self.rng: np.random.Generator = as_rng(seed)

    def reset(self, rng: Seed | None = None) -> None:
        """Forget everything and restart with a new private stream."""
        self.rng = as_rng(rng)
        self.phase = "idle"
        self.flags = set()

    @abstractmethod
    def choose(self, personal_time: int) -> Arm | None:
        """The arm to pull at the given personal time, `1 <= personal_time <= T^j`."""
        ...

    @abstractmethod
    def observe(self, obs: Observation) -> None:
        """Feed back the observation of the last pull."""
        ...

    def is_exploiting(self) -> Arm | None:
        """The arm this player exploits until its horizon, if any."""
        return None

    def flag(self, reason: str) -> None:
        """Flag a failure of this player."""
        if reason not in self.flags:
            logger.debug(f"{self.name}: flagged {reason!r} in phase {self.phase!r}")
        self.flags.add(reason)

    @override
    def __repr__(self) -> str:
        return f"{type(self).__name__}(n_arms={self.n_arms}, horizon={self.horizon})"


class ProtocolPolicy(Policy):
    """A policy driven by a generator.

    See [`protocol()`][mmabtk.arena.ProtocolPolicy.protocol].

    The generator starts on the first call to `choose()` after a reset, and the
    arm of the next pull is computed as soon as the previous observation
    arrives. Once the generator is exhausted the policy gives no arm, which the
    arena treats as a protocol error.
    """

    _gen: Protocol | None = None
    _next: Arm | None = None

    @abstractmethod
    def protocol(self) -> Protocol:
        """The protocol of the player, from its first to its last pull."""
        ...

    @override
    def reset(self, rng: Seed | None = None) -> None:
        super().reset(rng)
        self._gen = None
        self._next = None

    @override
    def choose(self, personal_time: int) -> Arm | None:
        if self._gen is None:
            self._gen = self.protocol()
            try:
                self._next = next(self._gen)
            except StopIteration:
                self._next = None

        return self._next

    @override
    def observe(self, obs: Observation) -> None:
        if self.requires_sensing and not isinstance(obs, SensingObservation):
            raise ProtocolError(
                f"{self.name} requires Collision Sensing but got {type(obs).__name__}",
            )

        try:
            self._next = None if self._gen is None else self._gen.send(obs)
        except StopIteration:
            self._next = None
