from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Any

from typing_extensions import override

from mmabtk.arena import BanditInstance, EpisodeTrace, ProtocolPolicy, run_episode
from mmabtk.arena.policy import Protocol
from mmabtk.policies._protocols import SubProtocol

Script = Callable[[ProtocolPolicy], SubProtocol[Any]]


class Scripted(ProtocolPolicy):
    """Runs one sub-protocol and keeps what it returns.

    The horizon should be the exact length of the sub-protocol.
    """

    name = "scripted"

    def __init__(self, n_arms: int, horizon: int, script: Script) -> None:
        super().__init__(n_arms, horizon)
        self.script = script
        self.result: Any = None

    @override
    def protocol(self) -> Protocol:
        self.phase = "script"
        self.result = yield from self.script(self)


def play_scripts(
    instance: BanditInstance,
    scripts: Sequence[Script],
    seed: int = 0,
) -> tuple[list[Any], EpisodeTrace]:
    """Play one script per player and return what each returned."""
    policies = [Scripted(instance.K, instance.horizon, script) for script in scripts]
    trace, _ = run_episode(instance, policies, seed=seed)
    return [p.result for p in policies], trace
