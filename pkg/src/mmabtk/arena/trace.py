"""The full record of an episode, stored column-wise."""
from __future__ import annotations

import json
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, NamedTuple, overload
from typing_extensions import override

import numpy as np
import pandas as pd

from mmabtk.arena.rounds import RoundResult

if TYPE_CHECKING:
    from mmabtk.arena.instance import BanditInstance


class PhaseEvent(NamedTuple):
    """One pull of one player, annotated with the phase it was made in."""

    t: int
    player: int
    phase: str
    arm: int
    reward: float
    eta: int


def phase_group(tag: str) -> str:
    """The group of a phase tag, the part before the first `/`."""
    return tag.split("/", 1)[0]


@dataclass
class EpisodeTrace(Sequence[RoundResult]):
    """Every round of an episode.

    Player columns hold `-1` in the pull, collision and phase arrays for the
    rounds a player has not entered yet.

    ```python
    trace, ledger = run_episode(instance, policies, seed=0)
    first: RoundResult = trace[0]  # round t=1
    assert len(trace) == instance.horizon
    ```

    Attributes:
        entries: The entry time of every player.
        pulls: `(T, M)` pulled arms.
        rewards: `(T, M)` rewards, 0 for inactive players.
        collisions: `(T, M)` collision bits of the pulled arms.
        raw_draws: `(T, K)` draws of every arm.
        eta: `(T, K)` collision bits of every arm.
        phases: `(T, M)` codes into `phase_table`.
        phase_table: The phase tags seen in this episode.
    """

    entries: tuple[int, ...]
    pulls: np.ndarray
    rewards: np.ndarray
    collisions: np.ndarray
    raw_draws: np.ndarray
    eta: np.ndarray
    phases: np.ndarray
    phase_table: list[str] = field(default_factory=list)
    n_recorded: int = 0

    @classmethod
    def empty(cls, instance: BanditInstance) -> EpisodeTrace:
        """An empty trace to record the episode of an instance into."""
        T, M, K = instance.horizon, instance.M, instance.K  # noqa: N806
        return cls(
            entries=instance.entries,
            pulls=np.full((T, M), -1, dtype=np.int32),
            rewards=np.zeros((T, M), dtype=float),
            collisions=np.full((T, M), -1, dtype=np.int8),
            raw_draws=np.zeros((T, K), dtype=float),
            eta=np.zeros((T, K), dtype=np.int8),
            phases=np.full((T, M), -1, dtype=np.int16),
        )

    def phase_code(self, tag: str) -> int:
        """The code of a phase tag, registering it if new."""
        try:
            return self.phase_table.index(tag)
        except ValueError:
            self.phase_table.append(tag)
            return len(self.phase_table) - 1

    def record(self, result: RoundResult, phases: dict[int, str]) -> None:
        """Record the next round with the phase each player pulled in."""
        i = result.t - 1
        assert i == self.n_recorded, f"Round {result.t} recorded out of order"

        self.raw_draws[i] = result.raw_draws
        self.eta[i] = result.eta
        for j, arm in result.pulls.items():
            self.pulls[i, j] = arm
            self.rewards[i, j] = result.rewards[j]
            self.collisions[i, j] = result.eta[arm]
            self.phases[i, j] = self.phase_code(phases[j])

        self.n_recorded += 1

    @property
    def horizon(self) -> int:
        """The number of rounds the trace has room for."""
        return len(self.pulls)

    @property
    def active(self) -> np.ndarray:
        """`(T, M)` mask of the players active in each round."""
        return self.pulls[: self.n_recorded] >= 0

    def phase_mask(self, *tags: str, groups: Sequence[str] = ()) -> np.ndarray:
        """`(T, M)` mask of the pulls made in one of the given phases or groups."""
        codes = [
            code
            for code, tag in enumerate(self.phase_table)
            if tag in tags or phase_group(tag) in groups
        ]
        return np.isin(self.phases[: self.n_recorded], codes)

    def phase_of(self, t: int, player: int) -> str | None:
        """The phase tag of a player in round `t`, `None` if inactive."""
        code = int(self.phases[t - 1, player])
        return None if code < 0 else self.phase_table[code]

    @overload
    def __getitem__(self, index: int) -> RoundResult:
        ...

    @overload
    def __getitem__(self, index: slice) -> list[RoundResult]:
        ...

    @override
    def __getitem__(self, index: int | slice) -> RoundResult | list[RoundResult]:
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]

        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(f"Round index {index} out of range for {len(self)} rounds")

        players = np.flatnonzero(self.pulls[index] >= 0)
        return RoundResult(
            t=index + 1,
            pulls={int(j): int(self.pulls[index, j]) for j in players},
            raw_draws=tuple(float(x) for x in self.raw_draws[index]),
            eta=tuple(int(e) for e in self.eta[index]),
            rewards={int(j): float(self.rewards[index, j]) for j in players},
        )

    @override
    def __len__(self) -> int:
        return self.n_recorded

    def phase_events(self) -> Iterator[PhaseEvent]:
        """Every pull of the episode with its phase, by round then player."""
        for i, j in zip(*np.nonzero(self.pulls[: self.n_recorded] >= 0), strict=True):
            yield PhaseEvent(
                t=int(i) + 1,
                player=int(j),
                phase=self.phase_table[self.phases[i, j]],
                arm=int(self.pulls[i, j]),
                reward=float(self.rewards[i, j]),
                eta=int(self.collisions[i, j]),
            )

    def df(self) -> pd.DataFrame:
        """The pulls in long format, one row per active player and round.

        Columns are `t, player, phase, arm, reward, eta`.
        """
        return pd.DataFrame(list(self.phase_events()), columns=list(PhaseEvent._fields))

    def to_jsonl(self, path: str | Path) -> Path:
        """Write one round per line, with the phase of every pulling player."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as f:
            for i, result in enumerate(self):
                line: dict[str, Any] = result.to_dict()
                line["phases"] = {
                    str(j): self.phase_table[self.phases[i, j]] for j in result.pulls
                }
                f.write(json.dumps(line) + "\n")

        return path
