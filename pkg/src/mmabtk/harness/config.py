"""The configuration of an experiment.

An experiment is a set of `runs` episodes of one instance, each played with
the same algorithms under a seed derived from the master `seed`. It is read
from JSON, where the means are either listed or generated:

```json
{
    "n_arms": 9,
    "n_players": 6,
    "horizon": 500000,
    "means": {"kind": "linear", "start": 0.9, "stop": 0.89},
    "distribution": "bernoulli",
    "algorithm": "sic-mmab",
    "runs": 200,
    "seed": 0
}
```

* `#!python {"kind": "linear", "start": a, "stop": b}` spaces the `n_arms`
    means evenly from `a` to `b`.
* `#!python {"kind": "gap", "start": a, "gap": d}` gives arm `k` the mean
    `a - d k`, so that consecutive arms are `d` apart.
"""
from __future__ import annotations

import dataclasses
import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any
from typing_extensions import Self

import numpy as np

from mmabtk.arena.instance import BanditInstance, Distribution, Feedback
from mmabtk.exceptions import ConfigurationError, UnknownPolicyError
from mmabtk.policies.registry import known_policies
from mmabtk.policies.sic_mmab import SicMmab

logger = logging.getLogger(__name__)

MEANS_KINDS: dict[str, tuple[str, ...]] = {
    "linear": ("start", "stop"),
    "gap": ("start", "gap"),
}
"""The generated means and the keys each of them needs."""


def generate_means(spec: Mapping[str, Any], n_arms: int) -> list[float]:
    """The means described by a generator entry of a config."""
    kind = spec.get("kind")
    if kind not in MEANS_KINDS:
        raise ConfigurationError(
            f"Unknown means kind {kind!r}, use one of {list(MEANS_KINDS)}"
        )

    expected = {"kind", *MEANS_KINDS[kind]}
    if set(spec) != expected:
        raise ConfigurationError(
            f"Means of kind {kind!r} take exactly {sorted(expected)}"
        )

    match kind:
        case "linear":
            means = np.linspace(spec["start"], spec["stop"], n_arms)
        case "gap":
            means = spec["start"] - spec["gap"] * np.arange(n_arms)
        case _:
            raise ConfigurationError(f"Unknown means kind {kind!r}")

    return [float(mu) for mu in means]


def _freeze(value: Any) -> Any:
    match value:
        case Mapping():
            return {k: _freeze(v) for k, v in value.items()}
        case list() | tuple():
            return tuple(_freeze(v) for v in value)
        case _:
            return value


def _thaw(value: Any) -> Any:
    match value:
        case Mapping():
            return {k: _thaw(v) for k, v in value.items()}
        case tuple() | list():
            return [_thaw(v) for v in value]
        case _:
            return value


@dataclass(frozen=True, kw_only=True)
class ExperimentConfig:
    """The configuration of an experiment.

    Attributes:
        horizon: The horizon `T`.
        means: The arm means, or a generator of them, see the module docs.
        n_arms: The number of arms, required for generated means.
        n_players: The number of players of a static instance.
        entries: The entry times of the players, for a dynamic instance.
        distribution: The reward family, `"bernoulli"` or `"beta"`.
        feedback: The feedback regime. Defaults to Collision Sensing when
            any player runs `"sic-mmab"` and to No Sensing otherwise.
        algorithm: The policy of every player, or one per player.
        params: The parameters of each policy, by policy name.
        runs: The number of episodes `R`.
        seed: The master seed.
        output_dir: Where the results are written.
        workers: The number of processes the runs are spread over.
    """

    horizon: int
    means: tuple[float, ...] | Mapping[str, Any]
    n_arms: int | None = None
    n_players: int | None = None
    entries: tuple[int, ...] | None = None
    distribution: str = Distribution.BERNOULLI.value
    feedback: str | None = None
    algorithm: str | tuple[str, ...] = SicMmab.name
    params: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    runs: int = 1
    seed: int = 0
    output_dir: str = "results"
    workers: int = 1

    def __post_init__(self) -> None:
        for name in ("horizon", "runs", "workers"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigurationError(
                    f"`{name}` must be a positive integer, got {value!r}"
                )

        if not isinstance(self.means, Mapping):
            if self.n_arms is not None and self.n_arms != len(self.means):
                raise ConfigurationError(
                    f"{self.n_arms=} does not match the {len(self.means)} means given",
                )
        elif self.n_arms is None:
            raise ConfigurationError("Generated means need `n_arms`.")

        if self.n_players is None and self.entries is None:
            raise ConfigurationError("Give either `n_players` or `entries`.")

        known = known_policies()
        for name in self.algorithms:
            if name not in known:
                raise UnknownPolicyError(name, known)

        unknown_params = set(self.params) - set(known)
        if unknown_params:
            raise UnknownPolicyError(sorted(unknown_params)[0], known)

        try:
            Distribution(self.distribution)
            if self.feedback is not None:
                Feedback(self.feedback)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

    @property
    def algorithms(self) -> tuple[str, ...]:
        """The distinct algorithm names used."""
        if isinstance(self.algorithm, str):
            return (self.algorithm,)
        return tuple(dict.fromkeys(self.algorithm))

    @property
    def feedback_mode(self) -> Feedback:
        """The feedback regime, with the default filled in."""
        if self.feedback is not None:
            return Feedback(self.feedback)
        if SicMmab.name in self.algorithms:
            return Feedback.COLLISION_SENSING
        return Feedback.NO_SENSING

    def arm_means(self) -> list[float]:
        """The means of the arms."""
        if isinstance(self.means, Mapping):
            assert self.n_arms is not None
            return generate_means(self.means, self.n_arms)
        return [float(mu) for mu in self.means]

    def instance(self) -> BanditInstance:
        """The instance played by every run.

        Raises:
            ConfigurationError: If the instance is invalid.
        """
        return BanditInstance.create(
            self.arm_means(),
            self.horizon,
            n_players=self.n_players,
            entries=self.entries,
            feedback=self.feedback_mode,
            distribution=self.distribution,
        )

    def policy_algorithms(self) -> str | list[str]:
        """The algorithms in the form taken by
        [`make_policies()`][mmabtk.policies.make_policies].
        """
        if isinstance(self.algorithm, str):
            return self.algorithm
        return list(self.algorithm)

    def replace(self, **changes: Any) -> Self:
        """A copy with the given fields changed, skipping those given as `None`.

        This is how command line flags override the values of a file.
        """
        changes = {k: _freeze(v) for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Self:
        """Create a config from its dictionary form.

        Raises:
            ConfigurationError: If a key is unknown or a value invalid.
        """
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise ConfigurationError(f"Unknown config keys {sorted(unknown)}")

        missing = {"horizon", "means"} - set(d)
        if missing:
            raise ConfigurationError(f"Missing config keys {sorted(missing)}")

        return cls(**{k: _freeze(v) for k, v in d.items()})

    def to_dict(self) -> dict[str, Any]:
        """The config as a JSON compatible dictionary, with every key."""
        return {f.name: _thaw(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_json(cls, path: str | Path) -> Self:
        """Read a config from a JSON file.

        Raises:
            ConfigurationError: If the file can not be read as a config.
        """
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Could not read a config from {path}: {e}") from e

        if not isinstance(d, dict):
            raise ConfigurationError(f"Expected a JSON object in {path}")

        return cls.from_dict(d)

    def to_json(self, path: str | Path) -> Path:
        """Write the config to a JSON file."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path
