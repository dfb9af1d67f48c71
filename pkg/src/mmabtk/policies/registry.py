"""Looking up policies by name and creating one per player of an instance."""
from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING, Any

from mmabtk.arena.instance import Distribution
from mmabtk.exceptions import ConfigurationError, UnknownPolicyError
from mmabtk.policies.baselines import Selfish, oracle_static
from mmabtk.policies.dyn_mmab import DynMmab
from mmabtk.policies.sic_mmab import SicMmab, Variant
from mmabtk.policies.sic_mmab2 import SicMmab2

if TYPE_CHECKING:
    from mmabtk.arena.instance import BanditInstance
    from mmabtk.arena.policy import Policy

logger = logging.getLogger(__name__)

ORACLE = "oracle"

POLICIES: dict[str, type[Policy]] = {
    SicMmab.name: SicMmab,
    SicMmab2.name: SicMmab2,
    DynMmab.name: DynMmab,
    Selfish.name: Selfish,
}
"""The registered policies by name. The oracle is created with
[`oracle_static()`][mmabtk.policies.oracle_static] as it needs the means."""


def known_policies() -> list[str]:
    """The names that can be used in an experiment."""
    return [*POLICIES, ORACLE]


def make_policy(name: str, n_arms: int, horizon: int, **params: Any) -> Policy:
    """Create a registered policy.

    Args:
        name: The name of the policy.
        n_arms: The number of arms.
        horizon: The personal horizon of the player.
        **params: The parameters of the policy.

    Raises:
        UnknownPolicyError: If no policy has that name.
        ConfigurationError: If the parameters do not fit the policy.
    """
    cls = POLICIES.get(name)
    if cls is None:
        raise UnknownPolicyError(name, known_policies())

    try:
        return cls(n_arms, horizon, **params)
    except TypeError as e:
        raise ConfigurationError(f"Bad parameters {params} for {name!r}: {e}") from e


def default_params(name: str, instance: BanditInstance) -> dict[str, Any]:
    """The parameters a policy gets from the instance unless given.

    SIC-MMAB uses the Bernoulli radius on Bernoulli instances, SIC-MMAB2 is
    given the smallest mean as its known lower bound.
    """
    match name:
        case SicMmab.name:
            bernoulli = instance.distribution == Distribution.BERNOULLI
            return {"variant": Variant.BERNOULLI if bernoulli else Variant.GENERAL}
        case SicMmab2.name:
            return {"mu_min": instance.mu_min}
        case _:
            return {}


def make_policies(
    instance: BanditInstance,
    algorithms: str | Sequence[str],
    params: Mapping[str, Mapping[str, Any]] | None = None,
) -> list[Policy]:
    """Create one policy per player of an instance.

    Args:
        instance: The instance to play.
        algorithms: One name for every player, or a name per player.
        params: Parameters by policy name, over the defaults of the instance.

    Returns:
        The policies, in player order.
    """
    if isinstance(algorithms, str):
        names = [algorithms] * instance.M
    else:
        names = list(algorithms)
    if len(names) != instance.M:
        raise ConfigurationError(
            f"Got {len(names)} algorithms for {instance.M} players"
        )

    params = params or {}
    if ORACLE in names:
        if any(name != ORACLE for name in names):
            raise ConfigurationError("The oracle plays all players or none.")
        return list(oracle_static(instance))

    return [
        make_policy(
            name,
            instance.K,
            instance.personal_horizon(j),
            **{**default_params(name, instance), **params.get(name, {})},
        )
        for j, name in enumerate(names)
    ]
