"""The protocols a player can follow."""
from __future__ import annotations

from mmabtk.policies.baselines import Pinned, Selfish, oracle_static
from mmabtk.policies.dyn_mmab import DynMmab, DynPlayerState
from mmabtk.policies.registry import (
    POLICIES,
    known_policies,
    make_policies,
    make_policy,
)
from mmabtk.policies.sic_mmab import SicMmab, SicPhase, SicPlayerState, Variant
from mmabtk.policies.sic_mmab2 import Sic2Phase, Sic2PlayerState, SicMmab2

__all__ = [
    "Pinned",
    "Selfish",
    "oracle_static",
    "DynMmab",
    "DynPlayerState",
    "POLICIES",
    "known_policies",
    "make_policies",
    "make_policy",
    "SicMmab",
    "SicPhase",
    "SicPlayerState",
    "Variant",
    "Sic2Phase",
    "Sic2PlayerState",
    "SicMmab2",
]
