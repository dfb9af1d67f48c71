"""The simulator: instances, rounds, the player contract, episodes and regret."""
from __future__ import annotations

from mmabtk.arena.episode import Arena, run_episode
from mmabtk.arena.events import Emitter, Event, Handler, Subscriber
from mmabtk.arena.instance import BanditInstance, Distribution, Feedback
from mmabtk.arena.ledger import RegretLedger, pseudo_regret
from mmabtk.arena.policy import Policy, Protocol, ProtocolPolicy
from mmabtk.arena.rounds import (
    Observation,
    RoundResult,
    SensingObservation,
    feedback_view,
    resolve_round,
)
from mmabtk.arena.trace import EpisodeTrace, PhaseEvent, phase_group

__all__ = [
    "Arena",
    "run_episode",
    "Emitter",
    "Event",
    "Handler",
    "Subscriber",
    "BanditInstance",
    "Distribution",
    "Feedback",
    "RegretLedger",
    "pseudo_regret",
    "Policy",
    "Protocol",
    "ProtocolPolicy",
    "Observation",
    "RoundResult",
    "SensingObservation",
    "feedback_view",
    "resolve_round",
    "EpisodeTrace",
    "PhaseEvent",
    "phase_group",
]
