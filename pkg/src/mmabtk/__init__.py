from mmabtk import options
from mmabtk.arena import (
    Arena,
    BanditInstance,
    Distribution,
    EpisodeTrace,
    Feedback,
    Observation,
    Policy,
    ProtocolPolicy,
    RegretLedger,
    RoundResult,
    SensingObservation,
    run_episode,
)
from mmabtk.exceptions import ConfigurationError, ProtocolError, UnknownPolicyError
from mmabtk.harness import AggregateReport, ExperimentConfig, run_batch
from mmabtk.policies import DynMmab, Pinned, Selfish, SicMmab, SicMmab2, make_policies

__all__ = [
    "AggregateReport",
    "Arena",
    "BanditInstance",
    "ConfigurationError",
    "Distribution",
    "DynMmab",
    "EpisodeTrace",
    "ExperimentConfig",
    "Feedback",
    "make_policies",
    "Observation",
    "options",
    "Pinned",
    "Policy",
    "ProtocolError",
    "ProtocolPolicy",
    "RegretLedger",
    "RoundResult",
    "run_batch",
    "run_episode",
    "Selfish",
    "SensingObservation",
    "SicMmab",
    "SicMmab2",
    "UnknownPolicyError",
]
