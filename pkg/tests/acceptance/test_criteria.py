"""Monte-Carlo checks of the protocols at the scale of real experiments.

These take minutes to tens of minutes and only run with `--run-slow`. Episodes
are spread over `WORKERS` processes, either by
[`run_batch()`][mmabtk.harness.run_batch] or, when a check needs the state of
the players or the whole trace, by mapping a module level function over
[`make_executor()`][mmabtk.harness.make_executor].
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from more_itertools import run_length, triplewise

from mmabtk.arena import Arena, BanditInstance, Policy, RoundResult, run_episode
from mmabtk.arena.analysis import (
    exploiters_per_arm,
    exploits_top_arms,
    realized_gamma,
    round_groups,
)
from mmabtk.harness import ExperimentConfig, make_executor, run_batch
from mmabtk.harness.batch import RUNS_CSV, SUMMARY_JSON
from mmabtk.policies import DynMmab, SicMmab, Variant
from mmabtk.policies._protocols import musical_chairs

from ..policies.common import play_scripts

pytestmark = pytest.mark.slow

MEANS = (0.9, 0.75, 0.6, 0.45, 0.3)
WORKERS = 4

SIC_HORIZON = 100_000
SIC_RUNS = 100
REGRET_SHAPE_RUNS = 50


@dataclass
class SicOutcome:
    agreed: bool
    initialised: bool
    protected_collisions: int
    top_m: bool
    cum_regret: np.ndarray


def sic_outcome(seed: int) -> SicOutcome:
    """Play SIC-MMAB on the five arm instance and keep what the checks need."""
    instance = BanditInstance.create(MEANS, SIC_HORIZON, n_players=3)
    policies = [
        SicMmab(5, SIC_HORIZON, variant=Variant.BERNOULLI) for _ in range(3)
    ]
    trace, ledger = run_episode(instance, policies, seed=seed)

    histories = [p.state.history for p in policies]
    agreed = all(
        len({h[p] for h in histories if len(h) > p}) == 1
        for p in range(max(len(h) for h in histories))
    )
    collided = trace.collisions == 1
    return SicOutcome(
        agreed=agreed,
        initialised=not any(p.flags for p in policies),
        protected_collisions=int(
            collided[trace.phase_mask(groups=["explore", "exploit"])].sum(),
        ),
        top_m=exploits_top_arms(instance, ledger.per_player_exploit_arm),
        cum_regret=ledger.cum_regret,
    )


@pytest.fixture(scope="module")
def sic_outcomes() -> list[SicOutcome]:
    with make_executor(WORKERS) as executor:
        return list(executor.map(sic_outcome, range(SIC_RUNS)))


def test_players_share_their_view(sic_outcomes: list[SicOutcome]) -> None:
    initialised = [o for o in sic_outcomes if o.initialised]
    assert len(initialised) >= len(sic_outcomes) - 1
    assert all(o.agreed for o in initialised)
    assert all(o.protected_collisions == 0 for o in initialised)


def test_sic_mmab_outcomes_select_the_top_arms(
    sic_outcomes: list[SicOutcome],
) -> None:
    assert sum(o.top_m for o in sic_outcomes) >= 99


def test_regret_plateaus(sic_outcomes: list[SicOutcome]) -> None:
    runs = sic_outcomes[:REGRET_SHAPE_RUNS]
    cum = np.mean([o.cum_regret for o in runs], axis=0)
    horizon = len(cum)
    tenth = horizon // 10

    early = cum[tenth - 1] / tenth
    late = (cum[-1] - cum[horizon - tenth - 1]) / tenth
    assert late <= 0.05 * early
    assert cum[-1] <= 1.5 * cum[horizon // 2 - 1]


def test_initialisation_rarely_fails() -> None:
    n_arms, n_players, horizon = 10, 5, 100_000
    t0 = math.ceil(n_arms * math.log(horizon))
    instance = BanditInstance.create([0.5] * n_arms, t0, n_players=n_players)
    arms = list(range(n_arms))

    def chairs(policy: Any) -> Any:
        return musical_chairs(policy.rng, arms, t0, sensing=True)

    failures = 0
    for seed in range(10_000):
        results, _ = play_scripts(instance, [chairs] * n_players, seed=seed)
        fixed = [r.fixed for r in results]
        if None in fixed or len(set(fixed)) != n_players:
            failures += 1

    assert failures < 3


DYN_CONFIG = ExperimentConfig(
    horizon=200_000,
    means=MEANS,
    entries=(0, 1000, 2000),
    algorithm="dyn-mmab",
    params={"dyn-mmab": {"confidence_scale": 0.25}},
    runs=100,
    workers=WORKERS,
)

SELECTION_CONFIGS = {
    "sic-mmab": ExperimentConfig(
        horizon=SIC_HORIZON,
        means=MEANS,
        n_players=3,
        algorithm="sic-mmab",
        runs=100,
        workers=WORKERS,
    ),
    "sic-mmab2": ExperimentConfig(
        horizon=500_000,
        means=MEANS,
        n_players=3,
        algorithm="sic-mmab2",
        params={"sic-mmab2": {"mu_min": 0.3, "t0_constant": 100}},
        runs=100,
        workers=WORKERS,
    ),
    "dyn-mmab": DYN_CONFIG,
}


@pytest.mark.parametrize(
    ("algorithm", "min_selected"),
    [("sic-mmab", 99), ("sic-mmab2", 95), ("dyn-mmab", 95)],
)
def test_selects_the_top_arms(algorithm: str, min_selected: int) -> None:
    config = SELECTION_CONFIGS[algorithm]
    report = run_batch(config, write=False)
    assert report.n_runs == 100
    assert report.top_m_rate * report.n_runs >= min_selected


@dataclass
class Estimate:
    t: int
    player: int
    means: np.ndarray
    pulls: np.ndarray


def free_arm_violations(seed: int) -> tuple[int, int]:
    """The estimates of free arms checked in one episode, and how many were off."""
    instance = DYN_CONFIG.instance()
    policies: Sequence[DynMmab] = [
        DynMmab(instance.K, instance.personal_horizon(j), confidence_scale=0.25)
        for j in range(instance.M)
    ]
    arena = Arena(instance, policies)
    estimates: list[Estimate] = []

    @arena.on_round_resolved(every=1_000)
    def record(result: RoundResult, _: Sequence[Policy]) -> None:
        for j, policy in enumerate(policies):
            state = getattr(policy, "state", None)
            if state is None or state.fixed is not None or j not in result.pulls:
                continue
            means = np.divide(
                state.sums,
                state.pulls,
                out=np.full(instance.K, np.nan),
                where=state.pulls > 0,
            )
            estimates.append(Estimate(result.t, j, means, state.pulls.copy()))

    trace, _ = arena.run(seed=seed)
    exploited = exploiters_per_arm(trace).cumsum(axis=0)

    checked = violations = 0
    for e in estimates:
        entry = instance.entries[e.player]
        personal_t = e.t - entry
        gamma = realized_gamma(trace, e.player, e.t)
        log_t = math.log(instance.personal_horizon(e.player))
        bound = 2 * math.sqrt(6 * instance.K * log_t / personal_t)
        for k in range(instance.K):
            if exploited[e.t - 1, k] > 0 or e.pulls[k] == 0:
                continue
            checked += 1
            if abs(e.means[k] - gamma * instance.means[k]) > bound:
                violations += 1

    return checked, violations


def test_dyn_mmab_estimates_free_arms() -> None:
    with make_executor(WORKERS) as executor:
        counts = list(executor.map(free_arm_violations, range(DYN_CONFIG.runs)))

    checked = sum(c for c, _ in counts)
    violations = sum(v for _, v in counts)
    assert checked > 0
    assert violations <= 0.01 * checked


PHASE_STEP_CONFIG = ExperimentConfig(
    horizon=500_000,
    means={"kind": "linear", "start": 0.9, "stop": 0.89},
    n_arms=9,
    n_players=6,
    runs=200,
    workers=WORKERS,
)


def communication_steps(seed: int) -> tuple[int, int]:
    """The communication phases of one episode with an exploration phase on
    each side, and how many of them cost more per round than those two.
    """
    instance = PHASE_STEP_CONFIG.instance()
    policies = [
        SicMmab(instance.K, instance.horizon, variant=Variant.BERNOULLI)
        for _ in range(instance.M)
    ]
    trace, ledger = run_episode(instance, policies, seed=seed)

    # (group, regret, rounds) of each maximal run of rounds in one group
    blocks = []
    start = 0
    for group, length in run_length.encode(round_groups(trace)):
        regret = float(ledger.increments[start : start + length].sum())
        blocks.append((group, regret, length))
        start += length

    checked = steps = 0
    for before, comm, after in triplewise(blocks):
        if comm[0] != "comm" or before[0] != "explore" or after[0] != "explore":
            continue
        checked += 1
        explore_rate = (before[1] + after[1]) / (before[2] + after[2])
        if comm[1] / comm[2] > explore_rate:
            steps += 1

    return checked, steps


def test_phase_alternation_shows_in_the_regret() -> None:
    seeds = range(PHASE_STEP_CONFIG.runs)
    with make_executor(PHASE_STEP_CONFIG.workers) as executor:
        counts = list(executor.map(communication_steps, seeds))

    checked = sum(c for c, _ in counts)
    steps = sum(s for _, s in counts)
    assert all(c > 0 for c, _ in counts)
    assert steps >= 0.99 * checked


def test_rerun_writes_the_same_bytes(tmp_path: Path) -> None:
    config = ExperimentConfig(
        horizon=100_000,
        means=MEANS,
        n_players=3,
        runs=4,
        seed=42,
    )
    run_batch(config, output_dir=tmp_path / "sequential")
    run_batch(config.replace(workers=2), output_dir=tmp_path / "pool")

    for name in (RUNS_CSV, SUMMARY_JSON):
        sequential = (tmp_path / "sequential" / name).read_bytes()
        pooled = (tmp_path / "pool" / name).read_bytes()
        if name == SUMMARY_JSON:
            # The number of workers is part of the written config
            sequential = sequential.replace(b'"workers": 1', b'"workers": 2')
        assert sequential == pooled
