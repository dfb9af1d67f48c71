from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from mmabtk.arena import BanditInstance, EpisodeTrace, pseudo_regret, resolve_round


def make_trace(instance: BanditInstance, rounds: list[dict[int, int]]) -> EpisodeTrace:
    trace = EpisodeTrace.empty(instance)
    for t, pulls in enumerate(rounds, start=1):
        result = resolve_round(instance, t, pulls, draws=np.ones(instance.K))
        trace.record(result, {j: "explore" for j in pulls})
    return trace


@pytest.fixture()
def instance() -> BanditInstance:
    return BanditInstance.create([0.9, 0.5, 0.2], 3, n_players=2)


def test_pseudo_regret_by_round(instance: BanditInstance) -> None:
    trace = make_trace(instance, [{0: 0, 1: 1}, {0: 0, 1: 0}, {0: 2, 1: 1}])
    ledger = pseudo_regret(trace, instance, {0: None, 1: 1})

    np.testing.assert_allclose(ledger.increments, [0.0, 1.4, 0.7])
    np.testing.assert_allclose(ledger.cum_regret, [0.0, 1.4, 2.1])
    assert ledger.final_regret == pytest.approx(2.1)
    np.testing.assert_array_equal(ledger.collisions, [0, 2, 0])
    assert ledger.total_collisions == 2
    np.testing.assert_allclose(ledger.at([1, 3]), [0.0, 2.1])
    assert ledger.exploited_arms() == [1]


def test_realized_regret_uses_rewards(instance: BanditInstance) -> None:
    trace = make_trace(instance, [{0: 0, 1: 1}, {0: 0, 1: 0}, {0: 2, 1: 1}])
    ledger = pseudo_regret(trace, instance)

    # Every draw is 1, so the free pulls earn 2 and the collided round 0
    np.testing.assert_allclose(ledger.realized_increments, [-0.6, 1.4, -0.6])
    np.testing.assert_allclose(ledger.realized_cum_regret, [-0.6, 0.8, 0.2])


def test_best_counts_only_active_players() -> None:
    instance = BanditInstance.create([0.9, 0.5, 0.2], 2, entries=[0, 1])
    trace = make_trace(instance, [{0: 1}, {0: 0, 1: 1}])
    ledger = pseudo_regret(trace, instance)

    np.testing.assert_allclose(ledger.increments, [0.4, 0.0])
    np.testing.assert_array_equal(ledger.collisions, [0, 0])


def test_optimal_rounds_are_exactly_zero() -> None:
    means = [0.1 * k + 0.05 for k in range(9)]
    instance = BanditInstance.create(means, 2, n_players=6)
    best_first = {j: 8 - j for j in range(6)}
    best_last = {j: 3 + j for j in range(6)}
    trace = make_trace(instance, [best_first, best_last])
    ledger = pseudo_regret(trace, instance)

    assert ledger.increments[0] == 0.0
    assert ledger.increments[1] == 0.0


def test_df_and_csv(instance: BanditInstance, tmp_path: Path) -> None:
    trace = make_trace(instance, [{0: 0, 1: 1}, {0: 0, 1: 0}, {0: 2, 1: 1}])
    ledger = pseudo_regret(trace, instance)

    df = ledger.df()
    assert list(df.columns) == ["t", "cum_regret", "collisions"]
    assert df["t"].tolist() == [1, 2, 3]

    path = ledger.to_csv(tmp_path / "nested" / "ledger.csv")
    pd.testing.assert_frame_equal(pd.read_csv(path), df)
