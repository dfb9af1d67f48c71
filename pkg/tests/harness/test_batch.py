from __future__ import annotations

from pathlib import Path
from types import SimpleNamespace

import pandas as pd
import pytest

from mmabtk.arena import BanditInstance, run_episode
from mmabtk.exceptions import ConfigurationError, ProtocolError
from mmabtk.harness import (
    AggregateReport,
    ExperimentConfig,
    checkpoint_grid,
    read_report,
    run_batch,
    run_one,
)
from mmabtk.harness.batch import RUNS_CSV, SUMMARY_JSON, initialisation_flags
from mmabtk.options import set_option
from mmabtk.policies import make_policies
from mmabtk.randomness import derive_seed


@pytest.fixture
def config() -> ExperimentConfig:
    return ExperimentConfig(
        horizon=3_000,
        means=(0.9, 0.6, 0.2),
        n_players=2,
        algorithm="sic-mmab",
        params={"sic-mmab": {"t0": 100}},
        runs=3,
        seed=5,
    )


@pytest.mark.parametrize(
    ("horizon", "base", "expected"),
    [
        (1, 2, [1]),
        (8, 2, [1, 2, 4, 8]),
        (1000, 2, [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000]),
        (1000, 10, [1, 10, 100, 1000]),
        (1001, 10, [1, 10, 100, 1000, 1001]),
    ],
)
def test_checkpoint_grid(horizon: int, base: int, expected: list[int]) -> None:
    assert checkpoint_grid(horizon, base) == expected


def test_checkpoint_grid_option() -> None:
    set_option("checkpoint_base", 10)
    assert checkpoint_grid(100) == [1, 10, 100]

    with pytest.raises(ValueError, match="base"):
        checkpoint_grid(100, 1)


def test_a_run_is_the_episode_of_its_derived_seed(config: ExperimentConfig) -> None:
    summary = run_one(config, 0)

    instance = config.instance()
    policies = make_policies(instance, config.policy_algorithms(), config.params)
    seed = derive_seed(config.seed, "run", 0)
    _, ledger = run_episode(instance, policies, seed)

    assert summary.seed == seed
    assert summary.checkpoints == tuple(checkpoint_grid(3_000))
    assert summary.final_regret == ledger.final_regret
    assert list(summary.regret) == ledger.at(summary.checkpoints).tolist()
    assert summary.exploited_arms == tuple(ledger.exploited_arms())


def test_runs_differ_by_seed(config: ExperimentConfig) -> None:
    seeds = {run_one(config, i).seed for i in range(3)}
    assert len(seeds) == 3


def test_single_run_batch_matches_the_episode(config: ExperimentConfig) -> None:
    single = config.replace(runs=1)
    report = run_batch(single, write=False)
    expected = run_one(single, 0)
    assert report.n_runs == 1
    assert report.final_regret_mean == expected.final_regret
    assert report.final_regret_std == 0
    assert report.mean_regret == list(expected.regret)


def test_rerun_is_byte_identical(config: ExperimentConfig, tmp_path: Path) -> None:
    first = run_batch(config, output_dir=tmp_path / "a")
    second = run_batch(config, output_dir=tmp_path / "b")
    assert first == second

    for name in (RUNS_CSV, SUMMARY_JSON):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b, f"{name} differs between reruns"


def test_written_files(config: ExperimentConfig, tmp_path: Path) -> None:
    report = run_batch(config, output_dir=tmp_path)

    runs = pd.read_csv(tmp_path / RUNS_CSV)
    assert list(runs.columns) == ["run_id", "t", "cum_regret", "collisions", "phase"]
    assert sorted(set(runs["run_id"])) == [0, 1, 2]
    assert len(runs) == 3 * len(checkpoint_grid(config.horizon))

    assert read_report(tmp_path) == report


def test_aggregation_follows_run_ids(config: ExperimentConfig) -> None:
    runs = [run_one(config, i) for i in range(config.runs)]
    checkpoints = checkpoint_grid(config.horizon)
    report = run_batch(config, write=False)
    assert report == AggregateReport.from_runs(runs[::-1], checkpoints)


def test_protocol_error_stops_the_batch(config: ExperimentConfig) -> None:
    # SIC-MMAB needs the collision bit
    broken = config.replace(feedback="no_sensing")
    with pytest.raises(ProtocolError):
        run_batch(broken, write=False)


def test_bad_config_fails_before_any_run(tmp_path: Path) -> None:
    config = ExperimentConfig(
        horizon=100,
        means=(0.9, 0.5),
        n_players=3,
        output_dir=str(tmp_path),
    )
    with pytest.raises(ConfigurationError):
        run_batch(config)
    assert not (tmp_path / SUMMARY_JSON).exists()


def _players(totals: list[int], ranks: list[int]) -> list[SimpleNamespace]:
    return [
        SimpleNamespace(state=SimpleNamespace(n_players_total=m, internal_rank=r))
        for m, r in zip(totals, ranks, strict=True)
    ]


def test_initialisation_flags() -> None:
    instance = BanditInstance.create([0.9, 0.5, 0.1], 10, n_players=2)

    good = _players(totals=[2, 2], ranks=[2, 1])
    assert initialisation_flags(instance, good) == set()  # type: ignore[arg-type]

    bad = _players(totals=[2, 3], ranks=[1, 1])
    assert initialisation_flags(instance, bad) == {  # type: ignore[arg-type]
        "m-misestimated",
        "ranks-not-distinct",
    }

    stateless = [SimpleNamespace(), SimpleNamespace()]
    assert initialisation_flags(instance, stateless) == set()  # type: ignore[arg-type]

    dynamic = BanditInstance.create([0.9, 0.5, 0.1], 10, entries=[0, 5])
    assert initialisation_flags(dynamic, bad) == set()  # type: ignore[arg-type]
