from __future__ import annotations

from pathlib import Path
from typing import Any

import pytest
from pytest_cases import case, parametrize_with_cases

from mmabtk.arena import Feedback
from mmabtk.exceptions import ConfigurationError, UnknownPolicyError
from mmabtk.harness import ExperimentConfig
from mmabtk.harness.config import generate_means

CONFIGS = Path(__file__).parents[2] / "configs"

BASE: dict[str, Any] = {
    "horizon": 1000,
    "means": [0.9, 0.5, 0.1],
    "n_players": 2,
}


def test_linear_means() -> None:
    means = generate_means({"kind": "linear", "start": 0.9, "stop": 0.89}, 9)
    assert len(means) == 9
    assert means[0] == pytest.approx(0.9)
    assert means[-1] == pytest.approx(0.89)
    assert means == sorted(means, reverse=True)


def test_gap_means() -> None:
    means = generate_means({"kind": "gap", "start": 0.9, "gap": 0.1}, 3)
    assert means == pytest.approx([0.9, 0.8, 0.7])


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "uniform", "start": 0.1, "stop": 0.9},
        {"start": 0.1, "stop": 0.9},
        {"kind": "linear", "start": 0.1},
        {"kind": "gap", "start": 0.9, "gap": 0.1, "stop": 0.1},
    ],
)
def test_bad_generated_means(spec: dict[str, Any]) -> None:
    with pytest.raises(ConfigurationError):
        generate_means(spec, 3)


@case(tags=["invalid"])
def case_unknown_key() -> dict[str, Any]:
    return {**BASE, "players": 2}


@case(tags=["invalid"])
def case_missing_horizon() -> dict[str, Any]:
    return {"means": [0.5], "n_players": 1}


@case(tags=["invalid"])
def case_zero_runs() -> dict[str, Any]:
    return {**BASE, "runs": 0}


@case(tags=["invalid"])
def case_fractional_horizon() -> dict[str, Any]:
    return {**BASE, "horizon": 10.5}


@case(tags=["invalid"])
def case_means_do_not_match_arms() -> dict[str, Any]:
    return {**BASE, "n_arms": 4}


@case(tags=["invalid"])
def case_generated_means_without_arms() -> dict[str, Any]:
    return {**BASE, "means": {"kind": "linear", "start": 0.9, "stop": 0.1}}


@case(tags=["invalid"])
def case_no_players() -> dict[str, Any]:
    return {"horizon": 10, "means": [0.5, 0.4]}


@case(tags=["invalid"])
def case_unknown_distribution() -> dict[str, Any]:
    return {**BASE, "distribution": "gaussian"}


@case(tags=["invalid"])
def case_unknown_feedback() -> dict[str, Any]:
    return {**BASE, "feedback": "partial"}


@parametrize_with_cases("d", cases=".", has_tag="invalid")
def test_invalid_configs(d: dict[str, Any]) -> None:
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict(d)


def test_unknown_policies() -> None:
    with pytest.raises(UnknownPolicyError):
        ExperimentConfig.from_dict({**BASE, "algorithm": "ucb"})
    with pytest.raises(UnknownPolicyError):
        ExperimentConfig.from_dict({**BASE, "params": {"ucb": {"c": 2}}})


def test_invalid_instance_surfaces_when_built() -> None:
    config = ExperimentConfig.from_dict({**BASE, "n_players": 4})
    with pytest.raises(ConfigurationError):
        config.instance()


@pytest.mark.parametrize(
    ("algorithm", "feedback", "expected"),
    [
        ("sic-mmab", None, Feedback.COLLISION_SENSING),
        ("sic-mmab2", None, Feedback.NO_SENSING),
        ("dyn-mmab", None, Feedback.NO_SENSING),
        (["sic-mmab", "selfish"], None, Feedback.COLLISION_SENSING),
        ("selfish", "collision_sensing", Feedback.COLLISION_SENSING),
    ],
)
def test_feedback_mode(
    algorithm: str | list[str],
    feedback: str | None,
    expected: Feedback,
) -> None:
    config = ExperimentConfig.from_dict(
        {**BASE, "algorithm": algorithm, "feedback": feedback},
    )
    assert config.feedback_mode == expected
    assert config.instance().feedback == expected


def test_algorithms_are_distinct() -> None:
    config = ExperimentConfig.from_dict(
        {**BASE, "n_players": 3, "algorithm": ["selfish", "sic-mmab", "selfish"]},
    )
    assert config.algorithms == ("selfish", "sic-mmab")
    assert config.policy_algorithms() == ["selfish", "sic-mmab", "selfish"]


def test_dynamic_instance() -> None:
    config = ExperimentConfig.from_dict(
        {"horizon": 100, "means": [0.9, 0.5], "entries": [0, 40]},
    )
    instance = config.instance()
    assert instance.entries == (0, 40)
    assert not instance.is_static


def test_replace_skips_unset_values() -> None:
    config = ExperimentConfig.from_dict(BASE)
    changed = config.replace(runs=7, seed=None, algorithm="selfish")
    assert changed.runs == 7
    assert changed.seed == config.seed
    assert changed.algorithm == "selfish"

    with pytest.raises(ConfigurationError):
        config.replace(workers=0)


def test_json_keeps_every_field(tmp_path: Path) -> None:
    config = ExperimentConfig.from_dict(
        {
            **BASE,
            "params": {"sic-mmab": {"t0": 50}},
            "algorithm": ["sic-mmab", "sic-mmab"],
            "runs": 4,
            "seed": 9,
        },
    )
    path = config.to_json(tmp_path / "config.json")
    assert ExperimentConfig.from_json(path) == config
    assert set(config.to_dict()) == {
        "horizon",
        "means",
        "n_arms",
        "n_players",
        "entries",
        "distribution",
        "feedback",
        "algorithm",
        "params",
        "runs",
        "seed",
        "output_dir",
        "workers",
    }


def test_unreadable_json(tmp_path: Path) -> None:
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_json(tmp_path / "missing.json")

    broken = tmp_path / "broken.json"
    broken.write_text("{ not json")
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_json(broken)

    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_json(listed)


@pytest.mark.parametrize("name", ["static.json", "dynamic.json"])
def test_shipped_configs(name: str) -> None:
    config = ExperimentConfig.from_json(CONFIGS / name)
    instance = config.instance()
    assert instance.K == len(config.arm_means())
    assert all(0 <= mu <= 1 for mu in instance.means)
