from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from mmabtk.arena import BanditInstance, ProtocolPolicy
from mmabtk.arena.rounds import Observation, SensingObservation
from mmabtk.policies._protocols import (
    ChairsResult,
    HopCursor,
    SubProtocol,
    accept_reject_positions,
    bernoulli_radius,
    general_radius,
    is_free,
    musical_chairs,
)

from .common import play_scripts


def test_is_free() -> None:
    assert is_free(SensingObservation(0.0, 1, 0), sensing=True)
    assert not is_free(SensingObservation(1.0, 1, 1), sensing=True)
    assert is_free(Observation(0.3, 1), sensing=False)
    assert not is_free(Observation(0.0, 1), sensing=False)


@pytest.mark.parametrize("feedback", ["collision_sensing", "no_sensing"])
@pytest.mark.parametrize("seed", range(5))
def test_musical_chairs_reaches_orthogonal_setting(feedback: str, seed: int) -> None:
    duration = 100
    instance = BanditInstance.create(
        [1.0] * 5,
        duration,
        n_players=3,
        feedback=feedback,
    )

    sensing = feedback == "collision_sensing"

    def script(policy: ProtocolPolicy) -> SubProtocol[ChairsResult]:
        return musical_chairs(policy.rng, range(5), duration, sensing=sensing)

    results, trace = play_scripts(instance, [script] * 3, seed=seed)

    fixed = [r.fixed for r in results]
    assert None not in fixed
    assert len(set(fixed)) == 3
    assert [r.last for r in results] == fixed
    # Once every player fixed, nobody collides anymore
    assert trace.eta[-10:].sum() == 0


def test_musical_chairs_without_any_free_pull() -> None:
    instance = BanditInstance.create([0.0, 0.0], 10, n_players=1, feedback="no_sensing")

    def script(policy: ProtocolPolicy) -> SubProtocol[ChairsResult]:
        return musical_chairs(policy.rng, [0, 1], 10, sensing=False)

    (result,), trace = play_scripts(instance, [script])
    assert result.fixed is None
    assert result.last == trace.pulls[-1, 0]


def test_empty_musical_chairs() -> None:
    gen = musical_chairs(np.random.default_rng(0), [0, 1], 0, sensing=True)
    with pytest.raises(StopIteration) as stop:
        next(gen)
    assert stop.value.value == ChairsResult(None, None)


def test_hop_cursor() -> None:
    cursor = HopCursor.on([2, 5, 7], 5)
    assert cursor.arm == 5

    seen = []
    for _ in range(4):
        cursor.advance()
        seen.append(cursor.arm)
    assert seen == [7, 2, 5, 7]

    cursor.advance(5)
    assert cursor.arm == 5


def test_hop_cursors_starting_apart_never_meet() -> None:
    arms = [0, 3, 4, 6]
    cursors = [HopCursor.on(arms, a) for a in (3, 6, 0)]
    for _ in range(50):
        assert len({c.arm for c in cursors}) == 3
        for c in cursors:
            c.advance()


def test_radii() -> None:
    pulls = np.array([0, 1, 8])
    horizon = 1000
    log_t = math.log(horizon)

    general = general_radius(pulls, horizon)
    assert general[0] == np.inf
    assert general[1] == pytest.approx(3 * math.sqrt(log_t / 2))
    assert general[2] == pytest.approx(3 * math.sqrt(log_t / 16))

    bernoulli = bernoulli_radius(pulls, horizon)
    assert bernoulli[0] == np.inf
    assert bernoulli[2] == pytest.approx(math.sqrt(2 * log_t / 8))


def test_accept_reject_with_wide_intervals_decides_nothing() -> None:
    means = np.array([0.9, 0.5, 0.1])
    assert accept_reject_positions(means, np.full(3, 0.5), 1) == ([], [])
    assert accept_reject_positions(means, np.full(3, np.inf), 2) == ([], [])


def test_accept_reject_partial() -> None:
    # The top arm is sure, the two others overlap
    means = np.array([0.2, 0.9, 0.25])
    radii = np.array([0.05, 0.05, 0.05])
    assert accept_reject_positions(means, radii, 2) == ([1], [])
    assert accept_reject_positions(means, radii, 1) == ([1], [0, 2])


def test_accept_reject_matches_sorting_with_exact_means() -> None:
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n_arms = int(rng.integers(1, 9))
        n_players = int(rng.integers(1, n_arms + 1))
        means = rng.permutation(np.linspace(0.05, 0.95, n_arms))

        accepted, rejected = accept_reject_positions(means, np.zeros(n_arms), n_players)

        top = sorted(np.argsort(-means)[:n_players].tolist())
        assert accepted == top
        assert rejected == sorted(set(range(n_arms)) - set(top))


def test_accept_reject_exhaustive_small() -> None:
    means = np.array([0.1, 0.4, 0.7, 0.9])
    for order in itertools.permutations(range(4)):
        shuffled = means[list(order)]
        for n_players in range(1, 5):
            accepted, _ = accept_reject_positions(shuffled, np.zeros(4), n_players)
            best = sorted(means[-n_players:].tolist())
            assert sorted(shuffled[accepted].tolist()) == best
