"""Global checks computed from a trace.

Policies never see any of this. These are the quantities that tests and the
batch reports use to verify the structural guarantees of a protocol, such
as collision-free exploitation or players agreeing on which phase they are in.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING

import numpy as np

from mmabtk.arena.trace import phase_group

if TYPE_CHECKING:
    from mmabtk.arena.instance import BanditInstance
    from mmabtk.arena.ledger import RegretLedger
    from mmabtk.arena.trace import EpisodeTrace

PHASE_GROUP_PRIORITY: tuple[str, ...] = ("init", "comm", "explore", "exploit")
"""A round is attributed to the first of these groups any active player is in."""

OTHER = "other"


def recount_collisions(trace: EpisodeTrace) -> int:
    """The number of rounds whose collision bits disagree with the pulls."""
    n = len(trace)
    K = trace.eta.shape[1]  # noqa: N806
    pulls = trace.pulls[:n]
    counts = np.zeros((n, K), dtype=int)
    rows, cols = np.nonzero(pulls >= 0)
    np.add.at(counts, (rows, pulls[rows, cols]), 1)
    recounted = (counts > 1).astype(np.int8)
    return int((recounted != trace.eta[:n]).any(axis=1).sum())


def collisions_by_phase(trace: EpisodeTrace) -> dict[str, int]:
    """The number of collided pulls made in each phase tag."""
    n = len(trace)
    collided = trace.collisions[:n] == 1
    codes = trace.phases[:n][collided]
    counts = np.bincount(codes, minlength=len(trace.phase_table))
    return {tag: int(counts[code]) for code, tag in enumerate(trace.phase_table)}


def collisions_by_group(trace: EpisodeTrace) -> dict[str, int]:
    """The number of collided pulls made in each phase group."""
    groups: dict[str, int] = {}
    for tag, count in collisions_by_phase(trace).items():
        group = phase_group(tag)
        groups[group] = groups.get(group, 0) + count
    return groups


def exploiters_per_arm(trace: EpisodeTrace, group: str = "exploit") -> np.ndarray:
    """`(T, K)` count of the players exploiting each arm in each round."""
    n = len(trace)
    K = trace.eta.shape[1]  # noqa: N806
    mask = trace.phase_mask(groups=[group])
    counts = np.zeros((n, K), dtype=int)
    rows, cols = np.nonzero(mask)
    np.add.at(counts, (rows, trace.pulls[:n][rows, cols]), 1)
    return counts


def phase_disagreements(
    trace: EpisodeTrace,
    players: Sequence[int] | None = None,
    *,
    ignore: Sequence[str] = ("exploit",),
) -> int:
    """The number of rounds where the given active players differ in phase group.

    Players in one of the `ignore` groups are left out of the comparison.
    """
    n = len(trace)
    players = list(range(trace.pulls.shape[1])) if players is None else list(players)
    groups = np.array([phase_group(tag) for tag in trace.phase_table] + [""])
    codes = trace.phases[:n][:, players].astype(int)
    named = groups[codes]  # -1 indexes the trailing "" of inactive players
    compared = (codes >= 0) & ~np.isin(named, list(ignore))

    disagreements = 0
    for row, keep in zip(named, compared, strict=True):
        if len(set(row[keep])) > 1:
            disagreements += 1
    return disagreements


def round_groups(trace: EpisodeTrace) -> np.ndarray:
    """The phase group of each round.

    A round goes to the first group of
    [`PHASE_GROUP_PRIORITY`][mmabtk.arena.analysis.PHASE_GROUP_PRIORITY] that
    any active player is in, or to `"other"`.
    """
    n = len(trace)
    table_groups = [phase_group(tag) for tag in trace.phase_table]
    round_group = np.full(n, OTHER, dtype=object)
    undecided = np.ones(n, dtype=bool)
    for group in PHASE_GROUP_PRIORITY:
        codes = [c for c, g in enumerate(table_groups) if g == group]
        hit = np.isin(trace.phases[:n], codes).any(axis=1) & undecided
        round_group[hit] = group
        undecided &= ~hit

    return round_group


def regret_by_phase(trace: EpisodeTrace, ledger: RegretLedger) -> dict[str, float]:
    """The pseudo-regret of the rounds of each phase group.

    Rounds are attributed with
    [`round_groups()`][mmabtk.arena.analysis.round_groups].
    """
    round_group = round_groups(trace)
    result = {group: 0.0 for group in (*PHASE_GROUP_PRIORITY, OTHER)}
    for group in result:
        result[group] = float(ledger.increments[round_group == group].sum())
    return result


def realized_gamma(
    trace: EpisodeTrace,
    player: int,
    until: int,
    *,
    exploring: Sequence[str] = ("explore",),
) -> float:
    """The realized multiplicative factor on the means seen by an exploring player.

    The mean over the rounds the player has played up to `until` of
    `(1 - 1/K)^(m_t - 1)`, with `m_t` the number of players exploring in round
    `t`. A free arm pulled uniformly at random by every exploring player then
    yields about this factor times its mean.

    Args:
        trace: The trace.
        player: The player, which should be exploring itself.
        until: The last round `t` of the window.
        exploring: The phase tags counted as exploring.
    """
    K = trace.eta.shape[1]  # noqa: N806
    start = trace.entries[player]
    if until <= start:
        raise ValueError(f"Player {player} has not played before round {until}")

    window = slice(start, until)
    m_t = trace.phase_mask(*exploring)[window].sum(axis=1)
    return float(np.mean((1.0 - 1.0 / K) ** np.maximum(m_t - 1, 0)))


def exploits_top_arms(
    instance: BanditInstance,
    exploit_arms: Mapping[int, int | None],
) -> bool:
    """Whether the players exploit exactly the top-M arms, one player each."""
    arms = [a for a in exploit_arms.values() if a is not None]
    if len(arms) != instance.M or len(set(arms)) != instance.M:
        return False
    top = sorted(instance.means, reverse=True)[: instance.M]
    return sorted((instance.means[a] for a in arms), reverse=True) == top
