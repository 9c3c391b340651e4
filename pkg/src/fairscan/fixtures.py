"""Deterministic synthetic cohorts for regression testing.

Two generators: a masking cohort whose groups share (near-)equal means while
users inside each group are spread wide apart, so group-level fairness looks
far better than individual-level fairness; and a refinement chain of nested
partitions over one fixed score vector, along which between-group unfairness
can only rise.

Scores use two-point spreads so every group mean is exact by construction
and every expected measure value is hand-computable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError
from .grouping import GroupedScores


@dataclass(frozen=True)
class SyntheticCohortSpec:
    group_sizes: tuple[int, ...]
    group_means: tuple[float, ...]
    spread: float = 0.9  # two-point gap: members sit at mean +/- spread/2
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.group_sizes) != len(self.group_means) or len(self.group_sizes) < 2:
            raise ParameterError("need >= 2 groups with one mean per size")
        if any(s < 1 for s in self.group_sizes):
            raise ParameterError("group sizes must be positive")
        if self.spread < 0:
            raise ParameterError("spread must be >= 0")


#: Two groups with similar means but maximal feasible within-group spread.
DEFAULT_MASKING_SPEC = SyntheticCohortSpec(
    group_sizes=(11, 901), group_means=(0.546, 0.471), spread=0.9, seed=0
)


@dataclass(frozen=True)
class MaskingCohort:
    scores: dict[str, float]
    attributes: dict[str, dict[str, str]]
    group_labels: tuple[str, ...]

    def grouped(self) -> GroupedScores:
        groups: dict[str, list[float]] = {}
        members: dict[str, list[str]] = {}
        for user_id in sorted(self.scores):
            label = self.attributes[user_id]["group"]
            groups.setdefault(label, []).append(self.scores[user_id])
            members.setdefault(label, []).append(user_id)
        return GroupedScores(groups, members=members)


def _two_point(n: int, mean: float, spread: float) -> list[float]:
    lo, hi = mean - spread / 2, mean + spread / 2
    if lo < 0 or hi > 1:
        raise InputError(
            f"spread {spread} infeasible for mean {mean}: scores must stay in [0, 1]"
        )
    pairs = n // 2
    values = [lo] * pairs + [hi] * pairs
    if n % 2:
        values.append(mean)  # odd member sits at the mean, keeping it exact
    return values


def generate_masking_cohort(spec: SyntheticCohortSpec = DEFAULT_MASKING_SPEC) -> MaskingCohort:
    """Cohort whose group means mask large within-group dispersion.

    Group means are realized exactly; a fixed seed only shuffles which user
    receives which of the two point values.
    """
    rng = np.random.default_rng(spec.seed)
    scores: dict[str, float] = {}
    attributes: dict[str, dict[str, str]] = {}
    labels = tuple(f"g{i + 1}" for i in range(len(spec.group_sizes)))
    user_no = 0
    for label, size, mean in zip(labels, spec.group_sizes, spec.group_means):
        values = _two_point(size, mean, spec.spread)
        rng.shuffle(values)
        for v in values:
            user_id = f"u{user_no:05d}"
            scores[user_id] = v
            attributes[user_id] = {"group": label}
            user_no += 1
    return MaskingCohort(scores=scores, attributes=attributes, group_labels=labels)


@dataclass(frozen=True)
class RefinementChain:
    """Nested partitions P_1 coarser-than P_2 ... over one score vector."""

    scores: dict[str, float]
    levels: tuple[dict[str, str], ...]  # per level: user -> group label

    def grouped(self, level: int) -> GroupedScores:
        assignment = self.levels[level]
        groups: dict[str, list[float]] = {}
        members: dict[str, list[str]] = {}
        for user_id in sorted(self.scores):
            label = assignment[user_id]
            groups.setdefault(label, []).append(self.scores[user_id])
            members.setdefault(label, []).append(user_id)
        return GroupedScores(groups, members=members)


def generate_refinement_chain(levels: int, seed: int = 0, n_users: int = 64) -> RefinementChain:
    """Chain of partitions, each splitting every group of the previous one.

    Level 0 is the single all-user group; each next level splits every
    nonsingleton group in two at a seeded random cut. Scores are seeded
    uniform draws in [0, 1], fixed across levels.
    """
    if levels < 2:
        raise ParameterError("need at least 2 levels")
    if n_users < 2:
        raise ParameterError("need at least 2 users")
    rng = np.random.default_rng(seed)
    users = [f"u{i:05d}" for i in range(n_users)]
    scores = {u: float(v) for u, v in zip(users, rng.random(n_users))}

    assignments: list[dict[str, str]] = [{u: "r" for u in users}]
    for _ in range(levels - 1):
        prev = assignments[-1]
        blocks: dict[str, list[str]] = {}
        for u in users:
            blocks.setdefault(prev[u], []).append(u)
        nxt: dict[str, str] = {}
        for label in sorted(blocks):
            block = blocks[label]
            if len(block) == 1:
                nxt[block[0]] = label
                continue
            cut = int(rng.integers(1, len(block)))
            for u in block[:cut]:
                nxt[u] = label + ".0"
            for u in block[cut:]:
                nxt[u] = label + ".1"
        assignments.append(nxt)
    return RefinementChain(scores=scores, levels=tuple(assignments))
