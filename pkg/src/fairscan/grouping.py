"""User grouping: declarative attribute binning and intersectional partitions.

Users are mapped to group keys by joining one label per chosen attribute.
A user missing any chosen attribute is excluded (and tallied) rather than
assigned an "unknown" group; empty groups never appear in a partition.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, ParameterError, UnbinnableValueError
from .fairness import ScoreVector

#: per user: attribute name -> raw value. Missing keys mean "unspecified".
AttributeTable = Mapping[str, Mapping[str, object]]

GROUP_KEY_SEPARATOR = "|"


@dataclass(frozen=True)
class PassthroughRule:
    name: str

    def label(self, raw: object) -> str:
        return str(raw)


@dataclass(frozen=True)
class MapRule:
    name: str
    mapping: Mapping[str, str]

    def label(self, raw: object) -> str:
        key = str(raw)
        if key not in self.mapping:
            raise UnbinnableValueError(f"unbinnable value {raw!r} for attribute {self.name!r}")
        return self.mapping[key]


@dataclass(frozen=True)
class BinRule:
    """Numeric bins with inclusive lower edges; the last bin is open above."""

    name: str
    edges: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.labels) or not self.edges:
            raise ParameterError(f"attribute {self.name!r}: need one label per bin edge")
        if list(self.edges) != sorted(self.edges):
            raise ParameterError(f"attribute {self.name!r}: bin edges must be sorted")

    def label(self, raw: object) -> str:
        try:
            value = float(raw)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise UnbinnableValueError(
                f"unbinnable value {raw!r} for attribute {self.name!r}: not numeric"
            ) from None
        idx = bisect_right(self.edges, value) - 1
        if idx < 0:
            raise UnbinnableValueError(
                f"unbinnable value {raw!r} for attribute {self.name!r}: below first edge"
            )
        return self.labels[idx]


AttributeRule = PassthroughRule | MapRule | BinRule


@dataclass(frozen=True)
class GroupingSpec:
    """Ordered attribute rules; rule order fixes the group-key layout."""

    rules: tuple[AttributeRule, ...]

    def __post_init__(self) -> None:
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise ParameterError("duplicate attribute name in grouping spec")

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rules)

    def rule(self, name: str) -> AttributeRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise ParameterError(f"no rule for attribute {name!r}")


def bin_attribute(rule: AttributeRule, raw_value: object) -> str:
    """Map one raw attribute value to its deterministic label."""
    return rule.label(raw_value)


class GroupedScores:
    """Partition of per-subject scores by group key.

    Group keys are kept in lexicographic order so that every derived vector
    has a deterministic layout. ``excluded`` tallies scored users dropped
    for missing attributes.
    """

    def __init__(
        self,
        groups: Mapping[str, Sequence[float] | np.ndarray],
        members: Mapping[str, Sequence[str]] | None = None,
        excluded: int = 0,
    ) -> None:
        if not groups:
            raise InputError("partition must contain at least one group")
        self.arrays: dict[str, np.ndarray] = {}
        for key in sorted(groups):
            arr = np.asarray(groups[key], dtype=float)
            if arr.size == 0:
                raise InputError(f"group {key!r} is empty")
            if np.any(~np.isfinite(arr)) or np.any(arr < 0):
                raise InputError(f"group {key!r} has invalid scores")
            self.arrays[key] = arr
        self.members = (
            {key: tuple(members[key]) for key in self.arrays} if members is not None else None
        )
        self.excluded = excluded

    @property
    def group_keys(self) -> tuple[str, ...]:
        return tuple(self.arrays)

    @property
    def n_groups(self) -> int:
        return len(self.arrays)

    @property
    def n_total(self) -> int:
        return sum(a.size for a in self.arrays.values())

    @property
    def sizes(self) -> dict[str, int]:
        return {k: int(a.size) for k, a in self.arrays.items()}

    @property
    def means(self) -> dict[str, float]:
        return {k: float(a.mean()) for k, a in self.arrays.items()}

    @property
    def grand_mean(self) -> float:
        return float(self.pooled().mean())

    def pooled(self) -> np.ndarray:
        """All member scores concatenated in group-key order."""
        return np.concatenate(list(self.arrays.values()))

    def smoothed(self) -> np.ndarray:
        """Each member score replaced by its group mean, pooled order."""
        return np.concatenate([np.full(a.size, a.mean()) for a in self.arrays.values()])

    def mean_vector(self) -> ScoreVector:
        """Unweighted group means, ordered by group key."""
        return ScoreVector(np.array([a.mean() for a in self.arrays.values()]), "group")

    @classmethod
    def singletons(cls, scores: Mapping[str, float]) -> "GroupedScores":
        """One group per subject; bridges group and individual fairness."""
        return cls(
            {f"user:{u}": [scores[u]] for u in scores},
            members={f"user:{u}": [u] for u in scores},
        )


def group_mean_vector(g: GroupedScores) -> ScoreVector:
    return g.mean_vector()


def form_groups(
    attrs: AttributeTable,
    spec: GroupingSpec,
    chosen_attributes: Iterable[str],
    scores: Mapping[str, float],
) -> GroupedScores:
    """Partition scored users into intersectional groups.

    The group key joins the chosen attributes' labels with "|" in spec
    order. Users missing any chosen attribute are excluded and counted;
    values outside a rule's domain raise ``UnbinnableValueError``.
    """
    chosen = set(chosen_attributes)
    if not chosen:
        raise ParameterError("chosen_attributes must be nonempty")
    unknown = chosen - set(spec.attribute_names)
    if unknown:
        raise ParameterError(f"attributes not in grouping spec: {sorted(unknown)}")
    ordered_rules = [r for r in spec.rules if r.name in chosen]

    groups: dict[str, list[float]] = {}
    members: dict[str, list[str]] = {}
    excluded = 0
    for user_id in sorted(scores):
        row = attrs.get(user_id)
        labels = []
        for rule in ordered_rules:
            raw = None if row is None else row.get(rule.name)
            if raw is None or raw == "":
                labels = None
                break
            labels.append(rule.label(raw))
        if labels is None:
            excluded += 1
            continue
        key = GROUP_KEY_SEPARATOR.join(labels)
        groups.setdefault(key, []).append(float(scores[user_id]))
        members.setdefault(key, []).append(user_id)
    if not groups:
        raise InputError("no user has complete attributes; nothing to group")
    return GroupedScores(groups, members=members, excluded=excluded)
