"""Interaction-log preprocessing: k-core filtering, global temporal split,
and train-based pruning.

All operations are pure functions over immutable interaction lists and are
deterministic: ordering ties are always broken by (timestamp, user_id,
item_id).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import InputError, ParameterError


@dataclass(frozen=True)
class Interaction:
    user_id: str
    item_id: str
    weight: float = 1.0
    timestamp: int = 0

    def __post_init__(self) -> None:
        if not self.user_id or not self.item_id:
            raise InputError("user_id and item_id must be nonempty")
        if self.weight < 0:
            raise InputError("weight must be nonnegative")
        if self.timestamp < 0:
            raise InputError("timestamp must be >= 0")


@dataclass(frozen=True)
class PrepConfig:
    core_level: int = 5
    split_ratio: tuple[int, int, int] = (3, 1, 1)
    min_train_interactions: int = 0

    def __post_init__(self) -> None:
        if self.core_level < 1:
            raise ParameterError("core_level must be >= 1")
        if any(r < 1 for r in self.split_ratio):
            raise ParameterError("split ratio components must be positive")
        if self.min_train_interactions < 0:
            raise ParameterError("min_train_interactions must be >= 0")


@dataclass(frozen=True)
class SplitDataset:
    train: tuple[Interaction, ...]
    val: tuple[Interaction, ...]
    test: tuple[Interaction, ...]

    @property
    def n_total(self) -> int:
        return len(self.train) + len(self.val) + len(self.test)


def kcore_filter(interactions: Sequence[Interaction], c: int) -> list[Interaction]:
    """Maximal subset where every user and item keeps >= c interactions.

    Peels iteratively to the fixed point; the result does not depend on
    input order beyond the order of surviving rows, which is preserved.
    """
    if c < 1:
        raise ParameterError("core level must be >= 1")
    rows = list(interactions)
    while True:
        user_deg = Counter(r.user_id for r in rows)
        item_deg = Counter(r.item_id for r in rows)
        kept = [r for r in rows if user_deg[r.user_id] >= c and item_deg[r.item_id] >= c]
        if len(kept) == len(rows):
            return kept
        rows = kept


def _sort_key(r: Interaction) -> tuple[int, str, str]:
    return (r.timestamp, r.user_id, r.item_id)


def temporal_split(
    interactions: Sequence[Interaction], ratio: tuple[int, int, int] = (3, 1, 1)
) -> SplitDataset:
    """Global-timeline split into train/val/test by the given ratio.

    Rows are sorted ascending by (timestamp, user_id, item_id); the first
    floor(N * r_train / sum) go to train, the next floor(N * r_val / sum)
    to val, the remainder to test.
    """
    if any(r < 1 for r in ratio) or len(ratio) != 3:
        raise ParameterError("split ratio must be three positive integers")
    rows = sorted(interactions, key=_sort_key)
    n = len(rows)
    total = sum(ratio)
    n_train = (n * ratio[0]) // total
    n_val = (n * ratio[1]) // total
    return SplitDataset(
        train=tuple(rows[:n_train]),
        val=tuple(rows[n_train : n_train + n_val]),
        test=tuple(rows[n_train + n_val :]),
    )


def prune_by_train(split: SplitDataset, t: int) -> SplitDataset:
    """Drop sparse subjects, then unseen val/test rows. Single pass.

    Users and items with <= t train interactions are removed from all three
    splits; afterwards any val/test row whose user or item no longer occurs
    in train is removed. Counts are not recomputed after removal.
    """
    if t < 0:
        raise ParameterError("t must be >= 0")
    user_count = Counter(r.user_id for r in split.train)
    item_count = Counter(r.item_id for r in split.train)
    keep_user = {u for u, n in user_count.items() if n > t}
    keep_item = {i for i, n in item_count.items() if n > t}

    def _filter(rows: Sequence[Interaction]) -> list[Interaction]:
        return [r for r in rows if r.user_id in keep_user and r.item_id in keep_item]

    train = _filter(split.train)
    train_users = {r.user_id for r in train}
    train_items = {r.item_id for r in train}

    def _seen(rows: Sequence[Interaction]) -> tuple[Interaction, ...]:
        return tuple(
            r for r in _filter(rows) if r.user_id in train_users and r.item_id in train_items
        )

    return SplitDataset(train=tuple(train), val=_seen(split.val), test=_seen(split.test))


def preprocess(
    interactions: Sequence[Interaction], config: PrepConfig | None = None
) -> tuple[SplitDataset, dict[str, object]]:
    """k-core filter, split, prune; returns the dataset and a stats record."""
    config = config or PrepConfig()
    cored = kcore_filter(interactions, config.core_level)
    split = prune_by_train(temporal_split(cored, config.split_ratio), config.min_train_interactions)
    rows = list(split.train) + list(split.val) + list(split.test)
    stats = {
        "n_interactions": len(rows),
        "n_items": len({r.item_id for r in rows}),
        "n_users": len({r.user_id for r in rows}),
        "n_test_users": len({r.user_id for r in split.test}),
        "splits": {"train": len(split.train), "val": len(split.val), "test": len(split.test)},
    }
    return split, stats
