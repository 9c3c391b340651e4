"""Per-user effectiveness base scores from ranked runs and binary judgments.

HR, MRR, P@k and NDCG@k are computed per user at a shared cutoff. Users
without judgments are excluded from evaluation; judged users missing from a
run score zero everywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import InputError, ParameterError


class DuplicateItemWarning(UserWarning):
    """A ranked list repeated an item; occurrences after the first are dropped."""


@dataclass(frozen=True)
class EvalConfig:
    """Cutoff and MRR behavior.

    mrr_full_list=False bounds the reciprocal rank at the cutoff (a first
    hit beyond k scores 0); True scans the entire ranked list.
    """

    k: int = 10
    mrr_full_list: bool = False

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ParameterError("cutoff k must be >= 1")


@dataclass(frozen=True)
class RankedRun:
    """One system's ordered recommendation list per user."""

    system_id: str
    rankings: Mapping[str, tuple[str, ...]]
    scores: Mapping[str, tuple[float, ...]] | None = None


@dataclass(frozen=True)
class Judgments:
    """Binary relevance: per user, the set of relevant item ids."""

    relevant: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        for user, items in self.relevant.items():
            if not items:
                raise InputError(f"user {user!r} has no judgments")

    @property
    def users(self) -> tuple[str, ...]:
        return tuple(sorted(self.relevant))


@dataclass(frozen=True)
class UserEffectiveness:
    user_id: str
    hr: int
    mrr: float
    precision: float
    ndcg: float


def _dedup(items: Sequence[str]) -> tuple[list[str], int]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item in seen:
            continue
        seen.add(item)
        out.append(item)
    return out, len(items) - len(out)


def rank_hits(ranked_items: Sequence[str], relevant: Iterable[str], k: int) -> list[int]:
    """Binary relevance vector over the top-k deduplicated ranking."""
    deduped, dropped = _dedup(ranked_items)
    if dropped:
        warnings.warn(
            f"dropped {dropped} duplicate ranked item(s) beyond first occurrence",
            DuplicateItemWarning,
            stacklevel=2,
        )
    rel = set(relevant)
    return [1 if item in rel else 0 for item in deduped[:k]]


def per_user_effectiveness(
    hits: Sequence[int], n_relevant: int, k: int, user_id: str = ""
) -> UserEffectiveness:
    """HR, MRR, P@k and NDCG@k from a binary hit vector.

    P@k divides by k even when fewer than k items were returned, penalizing
    short lists. IDCG truncates at min(k, n_relevant).
    """
    if n_relevant < 1:
        raise InputError("user has no judgments")
    if len(hits) > k:
        raise ParameterError("hit vector longer than cutoff")
    first = next((i for i, h in enumerate(hits) if h), None)
    hr = 0 if first is None else 1
    mrr = 0.0 if first is None else 1.0 / (first + 1)
    precision = sum(hits) / k
    dcg = sum(h / math.log2(i + 2) for i, h in enumerate(hits))
    idcg = sum(1.0 / math.log2(i + 2) for i in range(min(k, n_relevant)))
    return UserEffectiveness(user_id, hr, mrr, precision, dcg / idcg)


@dataclass(frozen=True)
class RunEffectiveness:
    per_user: tuple[UserEffectiveness, ...]
    duplicates_dropped: int = 0
    unjudged_run_users: int = 0

    def mean(self) -> dict[str, float]:
        n = len(self.per_user)
        if n == 0:
            return {"hr": 0.0, "mrr": 0.0, "precision": 0.0, "ndcg": 0.0}
        return {
            "hr": sum(u.hr for u in self.per_user) / n,
            "mrr": sum(u.mrr for u in self.per_user) / n,
            "precision": sum(u.precision for u in self.per_user) / n,
            "ndcg": sum(u.ndcg for u in self.per_user) / n,
        }

    def base_scores(self, base: str) -> dict[str, float]:
        if base not in ("p", "ndcg"):
            raise ParameterError("base score must be 'p' or 'ndcg'")
        attr = "precision" if base == "p" else "ndcg"
        return {u.user_id: getattr(u, attr) for u in self.per_user}


def evaluate_run(run: RankedRun, judgments: Judgments, cfg: EvalConfig | None = None) -> RunEffectiveness:
    """Score every judged user; results ordered by user id."""
    cfg = cfg or EvalConfig()
    results = []
    duplicates = 0
    for user_id in judgments.users:
        relevant = judgments.relevant[user_id]
        ranked = list(run.rankings.get(user_id, ()))
        deduped, dropped = _dedup(ranked)
        duplicates += dropped
        hits = [1 if item in relevant else 0 for item in deduped[: cfg.k]]
        eff = per_user_effectiveness(hits, len(relevant), cfg.k, user_id)
        if cfg.mrr_full_list and eff.hr == 0:
            first = next((i for i, item in enumerate(deduped) if item in relevant), None)
            if first is not None:
                eff = UserEffectiveness(user_id, eff.hr, 1.0 / (first + 1), eff.precision, eff.ndcg)
        results.append(eff)
    unjudged = sum(1 for u in run.rankings if u not in judgments.relevant)
    return RunEffectiveness(tuple(results), duplicates, unjudged)
