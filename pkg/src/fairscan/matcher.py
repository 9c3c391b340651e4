"""Fuzzy matching of free-text recommendations to catalog items.

Item names and generated lines are compared as TF-IDF vectors over
character n-grams; a line resolves to the highest-cosine item when the
similarity clears the configured threshold. Unresolved lines become
rank-stamped placeholders so downstream effectiveness sees the original
list positions.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .effectiveness import RankedRun
from .errors import InputError, ParameterError

_NON_ALNUM = re.compile(r"[^0-9a-z]+")

NO_MATCH_PREFIX = "<no-match:"


def placeholder(position: int) -> str:
    """Unique never-relevant token for an unresolved line at a 1-based rank."""
    return f"{NO_MATCH_PREFIX}{position}>"


def is_placeholder(item_id: str) -> bool:
    return item_id.startswith(NO_MATCH_PREFIX)


@dataclass(frozen=True)
class MatcherConfig:
    ngram_size: int = 3
    similarity_threshold: float = 0.75

    def __post_init__(self) -> None:
        if self.ngram_size < 1:
            raise ParameterError("ngram_size must be >= 1")
        if not 0 < self.similarity_threshold <= 1:
            raise ParameterError("similarity_threshold must be in (0, 1]")


def normalize(text: str) -> str:
    """Lowercase, replace punctuation with spaces, collapse whitespace."""
    return _NON_ALNUM.sub(" ", text.lower()).strip()


def char_ngrams(text: str, n: int) -> list[str]:
    """Sliding character windows; strings shorter than n become one gram."""
    if not text:
        return []
    if len(text) < n:
        return [text]
    return [text[i : i + n] for i in range(len(text) - n + 1)]


class MatchIndex:
    """Immutable TF-IDF index over a catalog's normalized item names.

    idf = ln((1 + N) / (1 + df)) + 1; item vectors are L2-normalized, so a
    dot product against a unit query vector is the cosine. Queries score
    only through n-grams the catalog has seen. Safe for concurrent reads.
    """

    def __init__(self, catalog: Sequence[tuple[str, str]], config: MatcherConfig | None = None):
        self.config = config or MatcherConfig()
        if not catalog:
            raise InputError("catalog must contain at least one item")
        self.item_ids: tuple[str, ...] = tuple(item_id for item_id, _ in catalog)
        if len(set(self.item_ids)) != len(self.item_ids):
            raise InputError("catalog item ids must be unique")

        n = self.config.ngram_size
        grams_per_item: list[Counter[str]] = []
        for item_id, name in catalog:
            norm = normalize(name)
            if not norm:
                raise InputError(f"item {item_id!r} has an empty name after normalization")
            grams_per_item.append(Counter(char_ngrams(norm, n)))

        df: Counter[str] = Counter()
        for grams in grams_per_item:
            df.update(grams.keys())
        n_items = len(catalog)
        self.idf: dict[str, float] = {
            g: math.log((1 + n_items) / (1 + d)) + 1.0 for g, d in df.items()
        }

        # inverted index: gram -> [(item index, normalized tf-idf weight)]
        self._postings: dict[str, list[tuple[int, float]]] = {}
        for idx, grams in enumerate(grams_per_item):
            weights = {g: tf * self.idf[g] for g, tf in grams.items()}
            norm2 = math.sqrt(sum(w * w for w in weights.values()))
            for g, w in weights.items():
                self._postings.setdefault(g, []).append((idx, w / norm2))

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    def query_weights(self, text: str) -> dict[str, float] | None:
        """Unit-norm TF-IDF weights of a query over the catalog vocabulary."""
        norm = normalize(text)
        if not norm:
            return None
        grams = Counter(char_ngrams(norm, self.config.ngram_size))
        weights = {g: tf * self.idf[g] for g, tf in grams.items() if g in self.idf}
        if not weights:
            return None
        norm2 = math.sqrt(sum(w * w for w in weights.values()))
        return {g: w / norm2 for g, w in weights.items()}

    def similarities(self, text: str) -> np.ndarray:
        """Cosine of the query against every catalog item."""
        scores = np.zeros(self.n_items)
        weights = self.query_weights(text)
        if weights is None:
            return scores
        for g, qw in weights.items():
            for idx, iw in self._postings[g]:
                scores[idx] += qw * iw
        return scores


def build_index(catalog: Sequence[tuple[str, str]], cfg: MatcherConfig | None = None) -> MatchIndex:
    return MatchIndex(catalog, cfg)


def best_match(index: MatchIndex, text: str, threshold: float | None = None) -> tuple[str | None, float]:
    """Best catalog item and its cosine; item is None below the threshold.

    Cosine ties are broken by the lexicographically smallest item id.
    """
    threshold = index.config.similarity_threshold if threshold is None else threshold
    scores = index.similarities(text)
    best = float(scores.max()) if scores.size else 0.0
    if best < threshold:
        return None, best
    candidates = [index.item_ids[i] for i in np.flatnonzero(scores == best)]
    return min(candidates), best


def match_text(index: MatchIndex, text: str, threshold: float | None = None) -> str | None:
    return best_match(index, text, threshold)[0]


def resolve_run(
    free_text_run: Mapping[str, Sequence[str]],
    index: MatchIndex,
    cfg: MatcherConfig | None = None,
    system_id: str = "",
) -> RankedRun:
    """Resolve each generated line independently to an id-form run.

    Unresolved lines and repeats of an already-resolved id become
    placeholders, so list length and ranks are preserved; a resolved id is
    credited only at its first occurrence.
    """
    threshold = (cfg or index.config).similarity_threshold
    rankings: dict[str, tuple[str, ...]] = {}
    sims: dict[str, tuple[float, ...]] = {}
    for user_id in sorted(free_text_run):
        items: list[str] = []
        scores: list[float] = []
        seen: set[str] = set()
        for pos, text in enumerate(free_text_run[user_id], start=1):
            matched, cosine = best_match(index, text, threshold)
            if matched is None or matched in seen:
                items.append(placeholder(pos))
                scores.append(0.0)
            else:
                seen.add(matched)
                items.append(matched)
                scores.append(cosine)
        rankings[user_id] = tuple(items)
        sims[user_id] = tuple(scores)
    return RankedRun(system_id=system_id, rankings=rankings, scores=sims)
