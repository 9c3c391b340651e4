"""Between/within-group decomposition of variance, Gini, and Atkinson.

Decompositions run on size-weighted smoothed distributions: replacing each
user's score by their group mean isolates the between-group component, and
the exact identities below hold only in this weighted form (headline group
scores, by contrast, use unweighted group means).

  variance  Var_total = Var_between + Var_within            (additive)
  atkinson  (1 - A_total) = (1 - A_between)(1 - A_within)   (multiplicative)
  gini      G_total = G_between + G_within + overlap        (overlap >= 0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateMeasureError, ParameterError
from .fairness import ede, gini_value
from .grouping import GroupedScores

IdentityKind = Literal["additive", "multiplicative", "additive_with_overlap"]


@dataclass(frozen=True)
class DecompositionResult:
    measure_id: str
    total: float
    between: float
    within: float
    residual: float
    identity_kind: IdentityKind


def decompose_variance(g: GroupedScores) -> DecompositionResult:
    """Law-of-total-variance split, reported on the SD scale.

    The additive identity lives in variance space:
    total**2 = between**2 + within**2 with zero residual.
    """
    n = g.n_total
    grand = g.grand_mean
    var_between = 0.0
    var_within = 0.0
    for arr in g.arrays.values():
        w = arr.size / n
        var_between += w * (float(arr.mean()) - grand) ** 2
        var_within += w * float(arr.var())
    return DecompositionResult(
        "sd",
        total=math.sqrt(var_between + var_within),
        between=math.sqrt(var_between),
        within=math.sqrt(var_within),
        residual=0.0,
        identity_kind="additive",
    )


def decompose_atkinson(g: GroupedScores, epsilon: float = 0.5) -> DecompositionResult:
    """Residual-free Atkinson split via equally distributed equivalents.

    With x the pooled scores and m the smoothed (group-mean) vector:
    A_between = 1 - ede(m)/mu and A_within = 1 - ede(x)/ede(m), so
    (1 - A_total) = (1 - A_between)(1 - A_within) holds exactly.
    """
    if epsilon <= 0:
        raise ParameterError("epsilon must be > 0")
    x = g.pooled()
    m = g.smoothed()
    mu = float(x.mean())
    if mu <= 0:
        raise DegenerateMeasureError("degenerate: zero mean score")
    ede_m = ede(m, epsilon)
    if ede_m == 0.0:
        raise DegenerateMeasureError("degenerate: zero between-group EDE")
    ede_x = ede(x, epsilon)
    return DecompositionResult(
        "atkinson",
        total=1.0 - ede_x / mu,
        between=1.0 - ede_m / mu,
        within=1.0 - ede_x / ede_m,
        residual=0.0,
        identity_kind="multiplicative",
    )


def decompose_gini(g: GroupedScores) -> DecompositionResult:
    """Gini split with a nonnegative overlap residual.

    Between is the Gini of the smoothed vector; within weights each group's
    Gini by population share times income share, so the residual
    G_total - G_between - G_within is >= 0 and vanishes exactly when group
    score ranges are pairwise disjoint.
    """
    x = g.pooled()
    n = g.n_total
    mu = float(x.mean())
    if mu <= 0:
        return DecompositionResult("gini", 0.0, 0.0, 0.0, 0.0, "additive_with_overlap")
    total = gini_value(x)
    between = gini_value(g.smoothed())
    within = 0.0
    for arr in g.arrays.values():
        pop_share = arr.size / n
        income_share = arr.size * float(arr.mean()) / (n * mu)
        within += pop_share * income_share * gini_value(arr)
    return DecompositionResult(
        "gini",
        total=total,
        between=between,
        within=within,
        residual=total - between - within,
        identity_kind="additive_with_overlap",
    )
