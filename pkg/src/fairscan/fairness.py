"""Inequality and dispersion measures over nonnegative score vectors.

Every measure consumes the same input shape -- a vector of nonnegative base
scores, one per subject -- so a single battery can quantify fairness across
user groups (subjects are group means) and across individual users (subjects
are users). Lower is fairer for every measure except the worst-fraction mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal, Mapping, Sequence

import numpy as np

from .errors import DegenerateMeasureError, ParameterError

if TYPE_CHECKING:
    from .grouping import GroupedScores

SubjectKind = Literal["individual", "group"]
Orientation = Literal["higher_better", "lower_better"]

#: Battery order for group-level evaluation.
GROUP_MEASURES = ("min", "range", "sd", "mad", "gini", "atkinson", "cv", "fstat", "kl", "gce")
#: Battery order for individual-level evaluation.
INDIVIDUAL_MEASURES = ("sd", "gini", "atkinson")

ORIENTATIONS: Mapping[str, Orientation] = {
    "min": "higher_better",
    "range": "lower_better",
    "sd": "lower_better",
    "mad": "lower_better",
    "gini": "lower_better",
    "atkinson": "lower_better",
    "cv": "lower_better",
    "fstat": "lower_better",
    "kl": "lower_better",
    "gce": "lower_better",
}


@dataclass(frozen=True)
class MeasureParams:
    """Tunable knobs shared by the measure battery.

    atkinson_epsilon: inequality aversion; must be > 0. Kept below 1 by
        default because base-score vectors routinely contain zeros and any
        epsilon >= 1 collapses the Atkinson index to 1 in that case.
    gce_beta: generalized cross entropy exponent, any real outside {0, 1}.
    smoothing: additive smoothing applied before normalizing a score vector
        into a distribution (KL, GCE).
    worst_fraction: share of subjects averaged by the worst-off measure.
    kl_reverse: False compares uniform-to-scores, True scores-to-uniform.
    """

    atkinson_epsilon: float = 0.5
    gce_beta: float = 2.0
    smoothing: float = 1e-6
    worst_fraction: float = 0.25
    kl_reverse: bool = False

    def __post_init__(self) -> None:
        if self.atkinson_epsilon <= 0:
            raise ParameterError("atkinson_epsilon must be > 0")
        if self.gce_beta in (0.0, 1.0):
            raise ParameterError("gce_beta must not be 0 or 1")
        if self.smoothing <= 0:
            raise ParameterError("smoothing must be > 0")
        if not 0 < self.worst_fraction <= 1:
            raise ParameterError("worst_fraction must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Nonnegative base scores for a set of subjects (users or groups)."""

    values: np.ndarray
    subject_kind: SubjectKind = "individual"

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ParameterError("score vector must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("score vector must be finite")
        if np.any(arr < 0):
            raise ParameterError("base scores must be nonnegative")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class MeasureResult:
    measure_id: str
    value: float | None
    orientation: Orientation
    subject_kind: SubjectKind = "individual"
    params: Mapping[str, object] = field(default_factory=dict)
    note: str | None = None


def _values(v: ScoreVector | Sequence[float] | np.ndarray) -> tuple[np.ndarray, SubjectKind]:
    if isinstance(v, ScoreVector):
        return v.values, v.subject_kind
    return ScoreVector(np.asarray(v, dtype=float)).values, "individual"


# ---------------------------------------------------------------------------
# numeric kernels


def gini_value(values: Sequence[float] | np.ndarray) -> float:
    """Gini index, sum_i sum_j |v_i - v_j| / (2 n^2 mu).

    Computed in O(n log n) via the sorted rank form
    2 * sum_i i * x_(i) / (n * sum x) - (n + 1) / n.
    A zero-mean or single-element vector scores 0.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n <= 1 or x[0] == x[-1]:
        return 0.0
    total = x.sum()
    if total <= 0:
        return 0.0
    ranks = np.arange(1, n + 1, dtype=float)
    return float(max(0.0, 2.0 * np.dot(ranks, x) / (n * total) - (n + 1) / n))


def ede(values: Sequence[float] | np.ndarray, epsilon: float) -> float:
    """Equally distributed equivalent: the uniform score with the same
    welfare as the actual distribution under aversion ``epsilon``.

    epsilon == 1 uses the geometric mean; any zero then collapses it to 0.
    """
    if epsilon <= 0:
        raise ParameterError("epsilon must be > 0")
    x = np.asarray(values, dtype=float)
    if epsilon == 1.0:
        if np.any(x <= 0):
            return 0.0
        return float(np.exp(np.mean(np.log(x))))
    p = 1.0 - epsilon
    if epsilon > 1.0 and np.any(x == 0):
        return 0.0
    return float(np.mean(x**p) ** (1.0 / p))


def atkinson_value(values: Sequence[float] | np.ndarray, epsilon: float) -> float:
    """Atkinson index 1 - ede/mean, clipped into [0, 1].

    An all-zero vector scores 0 ("equally unfair to all"); with
    epsilon >= 1 any zero entry forces the index to 1.
    """
    x = np.asarray(values, dtype=float)
    mu = float(x.mean())
    if mu <= 0 or x.min() == x.max():
        return 0.0
    a = 1.0 - ede(x, epsilon) / mu
    return float(min(1.0, max(0.0, a)))


def dispersion_values(values: Sequence[float] | np.ndarray) -> dict[str, float]:
    """Range, population SD, mean pairwise absolute difference, and CV.

    MAD here is the mean of |v_i - v_j| over ordered pairs i != j, which
    equals 2 * mu * gini * n / (n - 1). CV is SD / mean (0 for zero mean).
    Single-element vectors score 0 on all four.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n <= 1:
        return {"range": 0.0, "sd": 0.0, "mad": 0.0, "cv": 0.0}
    mu = float(x.mean())
    sd = float(x.std())
    xs = np.sort(x)
    coeff = 2.0 * np.arange(1, n + 1, dtype=float) - n - 1
    mad = float(2.0 * np.dot(coeff, xs) / (n * (n - 1)))
    return {
        "range": float(x.max() - x.min()),
        "sd": sd,
        "mad": mad,
        "cv": sd / mu if mu > 0 else 0.0,
    }


def worst_fraction_mean(values: Sequence[float] | np.ndarray, fraction: float) -> float:
    """Mean of the m smallest scores, m = max(1, floor(fraction * n))."""
    if not 0 < fraction <= 1:
        raise ParameterError("fraction must be in (0, 1]")
    x = np.sort(np.asarray(values, dtype=float))
    m = max(1, int(math.floor(fraction * x.size)))
    return float(x[:m].mean())


def f_statistic_value(groups: Sequence[np.ndarray]) -> float:
    """One-way ANOVA F over per-subject scores partitioned into groups."""
    arrays = [np.asarray(g, dtype=float) for g in groups]
    g = len(arrays)
    if g < 2:
        raise DegenerateMeasureError("F statistic needs at least 2 groups")
    n = sum(a.size for a in arrays)
    if n - g < 1:
        raise DegenerateMeasureError("degenerate: no within-group degrees of freedom")
    grand = sum(float(a.sum()) for a in arrays) / n
    ss_between = sum(a.size * (float(a.mean()) - grand) ** 2 for a in arrays)
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    if ss_within == 0.0:
        if ss_between == 0.0:
            return 0.0
        raise DegenerateMeasureError("degenerate: infinite F (zero within-group variance)")
    return float((ss_between / (g - 1)) / (ss_within / (n - g)))


def _smoothed_distribution(x: np.ndarray, smoothing: float) -> np.ndarray:
    if smoothing <= 0:
        raise ParameterError("smoothing must be > 0")
    p = x + smoothing
    return p / p.sum()


def kl_value(values: Sequence[float] | np.ndarray, smoothing: float = 1e-6, reverse: bool = False) -> float:
    """KL divergence between the smoothed score distribution and uniform.

    Default direction is KL(uniform || p); ``reverse`` computes KL(p || uniform).
    Smoothing keeps every probability positive, so the value is always finite.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 2:
        return 0.0
    p = _smoothed_distribution(x, smoothing)
    u = 1.0 / n
    if reverse:
        return float(np.sum(p * np.log(p / u)))
    return float(np.sum(u * np.log(u / p)))


def gce_value(values: Sequence[float] | np.ndarray, beta: float = 2.0, smoothing: float = 1e-6) -> float:
    """Generalized cross entropy between the smoothed score distribution
    and the uniform fair distribution:

        (1 / (beta * (beta - 1))) * (sum_i u_i^beta * p_i^(1-beta) - 1)

    Nonnegative for every admissible beta, 0 iff p is exactly uniform.
    """
    if beta in (0.0, 1.0):
        raise ParameterError("beta must not be 0 or 1")
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 2:
        return 0.0
    p = _smoothed_distribution(x, smoothing)
    u = 1.0 / n
    total = float(np.sum(u**beta * p ** (1.0 - beta)))
    return (total - 1.0) / (beta * (beta - 1.0))


# ---------------------------------------------------------------------------
# measure-level API


def gini(v: ScoreVector | Sequence[float]) -> MeasureResult:
    x, kind = _values(v)
    return MeasureResult("gini", gini_value(x), "lower_better", kind)


def atkinson(v: ScoreVector | Sequence[float], epsilon: float = 0.5) -> MeasureResult:
    x, kind = _values(v)
    return MeasureResult(
        "atkinson", atkinson_value(x, epsilon), "lower_better", kind, {"epsilon": epsilon}
    )


def dispersion(v: ScoreVector | Sequence[float]) -> dict[str, MeasureResult]:
    x, kind = _values(v)
    vals = dispersion_values(x)
    return {m: MeasureResult(m, vals[m], "lower_better", kind) for m in ("range", "sd", "mad", "cv")}


def min_worst_quartile(v: ScoreVector | Sequence[float], worst_fraction: float = 0.25) -> MeasureResult:
    x, kind = _values(v)
    return MeasureResult(
        "min",
        worst_fraction_mean(x, worst_fraction),
        "higher_better",
        kind,
        {"worst_fraction": worst_fraction},
    )


def f_statistic(g: "GroupedScores") -> MeasureResult:
    value = f_statistic_value(list(g.arrays.values()))
    return MeasureResult("fstat", value, "lower_better", "group")


def kl_uniform(
    v: ScoreVector | Sequence[float], smoothing: float = 1e-6, reverse: bool = False
) -> MeasureResult:
    x, kind = _values(v)
    direction = "scores_to_uniform" if reverse else "uniform_to_scores"
    return MeasureResult(
        "kl",
        kl_value(x, smoothing, reverse),
        "lower_better",
        kind,
        {"smoothing": smoothing, "direction": direction},
    )


def gce(v: ScoreVector | Sequence[float], beta: float = 2.0, smoothing: float = 1e-6) -> MeasureResult:
    x, kind = _values(v)
    return MeasureResult(
        "gce",
        gce_value(x, beta, smoothing),
        "lower_better",
        kind,
        {"beta": beta, "smoothing": smoothing},
    )


def individual_battery(
    v: ScoreVector | Sequence[float], params: MeasureParams | None = None
) -> list[MeasureResult]:
    """SD, Gini, and Atkinson over a per-user score vector."""
    params = params or MeasureParams()
    x, _ = _values(v)
    disp = dispersion_values(x)
    return [
        MeasureResult("sd", disp["sd"], "lower_better", "individual"),
        MeasureResult("gini", gini_value(x), "lower_better", "individual"),
        MeasureResult(
            "atkinson",
            atkinson_value(x, params.atkinson_epsilon),
            "lower_better",
            "individual",
            {"epsilon": params.atkinson_epsilon},
        ),
    ]


def group_battery(g: "GroupedScores", params: MeasureParams | None = None) -> list[MeasureResult]:
    """The full group-fairness battery over the unweighted group-mean vector.

    All measures except the F statistic consume the vector of group means;
    the F statistic alone looks at per-user scores within groups. A
    degenerate F is reported as a result with no value rather than raised.
    """
    params = params or MeasureParams()
    means = g.mean_vector().values
    disp = dispersion_values(means)
    results = [
        MeasureResult(
            "min",
            worst_fraction_mean(means, params.worst_fraction),
            "higher_better",
            "group",
            {"worst_fraction": params.worst_fraction},
        ),
        MeasureResult("range", disp["range"], "lower_better", "group"),
        MeasureResult("sd", disp["sd"], "lower_better", "group"),
        MeasureResult("mad", disp["mad"], "lower_better", "group"),
        MeasureResult("gini", gini_value(means), "lower_better", "group"),
        MeasureResult(
            "atkinson",
            atkinson_value(means, params.atkinson_epsilon),
            "lower_better",
            "group",
            {"epsilon": params.atkinson_epsilon},
        ),
        MeasureResult("cv", disp["cv"], "lower_better", "group"),
    ]
    try:
        results.append(f_statistic(g))
    except DegenerateMeasureError as exc:
        results.append(MeasureResult("fstat", None, "lower_better", "group", note=str(exc)))
    direction = "scores_to_uniform" if params.kl_reverse else "uniform_to_scores"
    results.append(
        MeasureResult(
            "kl",
            kl_value(means, params.smoothing, params.kl_reverse),
            "lower_better",
            "group",
            {"smoothing": params.smoothing, "direction": direction},
        )
    )
    results.append(
        MeasureResult(
            "gce",
            gce_value(means, params.gce_beta, params.smoothing),
            "lower_better",
            "group",
            {"beta": params.gce_beta, "smoothing": params.smoothing},
        )
    )
    return results
