"""Agreement between fairness measures: system rankings and Kendall tau-b.

Each measure ranks systems most-fair to least-fair; tau-b between two
measures' value series quantifies how far they reach the same conclusion.
Values are first aligned to a common orientation (higher-is-better values
are negated) so tau = 1 always means "same fairness ranking".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InputError
from .fairness import MeasureResult


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Tie-corrected Kendall rank correlation.

    tau_b = (P - Q) / sqrt((P + Q + T_x)(P + Q + T_y)) with concordant P,
    discordant Q, and T_x / T_y pairs tied only in x / only in y; pairs
    tied in both count in neither. Returns None when every pair is tied in
    one of the inputs (the statistic is undefined there, not NaN).
    """
    if len(x) != len(y):
        raise InputError("vectors must have equal length")
    n = len(x)
    if n < 2:
        raise InputError("need at least 2 observations")
    conc = disc = tied_x = tied_y = 0
    for i in range(n - 1):
        xi, yi = x[i], y[i]
        for j in range(i + 1, n):
            dx = int(xi > x[j]) - int(xi < x[j])
            dy = int(yi > y[j]) - int(yi < y[j])
            if dx and dy:
                if dx == dy:
                    conc += 1
                else:
                    disc += 1
            elif dx:
                tied_y += 1
            elif dy:
                tied_x += 1
    d1 = conc + disc + tied_x
    d2 = conc + disc + tied_y
    if d1 == 0 or d2 == 0:
        return None
    return (conc - disc) / math.sqrt(d1 * d2)


@dataclass(frozen=True)
class SystemRanking:
    """Systems ordered most-fair first, as tie groups."""

    measure_id: str
    tiers: tuple[tuple[str, ...], ...]

    def flat(self) -> tuple[str, ...]:
        return tuple(s for tier in self.tiers for s in tier)


def rank_systems(
    measure_id: str, values: Mapping[str, float], orientation: str
) -> SystemRanking:
    """Order systems by fairness under the measure's orientation."""
    reverse = orientation == "higher_better"
    ordered = sorted(values, key=lambda s: (-values[s] if reverse else values[s], s))
    tiers: list[tuple[str, ...]] = []
    current: list[str] = []
    for s in ordered:
        if current and values[s] != values[current[-1]]:
            tiers.append(tuple(current))
            current = []
        current.append(s)
    if current:
        tiers.append(tuple(current))
    return SystemRanking(measure_id, tuple(tiers))


@dataclass(frozen=True)
class MeasureSeries:
    """One measure's value per system, with its orientation."""

    series_id: str
    orientation: str
    values: Mapping[str, float | None]

    def fairness_keys(self, systems: Sequence[str]) -> list[float]:
        sign = -1.0 if self.orientation == "higher_better" else 1.0
        return [sign * float(self.values[s]) for s in systems]  # type: ignore[arg-type]

    def failed_systems(self, systems: Sequence[str]) -> list[str]:
        return [s for s in systems if self.values.get(s) is None]


@dataclass
class AgreementMatrix:
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    cells: dict[tuple[str, str], float | None]
    threshold: float = 0.9
    undefined_cause: dict[tuple[str, str], str] = field(default_factory=dict)
    excluded: list[tuple[str, str]] = field(default_factory=list)  # (series_id, reason)

    def equivalent_pairs(self) -> list[tuple[str, str, float]]:
        out = []
        for (r, c), tau in sorted(self.cells.items()):
            if tau is not None and tau >= self.threshold:
                out.append((r, c, tau))
        return out


def agreement_matrix(
    rows: Sequence[MeasureSeries],
    cols: Sequence[MeasureSeries],
    threshold: float = 0.9,
) -> AgreementMatrix:
    """Pairwise tau-b between row and column measure series.

    A series with a missing value on any system (a degenerate measure) is
    excluded from the matrix entirely; a cell is undefined (None) when either
    series ties all systems, which makes tau incomputable.
    """
    all_series = list(rows) + list(cols)
    systems: set[str] = set()
    for s in all_series:
        systems.update(s.values)
    system_order = sorted(systems)
    if len(system_order) < 2:
        raise InputError("agreement needs at least 2 systems")
    for s in all_series:
        missing = [sys for sys in system_order if sys not in s.values]
        if missing:
            raise InputError(f"series {s.series_id!r} missing systems {missing}")

    excluded = []
    usable_rows = []
    for s in rows:
        failed = s.failed_systems(system_order)
        if failed:
            excluded.append((s.series_id, f"no value for systems {failed}"))
        else:
            usable_rows.append(s)
    usable_cols = []
    for s in cols:
        failed = s.failed_systems(system_order)
        if failed:
            if s.series_id not in [e[0] for e in excluded]:
                excluded.append((s.series_id, f"no value for systems {failed}"))
        else:
            usable_cols.append(s)

    cells: dict[tuple[str, str], float | None] = {}
    undefined: dict[tuple[str, str], str] = {}
    for r in usable_rows:
        rk = r.fairness_keys(system_order)
        for c in usable_cols:
            ck = c.fairness_keys(system_order)
            tau = kendall_tau_b(rk, ck)
            cells[(r.series_id, c.series_id)] = tau
            if tau is None:
                tied = []
                if len(set(rk)) == 1:
                    tied.append(r.series_id)
                if len(set(ck)) == 1:
                    tied.append(c.series_id)
                undefined[(r.series_id, c.series_id)] = (
                    "all-tied: " + ", ".join(tied) if tied else "all-tied"
                )
    return AgreementMatrix(
        row_ids=tuple(s.series_id for s in usable_rows),
        col_ids=tuple(s.series_id for s in usable_cols),
        cells=cells,
        threshold=threshold,
        undefined_cause=undefined,
        excluded=excluded,
    )


def series_from_results(
    series_id: str, per_system: Mapping[str, Sequence[MeasureResult]], measure_id: str
) -> MeasureSeries:
    """Collect one measure's value across systems' battery outputs."""
    values: dict[str, float | None] = {}
    orientation = "lower_better"
    for system, results in per_system.items():
        found = next((r for r in results if r.measure_id == measure_id), None)
        if found is None:
            raise InputError(f"system {system!r} has no result for measure {measure_id!r}")
        values[system] = found.value
        orientation = found.orientation
    return MeasureSeries(series_id, orientation, values)
