"""Report pipeline: effectiveness -> grouping -> fairness -> decomposition
-> agreement, over one or more systems.

Functions here operate on in-memory inputs and return plain report
dataclasses; file parsing and writing live in ``io`` and the CLI. Every
stage iterates in sorted order, so identical inputs produce identical
reports regardless of how the work is scheduled.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import io as fio
from .agreement import AgreementMatrix, MeasureSeries, agreement_matrix
from .decomposition import decompose_atkinson, decompose_gini, decompose_variance
from .effectiveness import EvalConfig, Judgments, RankedRun, RunEffectiveness, evaluate_run
from .errors import DegenerateMeasureError, InputError, ParameterError
from .fairness import (
    GROUP_MEASURES,
    INDIVIDUAL_MEASURES,
    MeasureParams,
    MeasureResult,
    ScoreVector,
    group_battery,
    individual_battery,
)
from .grouping import AttributeTable, GroupedScores, GroupingSpec, form_groups
from .matcher import MatcherConfig, build_index, resolve_run

BASE_SCORES = ("p", "ndcg")


@dataclass(frozen=True)
class SystemSource:
    """One system's run in either id or free-text form."""

    system_id: str
    form: str  # "id" | "free_text"
    rankings: Mapping[str, Sequence[str]] | None = None
    texts: Mapping[str, Sequence[str]] | None = None

    def __post_init__(self) -> None:
        if self.form not in ("id", "free_text"):
            raise InputError(f"system {self.system_id!r}: unknown run form {self.form!r}")
        if self.form == "id" and self.rankings is None:
            raise InputError(f"system {self.system_id!r}: id-form run needs rankings")
        if self.form == "free_text" and self.texts is None:
            raise InputError(f"system {self.system_id!r}: free-text run needs texts")


@dataclass
class PipelineInputs:
    systems: list[SystemSource]
    judgments: Judgments
    attributes: AttributeTable | None = None
    grouping_spec: GroupingSpec | None = None
    catalog: Sequence[tuple[str, str]] | None = None
    eval_config: EvalConfig = field(default_factory=EvalConfig)
    params: MeasureParams = field(default_factory=MeasureParams)
    matcher_config: MatcherConfig = field(default_factory=MatcherConfig)
    agreement_threshold: float = 0.9

    def __post_init__(self) -> None:
        ids = [s.system_id for s in self.systems]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate system id in manifest")
        if not self.systems:
            raise InputError("manifest lists no systems")


def resolve_sources(inputs: PipelineInputs) -> dict[str, RankedRun]:
    """Turn every source into an id-form run, fuzzy-matching text lines."""
    needs_catalog = [s.system_id for s in inputs.systems if s.form == "free_text"]
    index = None
    if needs_catalog:
        if not inputs.catalog:
            raise InputError(f"free-text systems {needs_catalog} need a catalog")
        index = build_index(inputs.catalog, inputs.matcher_config)
    runs: dict[str, RankedRun] = {}
    for source in inputs.systems:
        if source.form == "id":
            runs[source.system_id] = RankedRun(
                source.system_id,
                {u: tuple(items) for u, items in source.rankings.items()},  # type: ignore[union-attr]
            )
        else:
            runs[source.system_id] = resolve_run(
                source.texts, index, inputs.matcher_config, source.system_id  # type: ignore[arg-type]
            )
    return runs


# ---------------------------------------------------------------------------
# eval


@dataclass
class SystemReport:
    system_id: str
    effectiveness: RunEffectiveness
    means: dict[str, float]
    individual: list[MeasureResult]
    group: list[MeasureResult] | None
    n_groups: int | None
    excluded_users: int
    warnings: list[str]


@dataclass
class EvalReport:
    base: str
    k: int
    systems: list[SystemReport]

    @property
    def warnings(self) -> list[str]:
        return [w for s in self.systems for w in s.warnings]

    @property
    def has_degenerate(self) -> bool:
        return any("degenerate" in w for w in self.warnings)


def _grouped_for(
    inputs: PipelineInputs, base_scores: Mapping[str, float], chosen: Sequence[str]
) -> GroupedScores:
    assert inputs.attributes is not None and inputs.grouping_spec is not None
    return form_groups(inputs.attributes, inputs.grouping_spec, chosen, base_scores)


def eval_report(inputs: PipelineInputs, base: str = "ndcg") -> EvalReport:
    """Effectiveness means plus fairness batteries for every system.

    The group battery runs on the intersection of all grouping attributes;
    without an attribute table the report is individual-only.
    """
    if base not in BASE_SCORES:
        raise ParameterError("base score must be 'p' or 'ndcg'")
    runs = resolve_sources(inputs)
    reports = []
    for system_id in sorted(runs):
        eff = evaluate_run(runs[system_id], inputs.judgments, inputs.eval_config)
        scores = eff.base_scores(base)
        warnings: list[str] = []
        if eff.duplicates_dropped:
            warnings.append(
                f"{system_id}: dropped {eff.duplicates_dropped} duplicate ranked items"
            )
        individual = individual_battery(
            ScoreVector(list(scores.values())), inputs.params
        )
        group_results = None
        n_groups = None
        excluded = 0
        if inputs.attributes is not None and inputs.grouping_spec is not None:
            grouped = _grouped_for(inputs, scores, inputs.grouping_spec.attribute_names)
            group_results = group_battery(grouped, inputs.params)
            n_groups = grouped.n_groups
            excluded = grouped.excluded
            if excluded:
                warnings.append(f"{system_id}: {excluded} users lacked attributes")
            for r in group_results:
                if r.value is None:
                    warnings.append(f"{system_id}: {r.measure_id}: {r.note}")
        reports.append(
            SystemReport(
                system_id=system_id,
                effectiveness=eff,
                means=eff.mean(),
                individual=individual,
                group=group_results,
                n_groups=n_groups,
                excluded_users=excluded,
                warnings=warnings,
            )
        )
    return EvalReport(base=base, k=inputs.eval_config.k, systems=reports)


# ---------------------------------------------------------------------------
# intersectionality sweep


@dataclass(frozen=True)
class SweepCell:
    n_attributes: int
    attributes: tuple[str, ...]
    n_groups: int
    measure_id: str
    value: float


@dataclass
class SystemSweep:
    system_id: str
    cells: list[SweepCell]
    means: dict[tuple[int, str], float]  # (n_attributes, measure_id) -> mean value
    individual: list[MeasureResult]


def attribute_subsets(names: Sequence[str]) -> list[tuple[str, ...]]:
    """All nonempty attribute subsets, by size then spec order."""
    out: list[tuple[str, ...]] = []
    for a in range(1, len(names) + 1):
        out.extend(itertools.combinations(names, a))
    return out


def sweep_report(inputs: PipelineInputs, base: str = "ndcg") -> list[SystemSweep]:
    """SD/Gini/Atkinson per attribute-subset grouping, averaged per size.

    For each subset the measures run on that grouping's group-mean vector;
    the summary row per size a is the mean over the C(A, a) subsets, with
    the individual-level battery as reference.
    """
    if inputs.attributes is None or inputs.grouping_spec is None:
        raise InputError("sweep needs attributes and a grouping spec")
    runs = resolve_sources(inputs)
    names = inputs.grouping_spec.attribute_names
    subsets = attribute_subsets(names)
    sweeps = []
    for system_id in sorted(runs):
        eff = evaluate_run(runs[system_id], inputs.judgments, inputs.eval_config)
        scores = eff.base_scores(base)
        cells = []
        for subset in subsets:
            grouped = _grouped_for(inputs, scores, subset)
            means_vec = grouped.mean_vector()
            for result in individual_battery(means_vec.values, inputs.params):
                cells.append(
                    SweepCell(
                        n_attributes=len(subset),
                        attributes=subset,
                        n_groups=grouped.n_groups,
                        measure_id=result.measure_id,
                        value=float(result.value),  # type: ignore[arg-type]
                    )
                )
        means: dict[tuple[int, str], float] = {}
        for a in range(1, len(names) + 1):
            for measure_id in INDIVIDUAL_MEASURES:
                vals = [
                    c.value for c in cells if c.n_attributes == a and c.measure_id == measure_id
                ]
                means[(a, measure_id)] = sum(vals) / len(vals)
        individual = individual_battery(ScoreVector(list(scores.values())), inputs.params)
        sweeps.append(SystemSweep(system_id, cells, means, individual))
    return sweeps


# ---------------------------------------------------------------------------
# decomposition sweep


@dataclass(frozen=True)
class DecompositionRow:
    grouping_id: str
    n_groups: int
    measure_id: str
    total: float | None
    between: float | None
    within: float | None
    residual: float | None
    note: str | None = None


@dataclass
class SystemDecomposition:
    system_id: str
    rows: list[DecompositionRow]
    warnings: list[str]


def decompose_report(inputs: PipelineInputs, base: str = "ndcg") -> list[SystemDecomposition]:
    """Between/within split for every grouping in the sweep.

    Rows are ordered by group count ascending (then grouping id), with
    individual-level reference rows last. Degenerate decompositions yield a
    row with empty components and a note instead of aborting.
    """
    if inputs.attributes is None or inputs.grouping_spec is None:
        raise InputError("decomposition needs attributes and a grouping spec")
    runs = resolve_sources(inputs)
    subsets = attribute_subsets(inputs.grouping_spec.attribute_names)
    out = []
    for system_id in sorted(runs):
        eff = evaluate_run(runs[system_id], inputs.judgments, inputs.eval_config)
        scores = eff.base_scores(base)
        groupings = []
        for subset in subsets:
            grouped = _grouped_for(inputs, scores, subset)
            groupings.append(("+".join(subset), grouped))
        groupings.sort(key=lambda kv: (kv[1].n_groups, kv[0]))
        rows: list[DecompositionRow] = []
        warnings: list[str] = []
        decomposers = (
            ("sd", decompose_variance),
            ("atkinson", lambda g: decompose_atkinson(g, inputs.params.atkinson_epsilon)),
            ("gini", decompose_gini),
        )
        for grouping_id, grouped in groupings:
            for measure_id, make in decomposers:
                try:
                    d = make(grouped)
                except DegenerateMeasureError as exc:
                    rows.append(
                        DecompositionRow(
                            grouping_id, grouped.n_groups, measure_id,
                            None, None, None, None, note=str(exc),
                        )
                    )
                    warnings.append(f"{system_id}: {grouping_id}/{measure_id}: {exc}")
                    continue
                rows.append(
                    DecompositionRow(
                        grouping_id, grouped.n_groups, d.measure_id,
                        d.total, d.between, d.within, d.residual,
                    )
                )
        ind = individual_battery(ScoreVector(list(scores.values())), inputs.params)
        for r in ind:
            rows.append(
                DecompositionRow("individual", len(scores), r.measure_id, r.value, None, None, None)
            )
        out.append(SystemDecomposition(system_id, rows, warnings))
    return out


# ---------------------------------------------------------------------------
# agreement


@dataclass
class AgreementReport:
    ind_group: AgreementMatrix
    full: AgreementMatrix
    warnings: list[str]


def agreement_report(inputs: PipelineInputs, base: str = "ndcg") -> AgreementReport:
    """Kendall tau-b between fairness measures' system rankings.

    Builds the individual-vs-group matrix plus a full all-measures matrix.
    """
    if len(inputs.systems) < 2:
        raise InputError("agreement needs at least 2 systems")
    report = eval_report(inputs, base)
    if any(s.group is None for s in report.systems):
        raise InputError("agreement needs attributes and a grouping spec")
    group_values: dict[str, list[MeasureResult]] = {
        s.system_id: list(s.group or []) for s in report.systems
    }
    ind_values: dict[str, list[MeasureResult]] = {
        s.system_id: s.individual for s in report.systems
    }

    def series(prefix: str, per_system: Mapping[str, list[MeasureResult]], ids: Sequence[str]):
        out = []
        for measure_id in ids:
            values: dict[str, float | None] = {}
            orientation = "lower_better"
            for system, results in per_system.items():
                r = next(x for x in results if x.measure_id == measure_id)
                values[system] = r.value
                orientation = r.orientation
            out.append(MeasureSeries(f"{prefix}:{measure_id}", orientation, values))
        return out

    ind_series = series("ind", ind_values, INDIVIDUAL_MEASURES)
    grp_series = series("grp", group_values, GROUP_MEASURES)
    ind_group = agreement_matrix(ind_series, grp_series, inputs.agreement_threshold)
    all_series = ind_series + grp_series
    full = agreement_matrix(all_series, all_series, inputs.agreement_threshold)

    warnings = list(report.warnings)
    for series_id, reason in ind_group.excluded:
        warnings.append(f"degenerate: series {series_id} excluded ({reason})")
    for cell, cause in sorted(ind_group.undefined_cause.items()):
        warnings.append(f"degenerate: tau undefined for {cell[0]} vs {cell[1]} ({cause})")
    return AgreementReport(ind_group=ind_group, full=full, warnings=warnings)


# ---------------------------------------------------------------------------
# manifest


@dataclass
class RunManifest:
    """Paths and settings for a pipeline invocation, loaded from JSON."""

    systems: list[dict[str, str]]
    judgments: str
    attributes: str | None = None
    grouping_spec: str | None = None
    catalog: str | None = None
    eval_config: EvalConfig = field(default_factory=EvalConfig)
    params: MeasureParams = field(default_factory=MeasureParams)
    matcher_config: MatcherConfig = field(default_factory=MatcherConfig)
    agreement_threshold: float = 0.9
    base_dir: Path = Path(".")

    @classmethod
    def from_json(cls, path: str | Path) -> "RunManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InputError(f"manifest not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        systems = doc.get("systems")
        if not isinstance(systems, list) or not systems:
            raise InputError(f"{path}: manifest needs a nonempty 'systems' list")
        for entry in systems:
            if "id" not in entry or "path" not in entry:
                raise InputError(f"{path}: each system needs 'id' and 'path'")
            entry.setdefault("form", "id")
        ids = [e["id"] for e in systems]
        if len(set(ids)) != len(ids):
            raise InputError(f"{path}: duplicate system id")
        if "judgments" not in doc:
            raise InputError(f"{path}: manifest needs 'judgments'")
        eval_doc = doc.get("eval", {})
        params_doc = doc.get("measures", {})
        matcher_doc = doc.get("matcher", {})
        try:
            eval_config = EvalConfig(**eval_doc)
            params = MeasureParams(**params_doc)
            matcher_config = MatcherConfig(**matcher_doc)
        except TypeError as exc:
            raise InputError(f"{path}: {exc}") from None
        return cls(
            systems=systems,
            judgments=doc["judgments"],
            attributes=doc.get("attributes"),
            grouping_spec=doc.get("grouping_spec"),
            catalog=doc.get("catalog"),
            eval_config=eval_config,
            params=params,
            matcher_config=matcher_config,
            agreement_threshold=float(doc.get("agreement", {}).get("equivalence_threshold", 0.9)),
            base_dir=path.parent,
        )

    def _resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    def load(self) -> PipelineInputs:
        """Read every referenced file into pipeline inputs."""
        sources = []
        for entry in self.systems:
            run_path = self._resolve(entry["path"])
            if not run_path.exists():
                raise InputError(f"run file not found: {run_path}")
            if entry["form"] == "free_text":
                sources.append(
                    SystemSource(entry["id"], "free_text", texts=fio.read_free_text_run(run_path))
                )
            else:
                run = fio.read_run(run_path, entry["id"])
                sources.append(SystemSource(entry["id"], "id", rankings=run.rankings))
        judg_path = self._resolve(self.judgments)
        if not judg_path.exists():
            raise InputError(f"judgments file not found: {judg_path}")
        judgments = Judgments(fio.read_judgments(judg_path))
        attributes = None
        grouping_spec = None
        if self.attributes:
            attributes = fio.read_attributes(self._resolve(self.attributes))
        if self.grouping_spec:
            grouping_spec = fio.read_grouping_spec(self._resolve(self.grouping_spec))
        if (attributes is None) != (grouping_spec is None):
            raise InputError("attributes and grouping_spec must be given together")
        catalog = fio.read_catalog(self._resolve(self.catalog)) if self.catalog else None
        return PipelineInputs(
            systems=sources,
            judgments=judgments,
            attributes=attributes,
            grouping_spec=grouping_spec,
            catalog=catalog,
            eval_config=self.eval_config,
            params=self.params,
            matcher_config=self.matcher_config,
            agreement_threshold=self.agreement_threshold,
        )
