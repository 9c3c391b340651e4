"""Request handlers shared by the HTTP endpoints and the in-process CLI.

Each handler converts a request model to core types, runs the pipeline, and
packs the result back into a response model. Core exceptions propagate;
the HTTP layer translates them to error responses.
"""

from __future__ import annotations

from .. import pipeline
from ..agreement import AgreementMatrix, kendall_tau_b
from ..decomposition import decompose_atkinson, decompose_gini, decompose_variance
from ..effectiveness import EvalConfig, Judgments, RankedRun, evaluate_run
from ..errors import DegenerateMeasureError, InputError
from ..fairness import MeasureParams, MeasureResult, ScoreVector, group_battery, individual_battery
from ..grouping import GroupedScores
from ..io import parse_grouping_spec
from ..matcher import MatcherConfig, best_match, build_index
from ..prep import Interaction, PrepConfig, preprocess
from . import schemas as s


def _params(model: s.MeasureParamsIn) -> MeasureParams:
    return MeasureParams(**model.model_dump())


def _eval_config(model: s.EvalConfigIn) -> EvalConfig:
    return EvalConfig(**model.model_dump())


def _matcher_config(model: s.MatcherConfigIn) -> MatcherConfig:
    return MatcherConfig(**model.model_dump())


def _inputs(payload: s.PipelinePayload) -> pipeline.PipelineInputs:
    sources = []
    for sys_in in payload.systems:
        sources.append(
            pipeline.SystemSource(
                system_id=sys_in.id,
                form=sys_in.form,
                rankings=sys_in.rankings,
                texts=sys_in.texts,
            )
        )
    grouping_spec = None
    if payload.grouping_spec is not None:
        grouping_spec = parse_grouping_spec(payload.grouping_spec.model_dump(exclude_none=True))
    return pipeline.PipelineInputs(
        systems=sources,
        judgments=Judgments({u: frozenset(items) for u, items in payload.judgments.items()}),
        attributes=payload.attributes,
        grouping_spec=grouping_spec,
        catalog=payload.catalog,
        eval_config=_eval_config(payload.eval),
        params=_params(payload.measures),
        matcher_config=_matcher_config(payload.matcher),
        agreement_threshold=payload.agreement_threshold,
    )


def _result_out(r: MeasureResult) -> s.MeasureResultOut:
    return s.MeasureResultOut(
        measure_id=r.measure_id,
        value=r.value,
        orientation=r.orientation,
        subject_kind=r.subject_kind,
        params=dict(r.params),
        note=r.note,
    )


def handle_eval(payload: s.PipelinePayload) -> s.EvalResponse:
    report = pipeline.eval_report(_inputs(payload), payload.base)
    systems = []
    for sys_report in report.systems:
        systems.append(
            s.SystemEvalOut(
                system_id=sys_report.system_id,
                users=[
                    s.UserEffectivenessOut(
                        user_id=u.user_id, hr=u.hr, mrr=u.mrr, p=u.precision, ndcg=u.ndcg
                    )
                    for u in sys_report.effectiveness.per_user
                ],
                means=sys_report.means,
                individual=[_result_out(r) for r in sys_report.individual],
                group=[_result_out(r) for r in sys_report.group] if sys_report.group else None,
                n_groups=sys_report.n_groups,
                excluded_users=sys_report.excluded_users,
            )
        )
    return s.EvalResponse(base=report.base, k=report.k, systems=systems, warnings=report.warnings)


def handle_sweep(payload: s.PipelinePayload) -> s.SweepResponse:
    sweeps = pipeline.sweep_report(_inputs(payload), payload.base)
    systems = []
    for sweep in sweeps:
        systems.append(
            s.SystemSweepOut(
                system_id=sweep.system_id,
                cells=[
                    s.SweepCellOut(
                        n_attributes=c.n_attributes,
                        attributes=list(c.attributes),
                        n_groups=c.n_groups,
                        measure_id=c.measure_id,
                        value=c.value,
                    )
                    for c in sweep.cells
                ],
                means=[
                    s.SweepMeanOut(n_attributes=a, measure_id=m, value=v)
                    for (a, m), v in sorted(sweep.means.items())
                ],
                individual=[_result_out(r) for r in sweep.individual],
            )
        )
    return s.SweepResponse(base=payload.base, systems=systems)


def handle_decompose(payload: s.PipelinePayload) -> s.DecomposeResponse:
    decomps = pipeline.decompose_report(_inputs(payload), payload.base)
    systems = []
    warnings: list[str] = []
    for d in decomps:
        systems.append(
            s.SystemDecompositionOut(
                system_id=d.system_id,
                rows=[
                    s.DecompositionRowOut(
                        grouping_id=r.grouping_id,
                        n_groups=r.n_groups,
                        measure_id=r.measure_id,
                        total=r.total,
                        between=r.between,
                        within=r.within,
                        residual=r.residual,
                        note=r.note,
                    )
                    for r in d.rows
                ],
            )
        )
        warnings.extend(d.warnings)
    return s.DecomposeResponse(base=payload.base, systems=systems, warnings=warnings)


def _matrix_out(m: AgreementMatrix) -> s.MatrixOut:
    return s.MatrixOut(
        rows=list(m.row_ids),
        cols=list(m.col_ids),
        cells=[[m.cells[(r, c)] for c in m.col_ids] for r in m.row_ids],
        undefined={f"{r}|{c}": cause for (r, c), cause in sorted(m.undefined_cause.items())},
        excluded=[[sid, reason] for sid, reason in m.excluded],
    )


def handle_agree(payload: s.PipelinePayload) -> s.AgreeResponse:
    report = pipeline.agreement_report(_inputs(payload), payload.base)
    return s.AgreeResponse(
        threshold=payload.agreement_threshold,
        ind_group=_matrix_out(report.ind_group),
        full=_matrix_out(report.full),
        equivalent_pairs=[[r, c, tau] for r, c, tau in report.ind_group.equivalent_pairs()],
        warnings=report.warnings,
    )


def handle_battery(req: s.BatteryRequest) -> s.BatteryResponse:
    params = _params(req.measures)
    if req.subject_kind == "group":
        if not req.groups:
            raise InputError("group battery needs per-group member scores in 'groups'")
        results = group_battery(GroupedScores(req.groups), params)
    else:
        if req.values is None:
            raise InputError("individual battery needs 'values'")
        results = individual_battery(ScoreVector(req.values), params)
    return s.BatteryResponse(results=[_result_out(r) for r in results])


def handle_decomposition(req: s.DecompositionRequest) -> s.DecompositionDirectResponse:
    grouped = GroupedScores(req.groups)
    makers = {
        "sd": decompose_variance,
        "gini": decompose_gini,
        "atkinson": lambda g: decompose_atkinson(g, req.atkinson_epsilon),
    }
    results = []
    for measure_id in req.measures:
        try:
            d = makers[measure_id](grouped)
        except DegenerateMeasureError as exc:
            results.append(
                s.DecompositionDirectOut(
                    measure_id=measure_id, total=None, between=None, within=None,
                    residual=None, note=str(exc),
                )
            )
            continue
        results.append(
            s.DecompositionDirectOut(
                measure_id=d.measure_id, total=d.total, between=d.between,
                within=d.within, residual=d.residual, identity_kind=d.identity_kind,
            )
        )
    return s.DecompositionDirectResponse(results=results)


def handle_tau(req: s.TauRequest) -> s.TauResponse:
    return s.TauResponse(tau=kendall_tau_b(req.x, req.y))


def handle_effectiveness(req: s.EffectivenessRequest) -> s.EffectivenessResponse:
    run = RankedRun("", {u: tuple(items) for u, items in req.rankings.items()})
    judgments = Judgments({u: frozenset(items) for u, items in req.judgments.items()})
    eff = evaluate_run(run, judgments, _eval_config(req.eval))
    return s.EffectivenessResponse(
        users=[
            s.UserEffectivenessOut(user_id=u.user_id, hr=u.hr, mrr=u.mrr, p=u.precision, ndcg=u.ndcg)
            for u in eff.per_user
        ],
        means=eff.mean(),
        duplicates_dropped=eff.duplicates_dropped,
    )


def handle_prep(req: s.PrepRequest) -> s.PrepResponse:
    config = PrepConfig(
        core_level=req.core_level,
        split_ratio=req.split_ratio,
        min_train_interactions=req.min_train_interactions,
    )
    rows = [Interaction(u, i, w, ts) for u, i, w, ts in req.interactions]
    split, stats = preprocess(rows, config)

    def pack(rows):
        return [(r.user_id, r.item_id, r.weight, r.timestamp) for r in rows]

    return s.PrepResponse(
        train=pack(split.train), val=pack(split.val), test=pack(split.test), stats=stats
    )


def handle_match(req: s.MatchRequest) -> s.MatchResponse:
    from ..matcher import resolve_run

    config = _matcher_config(req.matcher)
    index = build_index(req.catalog, config)
    run = resolve_run(req.texts, index, config)
    resolved = {}
    for user, items in run.rankings.items():
        scores = run.scores[user] if run.scores else (0.0,) * len(items)
        resolved[user] = [
            s.MatchedLineOut(item_id=item, score=score) for item, score in zip(items, scores)
        ]
    return s.MatchResponse(resolved=resolved)
