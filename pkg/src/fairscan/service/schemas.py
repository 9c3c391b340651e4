"""Pydantic request/response models for the service endpoints.

Payloads carry data inline (parsed file contents), never server-side paths,
so the service stays stateless and the CLI can run the same requests
in-process or against a remote instance.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class MeasureParamsIn(BaseModel):
    atkinson_epsilon: float = 0.5
    gce_beta: float = 2.0
    smoothing: float = 1e-6
    worst_fraction: float = 0.25
    kl_reverse: bool = False


class EvalConfigIn(BaseModel):
    k: int = 10
    mrr_full_list: bool = False


class MatcherConfigIn(BaseModel):
    ngram_size: int = 3
    similarity_threshold: float = 0.75


class GroupingRuleIn(BaseModel):
    name: str
    type: Literal["passthrough", "map", "bins"]
    mapping: Optional[dict[str, str]] = None
    edges: Optional[list[float]] = None
    labels: Optional[list[str]] = None


class GroupingSpecIn(BaseModel):
    attributes: list[GroupingRuleIn]


class SystemRunIn(BaseModel):
    id: str
    form: Literal["id", "free_text"] = "id"
    rankings: Optional[dict[str, list[str]]] = None
    texts: Optional[dict[str, list[str]]] = None


class PipelinePayload(BaseModel):
    """Shared body of the eval / sweep / decompose / agree commands."""

    systems: list[SystemRunIn]
    judgments: dict[str, list[str]]
    attributes: Optional[dict[str, dict[str, str]]] = None
    grouping_spec: Optional[GroupingSpecIn] = None
    catalog: Optional[list[tuple[str, str]]] = None
    base: Literal["p", "ndcg"] = "ndcg"
    eval: EvalConfigIn = Field(default_factory=EvalConfigIn)
    measures: MeasureParamsIn = Field(default_factory=MeasureParamsIn)
    matcher: MatcherConfigIn = Field(default_factory=MatcherConfigIn)
    agreement_threshold: float = 0.9


class MeasureResultOut(BaseModel):
    measure_id: str
    value: Optional[float]
    orientation: str
    subject_kind: str
    params: dict[str, object] = Field(default_factory=dict)
    note: Optional[str] = None


class UserEffectivenessOut(BaseModel):
    user_id: str
    hr: int
    mrr: float
    p: float
    ndcg: float


class SystemEvalOut(BaseModel):
    system_id: str
    users: list[UserEffectivenessOut]
    means: dict[str, float]
    individual: list[MeasureResultOut]
    group: Optional[list[MeasureResultOut]] = None
    n_groups: Optional[int] = None
    excluded_users: int = 0


class EvalResponse(BaseModel):
    base: str
    k: int
    systems: list[SystemEvalOut]
    warnings: list[str] = Field(default_factory=list)


class SweepCellOut(BaseModel):
    n_attributes: int
    attributes: list[str]
    n_groups: int
    measure_id: str
    value: float


class SweepMeanOut(BaseModel):
    n_attributes: int
    measure_id: str
    value: float


class SystemSweepOut(BaseModel):
    system_id: str
    cells: list[SweepCellOut]
    means: list[SweepMeanOut]
    individual: list[MeasureResultOut]


class SweepResponse(BaseModel):
    base: str
    systems: list[SystemSweepOut]
    warnings: list[str] = Field(default_factory=list)


class DecompositionRowOut(BaseModel):
    grouping_id: str
    n_groups: int
    measure_id: str
    total: Optional[float]
    between: Optional[float]
    within: Optional[float]
    residual: Optional[float]
    note: Optional[str] = None


class SystemDecompositionOut(BaseModel):
    system_id: str
    rows: list[DecompositionRowOut]


class DecomposeResponse(BaseModel):
    base: str
    systems: list[SystemDecompositionOut]
    warnings: list[str] = Field(default_factory=list)


class MatrixOut(BaseModel):
    rows: list[str]
    cols: list[str]
    cells: list[list[Optional[float]]]
    undefined: dict[str, str] = Field(default_factory=dict)  # "row|col" -> cause
    excluded: list[list[str]] = Field(default_factory=list)  # [series_id, reason]


class AgreeResponse(BaseModel):
    threshold: float
    ind_group: MatrixOut
    full: MatrixOut
    equivalent_pairs: list[list[object]] = Field(default_factory=list)  # [row, col, tau]
    warnings: list[str] = Field(default_factory=list)


class BatteryRequest(BaseModel):
    """Individual batteries take ``values``; group batteries take ``groups``
    (per-group member scores, needed for the F statistic)."""

    values: Optional[list[float]] = Field(default=None, min_length=1)
    subject_kind: Literal["individual", "group"] = "individual"
    groups: Optional[dict[str, list[float]]] = None
    measures: MeasureParamsIn = Field(default_factory=MeasureParamsIn)


class BatteryResponse(BaseModel):
    results: list[MeasureResultOut]


class DecompositionRequest(BaseModel):
    groups: dict[str, list[float]]
    measures: list[Literal["sd", "gini", "atkinson"]] = Field(
        default_factory=lambda: ["sd", "gini", "atkinson"]
    )
    atkinson_epsilon: float = 0.5


class DecompositionDirectOut(BaseModel):
    measure_id: str
    total: Optional[float]
    between: Optional[float]
    within: Optional[float]
    residual: Optional[float]
    identity_kind: Optional[str] = None
    note: Optional[str] = None


class DecompositionDirectResponse(BaseModel):
    results: list[DecompositionDirectOut]


class TauRequest(BaseModel):
    x: list[float] = Field(min_length=2)
    y: list[float] = Field(min_length=2)


class TauResponse(BaseModel):
    tau: Optional[float]


class EffectivenessRequest(BaseModel):
    rankings: dict[str, list[str]]
    judgments: dict[str, list[str]]
    eval: EvalConfigIn = Field(default_factory=EvalConfigIn)


class EffectivenessResponse(BaseModel):
    users: list[UserEffectivenessOut]
    means: dict[str, float]
    duplicates_dropped: int = 0


class PrepRequest(BaseModel):
    interactions: list[tuple[str, str, float, int]]
    core_level: int = 5
    split_ratio: tuple[int, int, int] = (3, 1, 1)
    min_train_interactions: int = 0


class PrepResponse(BaseModel):
    train: list[tuple[str, str, float, int]]
    val: list[tuple[str, str, float, int]]
    test: list[tuple[str, str, float, int]]
    stats: dict[str, object]


class MatchRequest(BaseModel):
    catalog: list[tuple[str, str]] = Field(min_length=1)
    texts: dict[str, list[str]]
    matcher: MatcherConfigIn = Field(default_factory=MatcherConfigIn)


class MatchedLineOut(BaseModel):
    item_id: str
    score: float


class MatchResponse(BaseModel):
    resolved: dict[str, list[MatchedLineOut]]
