"""FastAPI application exposing the pipeline as a stateless compute service.

Run with ``fairscan serve`` or ``uvicorn fairscan.service.app:app``.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import FairscanError, InputError, ParameterError
from . import handlers
from . import schemas as s

app = FastAPI(
    title="fairscan",
    version=__version__,
    description=(
        "Fairness evaluation for ranked recommendation outputs: effectiveness "
        "base scores, group/individual fairness measures, inequality "
        "decomposition, and measure-agreement analysis."
    ),
)


@app.exception_handler(FairscanError)
async def fairscan_error_handler(_: Request, exc: FairscanError) -> JSONResponse:
    status = 422 if isinstance(exc, (InputError, ParameterError)) else 500
    return JSONResponse(status_code=status, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok", "version": __version__}


@app.post("/prep", response_model=s.PrepResponse)
def prep(req: s.PrepRequest) -> s.PrepResponse:
    return handlers.handle_prep(req)


@app.post("/effectiveness", response_model=s.EffectivenessResponse)
def effectiveness(req: s.EffectivenessRequest) -> s.EffectivenessResponse:
    return handlers.handle_effectiveness(req)


@app.post("/battery", response_model=s.BatteryResponse)
def battery(req: s.BatteryRequest) -> s.BatteryResponse:
    return handlers.handle_battery(req)


@app.post("/decomposition", response_model=s.DecompositionDirectResponse)
def decomposition(req: s.DecompositionRequest) -> s.DecompositionDirectResponse:
    return handlers.handle_decomposition(req)


@app.post("/tau", response_model=s.TauResponse)
def tau(req: s.TauRequest) -> s.TauResponse:
    return handlers.handle_tau(req)


@app.post("/eval", response_model=s.EvalResponse)
def eval_command(req: s.PipelinePayload) -> s.EvalResponse:
    return handlers.handle_eval(req)


@app.post("/sweep", response_model=s.SweepResponse)
def sweep_command(req: s.PipelinePayload) -> s.SweepResponse:
    return handlers.handle_sweep(req)


@app.post("/decompose", response_model=s.DecomposeResponse)
def decompose_command(req: s.PipelinePayload) -> s.DecomposeResponse:
    return handlers.handle_decompose(req)


@app.post("/agree", response_model=s.AgreeResponse)
def agree_command(req: s.PipelinePayload) -> s.AgreeResponse:
    return handlers.handle_agree(req)


@app.post("/match", response_model=s.MatchResponse)
def match_command(req: s.MatchRequest) -> s.MatchResponse:
    return handlers.handle_match(req)
