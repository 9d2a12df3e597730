# api/routes.py
from __future__ import annotations

import asyncio

from fastapi import APIRouter, HTTPException, Query, Request

from api.schemas import (
    AlexanderResponse,
    AnalyzeRequest,
    ErrorResponse,
    HealthResponse,
    StatusResponse,
)
from errors import AlexanderError, ConfigError, ElocusError, PresentationError, TrackingError
from group_pipeline.alexander import summarize_alexander
from group_pipeline.homology import abelianization_data
from group_pipeline.presentation import ManifoldFile, parse_presentation
from service.gate import (
    gate_busy,
    get_gate,
    release_slot,
    try_admit_now,
    try_admit_with_timeout,
)
from service.pipeline import run_analysis
from service.report import AlexanderModel, ReportModel, package_versions
from service.settings import RunConfig, ServiceSettings

router = APIRouter()

_INPUT_ERRORS = (PresentationError, AlexanderError, ConfigError)


@router.get("/health", response_model=HealthResponse, tags=["system"])
def health():
    """
    Report the health status of the service.
    It returns ok as long as the service is running normally.
    """
    return HealthResponse(ok=True, version=package_versions()["elocus"])


@router.get("/jobs/status", response_model=StatusResponse, tags=["system"])
def jobs_status():
    return StatusResponse(job_slots=get_gate().slots, busy=gate_busy())


@router.post(
    "/alexander",
    response_model=AlexanderResponse,
    tags=["invariants"],
    responses={
        400: {"model": ErrorResponse, "description": "Unusable presentation"},
        422: {"model": ErrorResponse, "description": "Degenerate Alexander matrix"},
    },
    summary="Alexander polynomial, unit-circle roots and Alexander points",
)
async def alexander_endpoint(manifold: ManifoldFile) -> AlexanderResponse:
    def _compute() -> AlexanderResponse:
        p = parse_presentation(manifold)
        h = abelianization_data(p)
        s = summarize_alexander(p, h)
        return AlexanderResponse(
            name=p.name, torsion=list(h.torsion), k=h.k, alexander=AlexanderModel.from_summary(s)
        )

    try:
        return await asyncio.to_thread(_compute)
    except PresentationError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except AlexanderError as e:
        raise HTTPException(status_code=422, detail=str(e))


@router.post(
    "/analyze",
    response_model=ReportModel,
    tags=["pipeline"],
    responses={
        400: {"model": ErrorResponse, "description": "Unusable presentation or configuration"},
        429: {"model": ErrorResponse, "description": "Busy; admission gate full"},
        500: {"model": ErrorResponse, "description": "Tracking failed"},
        503: {"model": ErrorResponse, "description": "Still busy after waiting"},
    },
    summary="Run the locus pipeline and return the orderability report",
)
async def analyze_endpoint(
    request: Request,
    body: AnalyzeRequest,
    wait_if_busy: bool = Query(
        False,
        description="If false, reject the request immediately when another job is running"),
    timeout_s: float = Query(
        0.0, ge=0.0, le=600.0,
        description="Max seconds to wait if busy (only used when wait_if_busy=True)"),
) -> ReportModel:
    """
    Analyze a manifold given inline and return the JSON report. Sampling
    parameters default to the service settings.
    """
    s: ServiceSettings = request.app.state.settings

    # Admission policy; an admitted request holds its slot until it returns
    if not wait_if_busy:
        if not await try_admit_now():
            raise HTTPException(
                status_code=429,
                detail="another analysis is running; try again shortly",
                headers={"Retry-After": "15"},
            )
    elif not await try_admit_with_timeout(timeout_s=timeout_s):
        raise HTTPException(
            status_code=503,
            detail=f"analysis slots stayed busy for {timeout_s:.1f} seconds; try again later",
            headers={"Retry-After": "30"},
        )

    try:
        try:
            p = parse_presentation(body.manifold)
            cfg = RunConfig(
                n_samples=body.n_samples or s.n_samples,
                seed_attempts=body.seed_attempts or s.seed_attempts,
                polish_bits=body.polish_bits or s.polish_bits,
                sym_range=s.sym_range if body.sym_range is None else body.sym_range,
                rng_seed=body.rng_seed,
                assume_small=body.assume_small,
                workers=s.workers,
            )
        except PresentationError as e:
            raise HTTPException(status_code=400, detail=str(e))
        except ValueError as e:
            raise HTTPException(status_code=400, detail=f"invalid configuration: {e}")

        try:
            result = await asyncio.to_thread(run_analysis, cfg, p)
        except _INPUT_ERRORS as e:
            raise HTTPException(status_code=400, detail=str(e))
        except TrackingError as e:
            raise HTTPException(status_code=500, detail=f"tracking failed: {e}")
        except ElocusError as e:
            raise HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")
        return result.report_model
    finally:
        release_slot()
