# api/schemas.py
from __future__ import annotations

from pydantic import BaseModel, Field

from group_pipeline.presentation import ManifoldFile
from service.report import AlexanderModel


class HealthResponse(BaseModel):
    ok: bool
    version: str


class StatusResponse(BaseModel):
    job_slots: int
    busy: bool


class AlexanderResponse(BaseModel):
    name: str
    torsion: list[int]
    k: int
    alexander: AlexanderModel


class AnalyzeRequest(BaseModel):
    manifold: ManifoldFile
    n_samples: int | None = Field(None, description="sample angles N (power of 2)")
    seed_attempts: int | None = None
    polish_bits: int | None = None
    sym_range: int | None = None
    rng_seed: int = 0
    assume_small: bool | None = None


class ErrorResponse(BaseModel):
    detail: str = Field(..., examples=["analysis slots stayed busy for 60.0s; try again later."])
