# service/settings.py
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from repvar_pipeline.config import TrackingConfig

# Fields that only say where outputs go or how fast to get there
_UNHASHED = {"input", "csv", "svg", "report", "frames", "resume", "workers", "log_level"}


class RunConfig(BaseSettings):
    # Input
    input: Path | None = None

    # Sampling and precision
    n_samples: int = 128
    polish_bits: int = Field(256, ge=128, le=1024)
    seed_attempts: int = Field(400, ge=1)
    sym_range: int = Field(100, ge=0)
    rng_seed: int = 0
    branched_max: int = Field(50, ge=2)

    # Outputs
    csv: Path | None = None
    svg: Path | None = None
    report: Path | None = None
    frames: Path | None = None
    resume: Path | None = None

    # Tolerances
    tol_real: float = Field(1e-8, gt=0)
    tol_parabolic: float = Field(1e-8, gt=0)
    tol_unit_circle: float = Field(1e-9, gt=0)

    # None keeps the flag from the manifold file
    assume_small: bool | None = None

    # NOTE: default is every available core; results do not depend on it
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_prefix="ELOCUS_", env_file=None, extra="ignore")

    @field_validator("n_samples")
    @classmethod
    def _power_of_two(cls, n: int) -> int:
        if n < 4 or n & (n - 1):
            raise ValueError(f"n_samples must be a power of 2 >= 4, got {n}")
        return n

    def to_tracking_config(self) -> TrackingConfig:
        return TrackingConfig(
            n_samples=self.n_samples,
            seed_attempts=self.seed_attempts,
            polish_bits=self.polish_bits,
            rng_seed=self.rng_seed,
            workers=self.workers,
        )

    def hashed_fields(self) -> dict:
        d = self.model_dump(mode="json", exclude=_UNHASHED)
        d["tracking"] = self.to_tracking_config().to_metadata()
        return d

    def config_hash(self, input_bytes: bytes = b"") -> str:
        """
        sha256 over the canonical JSON of every result-affecting field and the
        manifold file bytes.
        """
        h = hashlib.sha256()
        h.update(json.dumps(self.hashed_fields(), sort_keys=True).encode("utf-8"))
        h.update(b"\0")
        h.update(input_bytes)
        return h.hexdigest()


class ServiceSettings(BaseSettings):
    # Admission control
    # NOTE: one analysis saturates the worker pool, so the default is a single slot
    job_slots: int = 1
    admission_timeout_s: float = 60.0

    # Defaults for HTTP analyze jobs, kept small so requests finish in seconds
    n_samples: int = 32
    seed_attempts: int = 100
    polish_bits: int = 128
    sym_range: int = 20
    workers: int = 1

    model_config = SettingsConfigDict(env_prefix="ELOCUS_SERVICE_", env_file=None, extra="ignore")
