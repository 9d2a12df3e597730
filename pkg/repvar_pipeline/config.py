# repvar_pipeline/config.py
from __future__ import annotations

import cmath
from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class TrackingConfig:
    n_samples: int = 128
    seed_attempts: int = 400
    dedup_tol: float = 1e-6
    max_halvings: int = 12
    polish_bits: int = 256
    rng_seed: int = 0

    # Start of the circle walk: off the circle, away from low-order roots of unity
    z0: complex = 0.99 * cmath.exp(0.17j)
    max_newton: int = 8  # corrector iterations per step
    seed_newton: int = 60  # damped iterations per random start
    cond_limit: float = 1e12
    residual_tol: float = 1e-10
    workers: int = 1

    def __post_init__(self) -> None:
        n = self.n_samples
        if n < 4 or n & (n - 1):
            raise ValueError(f"n_samples must be a power of 2 >= 4, got {n}")
        if not 128 <= self.polish_bits <= 1024:
            raise ValueError(f"polish_bits must be in [128, 1024], got {self.polish_bits}")
        if self.seed_attempts < 1:
            raise ValueError("seed_attempts must be positive")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def to_metadata(self) -> dict:
        d = asdict(self)
        d["z0"] = [self.z0.real, self.z0.imag]
        d.pop("workers")  # scheduling never changes results
        return d
