# repvar_pipeline/seeding.py
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from repvar_pipeline.config import TrackingConfig
from repvar_pipeline.solver import newton
from repvar_pipeline.system import (
    RepPoint,
    RepSystem,
    abelian_point,
    commutator_residual,
    psl_key,
    same_point,
    trace,
)

logger = logging.getLogger("elocus")

SEED_FRAME_INDEX = -1
ANNULUS = (0.2, 5.0)
PARAM_BOUND = 1e4
SMALL_ORDER = 12
SEED_CHUNKS = 16  # random streams must not depend on the worker count


@dataclass
class FiberFrame:
    angle_index: int
    target: complex
    points: list[RepPoint]
    dead_branches: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def branch(self, branch_id: int) -> RepPoint | None:
        return next((q for q in self.points if q.branch_id == branch_id), None)


def _random_start(system: RepSystem, z0: complex, rng: np.random.Generator) -> np.ndarray:
    n = system.n_unknowns
    modulus = rng.uniform(*ANNULUS, size=n)
    arg = rng.uniform(-math.pi, math.pi, size=n)
    x = modulus * np.exp(1j * arg)
    nm = system.n_matrix_unknowns
    c0, c1 = system.chart_vector
    v = x[nm:nm + 2]
    scale = c0 * v[0] + c1 * v[1]
    if abs(scale) > 1e-8:
        x[nm:nm + 2] = v / scale
    x[nm + 2] = cmath.sqrt(z0) * (1 if rng.random() < 0.5 else -1)
    return x


def _is_irreducible(mats: list[np.ndarray], tol: float = 1e-6) -> bool:
    # some pair of generators has tr[g, h] != 2
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            A, B = mats[i], mats[j]
            tA, tB, tAB = trace(A), trace(B), trace(A @ B)
            comm = tA * tA + tB * tB + tAB * tAB - tA * tB * tAB - 2
            if abs(comm - 2) > tol * (1 + abs(comm)):
                return True
    return False


def _accept(system: RepSystem, x: np.ndarray, residual: float, cfg: TrackingConfig) -> bool:
    if not residual < cfg.residual_tol:
        return False
    if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > PARAM_BOUND:
        return False
    if abs(x[0]) < 1 / PARAM_BOUND or abs(x[1]) < 1 / PARAM_BOUND:
        return False
    mats = system.matrices(x)
    if commutator_residual(mats, system.presentation) > 1e-8:
        return False
    return _is_irreducible(mats)


def seed_attempts(
    system: RepSystem,
    z0: complex,
    cfg: TrackingConfig,
    seed_seq: np.random.SeedSequence,
    attempts: int,
) -> list[tuple[tuple[int, ...], np.ndarray, float]]:
    """
    One chunk of random Newton starts. Runs in a worker process.

    Returns:
        list: (signs, solution, residual) for every accepted limit.
    """
    rng = np.random.default_rng(seed_seq)
    found = []
    for _ in range(attempts):
        for signs in system.sign_choices:
            x0 = _random_start(system, z0, rng)
            res = newton(
                system, x0, z0, signs,
                max_iter=cfg.seed_newton, tol=cfg.residual_tol * 1e-2, damped=True,
            )
            if res.converged and _accept(system, res.x, res.residual, cfg):
                found.append((signs, res.x, res.residual))
    return found


def _check_start(z0: complex) -> None:
    if not 0.9 <= abs(z0) <= 1.1:
        raise ValueError(f"start holonomy {z0} is not near the unit circle")
    phase = cmath.phase(z0) / (2 * math.pi)
    for q in range(1, SMALL_ORDER + 1):
        if abs(phase * q - round(phase * q)) < 1e-3:
            raise ValueError(f"start holonomy {z0} is close to a root of unity of order {q}")


def seed_fiber(
    system: RepSystem,
    z0: complex,
    cfg: TrackingConfig,
    mapper: Callable[[Callable, Iterable[tuple]], list] | None = None,
) -> FiberFrame:
    """
    Multi-start Newton on the fiber of the holonomy map over z0.

    Args:
        system (RepSystem): Normal-form equations.
        z0 (complex): Holonomy value, near the unit circle.
        cfg (TrackingConfig): Attempts, tolerances and seed.
        mapper: starmap-like callable (serial when None).

    Returns:
        FiberFrame: Deduplicated fiber; branch 0 is the abelian point.
    """
    _check_start(z0)
    n_chunks = min(SEED_CHUNKS, cfg.seed_attempts)
    base, rem = divmod(cfg.seed_attempts, n_chunks)
    seqs = np.random.SeedSequence(cfg.rng_seed).spawn(n_chunks)
    jobs = [
        (system, z0, cfg, seqs[i], base + (1 if i < rem else 0))
        for i in range(n_chunks)
    ]
    if mapper is None:
        chunks = [seed_attempts(*job) for job in jobs]
    else:
        chunks = mapper(seed_attempts, jobs)

    points: list[RepPoint] = [
        abelian_point(system.homology, -1j * cmath.log(z0), angle_index=SEED_FRAME_INDEX)
    ]
    keys: list[np.ndarray] = []
    limits = 0
    for chunk in chunks:  # chunk order is fixed, so branch numbering is deterministic
        for signs, x, _res in chunk:
            limits += 1
            key = psl_key(system.matrices(x))
            if any(same_point(key, k, cfg.dedup_tol) for k in keys):
                continue
            keys.append(key)
            points.append(system.make_point(
                x, z0, signs, branch_id=len(points), angle_index=SEED_FRAME_INDEX,
            ))

    frame = FiberFrame(angle_index=SEED_FRAME_INDEX, target=z0, points=points)
    n_nonabelian = len(points) - 1
    logger.info(
        "seeded fiber over z0=%.4f%+.4fi: %d Newton limits, %d distinct non-abelian points",
        z0.real, z0.imag, limits, n_nonabelian,
    )
    if n_nonabelian == 0:
        msg = "no non-abelian points found in the start fiber; components may be missing"
        logger.warning(msg)
        frame.warnings.append("no_nonabelian_seed")
    return frame
