# repvar_pipeline/tracking.py
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from errors import TrackingError
from repvar_pipeline.config import TrackingConfig
from repvar_pipeline.seeding import FiberFrame
from repvar_pipeline.solver import newton
from repvar_pipeline.system import (
    ABELIAN_BRANCH,
    Chart,
    RepPoint,
    RepSystem,
    abelian_point,
    holonomy_mu,
    psl_key,
    same_point,
)

logger = logging.getLogger("elocus")

RADIAL_STEPS = 8
JUMP_FACTOR = 0.25  # corrector may move at most this far (relative) from the predictor
HOLONOMY_TOL = 1e-6


class EventKind(str, Enum):
    HALVING = "halving"
    GAP = "gap"
    DEAD = "dead"
    COLLISION = "collision"
    HOLONOMY = "holonomy"


@dataclass(frozen=True)
class TrackEvent:
    kind: EventKind
    branch_id: int
    angle_index: int
    detail: str = ""


@dataclass
class BranchTrack:
    branch_id: int
    points: dict[int, RepPoint] = field(default_factory=dict)
    events: list[TrackEvent] = field(default_factory=list)
    dead_at: int | None = None
    circle_start: RepPoint | None = None
    circle_end: RepPoint | None = None


@dataclass
class TrackingResult:
    frames: list[FiberFrame]
    start_index: int
    events: list[TrackEvent]
    monodromy: dict[int, int | None]
    monodromy_is_bijection: bool
    warnings: list[str] = field(default_factory=list)

    def traversal_order(self, angle_index: int) -> int:
        return (angle_index - self.start_index) % len(self.frames)


def start_index(phi0: float, n: int) -> int:
    """First sample angle 2πj/N strictly after φ0."""
    j = math.floor(phi0 * n / (2 * math.pi)) + 1
    return j


def _condition(J: np.ndarray) -> float:
    return float(np.linalg.cond(J))


class _Walker:
    """
    Follows one solution of the system along a path z(s), with a secant
    predictor and a Newton corrector, halving the step on failure.
    """

    def __init__(
        self,
        system: RepSystem,
        point: RepPoint,
        s: float,
        cfg: TrackingConfig,
        track: BranchTrack,
    ) -> None:
        self.system = system
        self.signs = point.signs
        self.cfg = cfg
        self.track = track
        self.x = np.array(point.params, dtype=complex)
        self.s = s
        self.x_prev: np.ndarray | None = None
        self.s_prev: float | None = None

    def _predict(self, s_new: float) -> np.ndarray:
        if self.x_prev is None or self.s_prev is None or self.s == self.s_prev:
            return self.x.copy()
        ratio = (s_new - self.s) / (self.s - self.s_prev)
        return self.x + ratio * (self.x - self.x_prev)

    def advance(self, s_target: float, path: Callable[[float], complex], angle_index: int) -> bool:
        cfg = self.cfg
        full = s_target - self.s
        if full == 0:
            return True
        min_h = abs(full) / 2 ** cfg.max_halvings
        h = full
        while True:
            remaining = s_target - self.s
            if abs(remaining) <= 1e-15 * (1 + abs(s_target)):
                return True
            if abs(h) > abs(remaining):
                h = remaining
            s_new = self.s + h
            pred = self._predict(s_new)
            res = newton(
                self.system, pred, path(s_new), self.signs,
                max_iter=cfg.max_newton, tol=cfg.residual_tol * 1e-2,
            )
            scale = 1.0 + float(np.max(np.abs(self.x)))
            ok = (
                res.converged
                and res.residual < cfg.residual_tol
                and float(np.max(np.abs(res.x - pred))) < JUMP_FACTOR * scale
            )
            if ok:
                cond = _condition(self.system.jacobian(res.x, path(s_new), self.signs))
                if cond > cfg.cond_limit:
                    ok = False
                    reason = f"cond={cond:.2e}"
            else:
                reason = f"residual={res.residual:.2e}"
            if ok:
                self.x_prev, self.s_prev = self.x, self.s
                self.x, self.s = res.x, s_new
                if abs(2 * h) <= abs(full):
                    h *= 2
                continue
            h /= 2
            self.track.events.append(
                TrackEvent(EventKind.HALVING, self.track.branch_id, angle_index, reason)
            )
            logger.debug(
                "branch %d angle %d: halving step to %.3g (%s)",
                self.track.branch_id, angle_index, h, reason,
            )
            if abs(h) < min_h:
                return False

    def point(self, z: complex, angle_index: int) -> RepPoint:
        q = self.system.make_point(
            self.x, z, self.signs, branch_id=self.track.branch_id, angle_index=angle_index,
        )
        drift = abs(holonomy_mu(q, self.system.presentation, reference=z) - z)
        if drift > HOLONOMY_TOL:
            self.track.events.append(TrackEvent(
                EventKind.HOLONOMY, self.track.branch_id, angle_index, f"drift={drift:.2e}"
            ))
            logger.warning("branch %d angle %d: meridian holonomy off by %.2e",
                           self.track.branch_id, angle_index, drift)
        return q


def track_branch(
    system: RepSystem, start: RepPoint, z0: complex, cfg: TrackingConfig
) -> BranchTrack:
    """
    Track one non-abelian branch: radially from z0 to the unit circle, then once
    around it, recording the point at every sample angle. Runs in a worker.

    Returns:
        BranchTrack: Points per angle index, events and the death angle if any.
    """
    n = cfg.n_samples
    track = BranchTrack(branch_id=start.branch_id)
    phi0 = cmath.phase(z0)
    r0 = abs(z0)
    j0 = start_index(phi0, n)
    walker = _Walker(system, start, r0, cfg, track)

    def radial(s: float) -> complex:
        return s * cmath.exp(1j * phi0)

    for i in range(1, RADIAL_STEPS + 1):
        r = r0 + (1.0 - r0) * i / RADIAL_STEPS
        if not walker.advance(r, radial, j0 % n):
            track.dead_at = j0 % n
            track.events.append(TrackEvent(EventKind.DEAD, track.branch_id, j0 % n, "radial"))
            return track
    track.circle_start = walker.point(cmath.exp(1j * phi0), -1)

    def circle(s: float) -> complex:
        return cmath.exp(1j * s)

    # restart the secant on the new path
    walker.s, walker.x_prev, walker.s_prev = phi0, None, None
    j = j0
    last = j0 + n - 1
    while j <= last:
        phi = 2 * math.pi * j / n
        if walker.advance(phi, circle, j % n):
            track.points[j % n] = walker.point(circle(phi), j % n)
            j += 1
            continue
        # leap over the troublesome sample to the next one
        nxt = j + 1
        if nxt > last and walker.advance(phi0 + 2 * math.pi, circle, j % n):
            # the closing sample sits at z = 1, where the chart can be singular
            track.events.append(TrackEvent(EventKind.GAP, track.branch_id, j % n))
            logger.info("branch %d: gap at angle %d", track.branch_id, j % n)
            track.circle_end = walker.point(cmath.exp(1j * phi0), -1)
            return track
        if nxt <= last and walker.advance(2 * math.pi * nxt / n, circle, nxt % n):
            track.events.append(TrackEvent(EventKind.GAP, track.branch_id, j % n))
            logger.info("branch %d: gap at angle %d", track.branch_id, j % n)
            track.points[nxt % n] = walker.point(circle(2 * math.pi * nxt / n), nxt % n)
            j = nxt + 1
            continue
        track.dead_at = j % n
        track.events.append(TrackEvent(EventKind.DEAD, track.branch_id, j % n))
        logger.warning("branch %d died at angle %d", track.branch_id, j % n)
        return track

    if walker.advance(phi0 + 2 * math.pi, circle, last % n):
        track.circle_end = walker.point(cmath.exp(1j * phi0), -1)
    return track


def _monodromy(tracks: list[BranchTrack], tol: float) -> tuple[dict[int, int | None], bool]:
    starts = {t.branch_id: psl_key(t.circle_start.matrices) for t in tracks if t.circle_start}
    mapping: dict[int, int | None] = {}
    for t in tracks:
        if t.circle_end is None:
            # a branch that never closed up has no image
            mapping[t.branch_id] = None
            continue
        key = psl_key(t.circle_end.matrices)
        match = [b for b, k in starts.items() if same_point(key, k, tol)]
        mapping[t.branch_id] = match[0] if len(match) == 1 else None
    images = [v for v in mapping.values()]
    bijective = (
        None not in images
        and len(set(images)) == len(images)
        and set(images) == set(mapping)
    )
    return mapping, bijective


def track_circle(
    start: FiberFrame,
    cfg: TrackingConfig,
    system: RepSystem,
    mapper: Callable[[Callable, Iterable[tuple]], list] | None = None,
) -> TrackingResult:
    """
    Follow every branch of the start fiber around the unit circle.

    Args:
        start (FiberFrame): Seeded fiber over cfg.z0 (branch 0 abelian).
        cfg (TrackingConfig): Sampling and step control.
        system (RepSystem): Equations.
        mapper: starmap-like callable used to fan branches out to workers.

    Returns:
        TrackingResult: One frame per sample angle 0..N-1, events and monodromy.
    """
    n = cfg.n_samples
    z0 = start.target
    branches = [q for q in start.points if q.chart is Chart.NORMAL]
    jobs = [(system, q, z0, cfg) for q in branches]
    if mapper is None:
        tracks = [track_branch(*job) for job in jobs]
    else:
        tracks = mapper(track_branch, jobs)

    j0 = start_index(cmath.phase(z0), n)
    if tracks and all(t.dead_at is not None for t in tracks):
        deaths = ", ".join(f"branch {t.branch_id} at angle {t.dead_at}" for t in tracks)
        raise TrackingError(f"all {len(tracks)} non-abelian branches died ({deaths})")

    events = [e for t in tracks for e in t.events]
    frames: list[FiberFrame] = []
    for j in range(n):
        order = (j - j0) % n
        points = [abelian_point(system.homology, 2 * math.pi * j / n, angle_index=j)]
        dead = []
        for t in tracks:
            if j in t.points:
                points.append(t.points[j])
            elif t.dead_at is not None and order >= (t.dead_at - j0) % n:
                dead.append(t.branch_id)
        frames.append(FiberFrame(angle_index=j, target=cmath.exp(2j * math.pi * j / n),
                                 points=points, dead_branches=dead))

        nonab = [q for q in points if q.branch_id != ABELIAN_BRANCH]
        keys = [psl_key(q.matrices) for q in nonab]
        for a in range(len(nonab)):
            for b in range(a + 1, len(nonab)):
                if same_point(keys[a], keys[b], cfg.dedup_tol):
                    ev = TrackEvent(EventKind.COLLISION, nonab[a].branch_id, j,
                                    f"meets branch {nonab[b].branch_id}")
                    events.append(ev)
                    logger.warning("angle %d: branches %d and %d collide",
                                   j, nonab[a].branch_id, nonab[b].branch_id)

    mapping, bijective = _monodromy(tracks, cfg.dedup_tol * 100)
    alive = sum(1 for t in tracks if t.dead_at is None)
    gaps = sum(1 for e in events if e.kind is EventKind.GAP)
    logger.info(
        "tracked %d branches over %d angles: %d alive, %d dead, %d gaps, monodromy %s",
        len(tracks), n, alive, len(tracks) - alive, gaps,
        "bijective" if bijective else "NOT bijective",
    )
    result = TrackingResult(
        frames=frames,
        start_index=j0 % n,
        events=events,
        monodromy=mapping,
        monodromy_is_bijection=bijective,
        warnings=list(start.warnings),
    )
    if tracks and not bijective:
        result.warnings.append("monodromy_not_bijective")
    return result
