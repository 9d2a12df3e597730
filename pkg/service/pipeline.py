# service/pipeline.py
from __future__ import annotations

import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator

import numpy as np

from errors import (
    ConfigError,
    ElocusError,
    LiftError,
    PeripheralTypeError,
    PolishError,
    RealityError,
)
from group_pipeline.alexander import AlexanderSummary, summarize_alexander
from group_pipeline.homology import HomologyData, abelianization_data
from group_pipeline.presentation import Presentation, parse_manifold
from locus_pipeline.covergroup import lift_representation
from locus_pipeline.export import export_csv, export_svg
from locus_pipeline.locus import (
    Locus,
    LocusSample,
    SampleFlag,
    assemble_arcs,
    eval_sample,
    pillowcase_residual,
    symmetry_discrepancy,
)
from locus_pipeline.orderability import OrderReport, build_report
from repvar_pipeline.config import TrackingConfig
from repvar_pipeline.frames import dump_frames, load_frames
from repvar_pipeline.reality import (
    RealForm,
    classify_peripheral,
    is_borderline,
    is_real_character,
    real_form,
    reality_defect,
)
from repvar_pipeline.seeding import seed_fiber
from repvar_pipeline.solver import polish
from repvar_pipeline.system import Chart, RepPoint, RepSystem, build_system
from repvar_pipeline.tracking import TrackingResult, track_circle
from service.report import ReportModel, build_report_model, package_versions, write_report
from service.settings import RunConfig
from service.workers import run_jobs, worker_pool

logger = logging.getLogger("elocus")

PRESCREEN_TOL = 1e-5
MAX_BITS = 1024


class Outcome(str, Enum):
    SAMPLE = "sample"
    COMPLEX = "complex"
    POLISH_FAILED = "polish_failed"
    COMPACT = "compact"
    UNLIFTABLE = "unliftable"
    HYPERBOLIC = "hyperbolic"
    REALITY_ERROR = "reality_error"
    ERROR = "error"


@dataclass(frozen=True)
class PointOutcome:
    kind: Outcome
    branch_id: int
    angle_index: int
    sample: LocusSample | None = None
    detail: str = ""


@dataclass
class AnalysisResult:
    presentation: Presentation
    homology: HomologyData
    alexander: AlexanderSummary
    tracking: TrackingResult | None
    locus: Locus
    report: OrderReport
    report_model: ReportModel
    config_hash: str
    outcomes: list[PointOutcome] = field(default_factory=list)


@contextmanager
def _phase(name: str) -> Iterator[None]:
    t0 = time.perf_counter()
    try:
        yield
    finally:
        logger.info("phase %s seconds=%.2f", name, time.perf_counter() - t0)


def _excluded(point: RepPoint) -> LocusSample:
    return LocusSample(
        x=math.nan,
        y=math.nan,
        flags=frozenset({SampleFlag.COMPACT_EXCLUDED}),
        branch_id=point.branch_id,
        angle_index=point.angle_index,
    )


def process_point(
    point: RepPoint,
    system: RepSystem,
    bits: int,
    tol_real: float = 1e-8,
    tol_parabolic: float = 1e-8,
) -> PointOutcome:
    """
    Take one tracked point through polish, the reality test, the real form,
    the lift and the translation numbers. Runs in a worker.

    Returns:
        PointOutcome: The sample or the reason there is none.
    """
    p = system.presentation
    b, j = point.branch_id, point.angle_index
    try:
        if reality_defect(point, p) > PRESCREEN_TOL:
            return PointOutcome(Outcome.COMPLEX, b, j)
        try:
            q = polish(point, bits, system)
        except PolishError as e:
            return PointOutcome(Outcome.POLISH_FAILED, b, j, detail=str(e))
        if not is_real_character(q, p, tol_real):
            if not is_borderline(q, p, tol_real):
                return PointOutcome(Outcome.COMPLEX, b, j)
            try:
                q = polish(q, min(2 * bits, MAX_BITS), system)
            except PolishError as e:
                return PointOutcome(Outcome.POLISH_FAILED, b, j, detail=str(e))
            if not is_real_character(q, p, tol_real):
                return PointOutcome(Outcome.COMPLEX, b, j)

        try:
            rr = real_form(q)
        except RealityError as e:
            return PointOutcome(Outcome.REALITY_ERROR, b, j, detail=str(e))
        if rr.form is RealForm.COMPACT:
            return PointOutcome(Outcome.COMPACT, b, j, sample=_excluded(q))

        try:
            lifted, euler = lift_representation(rr.matrices, p)
        except LiftError as e:
            return PointOutcome(Outcome.UNLIFTABLE, b, j, detail=str(e))
        if lifted is None:
            return PointOutcome(Outcome.UNLIFTABLE, b, j, detail=f"defects {list(euler.defects)}")

        try:
            peripheral = classify_peripheral(rr, p, tol_parabolic)
            sample = eval_sample(lifted, p, peripheral, branch_id=b, angle_index=j)
        except PeripheralTypeError as e:
            return PointOutcome(Outcome.HYPERBOLIC, b, j, detail=str(e))
        sample = replace(sample, pillowcase=pillowcase_residual(sample, q, p))
        return PointOutcome(Outcome.SAMPLE, b, j, sample=sample)
    except ElocusError as e:
        return PointOutcome(Outcome.ERROR, b, j, detail=str(e))
    except Exception as e:
        logger.exception("branch %d angle %d: unexpected failure", b, j)
        return PointOutcome(Outcome.ERROR, b, j, detail=f"{type(e).__name__}: {e}")


def _track(
    cfg: RunConfig, tcfg: TrackingConfig, system: RepSystem, config_hash: str, mapper
) -> TrackingResult:
    if cfg.resume is not None:
        with _phase("resume"):
            result, dumped_hash = load_frames(cfg.resume, system)
        if dumped_hash != config_hash:
            raise ConfigError(
                f"frame dump {cfg.resume} was written with config {dumped_hash[:12]}, "
                f"this run is {config_hash[:12]}"
            )
        if len(result.frames) != tcfg.n_samples:
            raise ConfigError(f"frame dump has {len(result.frames)} samples, expected {tcfg.n_samples}")
        return result
    with _phase("seed"):
        start = seed_fiber(system, tcfg.z0, tcfg, mapper)
    with _phase("track"):
        result = track_circle(start, tcfg, system, mapper)
    if cfg.frames is not None:
        dump_frames(result, cfg.frames, config_hash)
    return result


def run_analysis(cfg: RunConfig, presentation: Presentation | None = None) -> AnalysisResult:
    """
    Full pipeline: parse, abelianize, Alexander, seed and track, per-point
    processing, locus assembly, report and exports.

    Args:
        cfg (RunConfig): Run configuration; cfg.input is read unless a
            presentation is given.
        presentation (Presentation | None): Already parsed input.

    Returns:
        AnalysisResult: Everything computed, outputs already written.
    """
    with _phase("parse"):
        if presentation is None:
            if cfg.input is None:
                raise ConfigError("no input manifold given")
            p = parse_manifold(cfg.input)
            input_bytes = cfg.input.read_bytes()
        else:
            p = presentation
            input_bytes = repr(p).encode("utf-8")
        h = abelianization_data(p)
    with _phase("alexander"):
        alex = summarize_alexander(p, h, cfg.tol_unit_circle)

    try:
        tcfg = cfg.to_tracking_config()
    except ValueError as e:
        raise ConfigError(str(e)) from e
    config_hash = cfg.config_hash(input_bytes)
    assume_small = p.assume_small if cfg.assume_small is None else cfg.assume_small
    logger.info("%s: rank %d, %d relators, k=%d, config %s",
                p.name, p.rank, len(p.relators), h.k, config_hash[:12])

    tracking: TrackingResult | None = None
    outcomes: list[PointOutcome] = []
    with worker_pool(tcfg.workers) as mapper:
        if p.rank >= 2:
            system = build_system(p, h, np.random.default_rng(cfg.rng_seed))
            tracking = _track(cfg, tcfg, system, config_hash, mapper)
            jobs = [
                (q, system, tcfg.polish_bits, cfg.tol_real, cfg.tol_parabolic)
                for frame in tracking.frames
                for q in frame.points
                if q.chart is Chart.NORMAL
            ]
            with _phase("points"):
                outcomes = run_jobs(mapper, process_point, jobs)

    counts: dict[str, int] = {o.value: 0 for o in Outcome}
    for o in outcomes:
        counts[o.kind.value] += 1
        if o.kind not in (Outcome.SAMPLE, Outcome.COMPLEX):
            logger.debug("branch %d angle %d: %s %s", o.branch_id, o.angle_index, o.kind.value, o.detail)
    logger.info("points: %s", ", ".join(f"{k}={v}" for k, v in counts.items() if v))

    samples = [o.sample for o in outcomes if o.kind is Outcome.SAMPLE]
    excluded = [o.sample for o in outcomes if o.kind is Outcome.COMPACT]
    with _phase("assemble"):
        locus = assemble_arcs(
            samples,
            h.k,
            n_samples=tcfg.n_samples,
            start_index=tracking.start_index if tracking else 0,
            alexander_points=alex.points,
            assume_small=assume_small,
            excluded=excluded,
        )
    with _phase("report"):
        report = build_report(
            locus,
            alex,
            name=p.name,
            sym_range=cfg.sym_range,
            branched_max=cfg.branched_max,
            assume_small=assume_small,
            genus=p.genus,
            counts={f"points_{k}": v for k, v in counts.items()},
            warnings=tracking.warnings if tracking else (),
        )
    residuals = [s.pillowcase for s in samples if s.pillowcase is not None]
    meta = {
        "config": cfg.hashed_fields(),
        "versions": package_versions(),
        "assume_small": assume_small,
        "pillowcase_max": max(residuals) if residuals else None,
        "symmetry_discrepancy": symmetry_discrepancy(samples, h.k, tcfg.n_samples),
    }
    model = build_report_model(report, config_hash=config_hash, torsion=h.torsion,
                               tracking=tracking, meta=meta)

    if cfg.csv is not None:
        export_csv(locus, cfg.csv, config_hash)
    if cfg.svg is not None:
        export_svg(locus, cfg.svg, config_hash)
    if cfg.report is not None:
        write_report(model, cfg.report)
        logger.info("report written to %s", cfg.report)

    return AnalysisResult(
        presentation=p,
        homology=h,
        alexander=alex,
        tracking=tracking,
        locus=locus,
        report=report,
        report_model=model,
        config_hash=config_hash,
        outcomes=outcomes,
    )
