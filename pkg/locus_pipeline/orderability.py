# locus_pipeline/orderability.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from group_pipeline.alexander import AlexanderPoint, AlexanderSummary
from locus_pipeline.locus import (
    Locus,
    LocusArc,
    LocusSample,
    SampleFlag,
    milnor_wood_violations,
    odd_parabolic_samples,
    off_lattice_parabolic,
    orphan_alexander_points,
)
from repvar_pipeline.system import ABELIAN_BRANCH

logger = logging.getLogger("elocus")

DEFAULT_SYM_RANGE = 100
DEFAULT_BRANCHED_MAX = 50
ORIGIN_TOL = 1e-12
MAX_PROVENANCE = 8


class Caveat(str, Enum):
    IRREDUCIBILITY_ASSUMED = "irreducibility_assumed"
    UNVERIFIED_NONIDEAL_USED = "unverified_nonideal_used"
    MISSING_COMPONENTS_POSSIBLE = "missing_components_possible"
    MONODROMY_NOT_BIJECTIVE = "monodromy_not_bijective"
    NO_NONABELIAN_SEED = "no_nonabelian_seed"


class BranchedStatus(str, Enum):
    ORDERABLE = "orderable"
    NO_WITNESS = "no_witness"
    UNVERIFIED_WITNESS = "unverified_witness"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class SlopeInterval:
    """
    Slopes r with M(r) orderable. lo == hi is a single slope; ±inf ends are
    always open, and the point slope inf stands for the meridian filling.
    """
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False
    provenance: tuple[str, ...] = ()

    def contains(self, r: float) -> bool:
        above = r > self.lo or (r == self.lo and not self.lo_open)
        below = r < self.hi or (r == self.hi and not self.hi_open)
        return above and below

    def __str__(self) -> str:
        if self.lo == self.hi:
            return "{∞}" if math.isinf(self.lo) else f"{{{self.lo:.6g}}}"
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{self.lo:.6g}, {self.hi:.6g}{right}"


@dataclass(frozen=True)
class BranchedVerdict:
    n: int
    status: BranchedStatus
    axis_crossing: bool = False
    witness: tuple[float, float] | None = None
    arc: str | None = None


@dataclass
class OrderReport:
    name: str
    k: int
    intervals: list[SlopeInterval]
    branched: dict[int, BranchedVerdict]
    caveats: list[Caveat]
    alexander: AlexanderSummary | None = None
    orphan_alexander_points: list[AlexanderPoint] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)


def _eligible(s: LocusSample) -> bool:
    return abs(s.x) > ORIGIN_TOL or abs(s.y) > ORIGIN_TOL


def _slope(x: float, y: float) -> float:
    return math.inf if x == 0 else -y / x


def _segment_slopes(
    a: tuple[float, float], b: tuple[float, float], a_open: bool, b_open: bool, ref: str
) -> list[SlopeInterval]:
    """
    Slopes of the lines through the origin meeting the segment ab, as one or
    two intervals (two when the sweep passes the vertical).
    """
    pa = math.atan2(a[1], a[0])
    pb = math.atan2(b[1], b[0])
    d = (pb - pa + math.pi) % (2 * math.pi) - math.pi
    if abs(abs(d) - math.pi) < 1e-12:
        return []  # segment runs through the origin
    if d >= 0:
        lo_phi, hi_phi, lo_o, hi_o = pa, pa + d, a_open, b_open
    else:
        lo_phi, hi_phi, lo_o, hi_o = pa + d, pa, b_open, a_open

    vertical = math.pi / 2 + math.pi * math.ceil((lo_phi - math.pi / 2) / math.pi)
    if vertical > hi_phi + 1e-15:
        # tan increases on [lo_phi, hi_phi]; r = -tan reverses the order
        return [SlopeInterval(-math.tan(hi_phi), -math.tan(lo_phi), hi_o, lo_o, (ref,))]

    out = []
    at_lo = vertical - lo_phi <= 1e-15
    at_hi = hi_phi - vertical <= 1e-15
    if not at_lo:
        # m in [tan lo_phi, +inf)  ->  r in (-inf, -tan lo_phi]
        out.append(SlopeInterval(-math.inf, -math.tan(lo_phi), True, lo_o, (ref,)))
    if not at_hi:
        out.append(SlopeInterval(-math.tan(hi_phi), math.inf, hi_o, True, (ref,)))
    if not ((at_lo and lo_o) or (at_hi and hi_o)):
        out.append(SlopeInterval(math.inf, math.inf, False, False, (ref,)))
    return out


def _arc_slopes(arc: LocusArc, k: int, sym_range: int) -> Iterable[SlopeInterval]:
    samples = arc.samples
    # samples inside an admissible segment are covered by its sweep
    linked = [False] * len(samples)
    for i in range(len(samples) - 1):
        if _eligible(samples[i]) and _eligible(samples[i + 1]):
            linked[i] = linked[i + 1] = True
    for n in range(-sym_range, sym_range + 1):
        shift = n * k
        for s, covered in zip(samples, linked):
            if covered or not _eligible(s) or SampleFlag.PARABOLIC in s.flags:
                continue
            r = _slope(s.x + shift, s.y)
            yield SlopeInterval(r, r, False, False, (arc.ref,))
        for a, b in zip(samples, samples[1:]):
            if not (_eligible(a) and _eligible(b)):
                continue
            pa = (a.x + shift, a.y)
            pb = (b.x + shift, b.y)
            yield from _segment_slopes(
                pa, pb,
                SampleFlag.PARABOLIC in a.flags,
                SampleFlag.PARABOLIC in b.flags,
                arc.ref,
            )


def merge_intervals(intervals: Iterable[SlopeInterval]) -> list[SlopeInterval]:
    """Union of intervals as a sorted list of disjoint ones."""
    items = list(intervals)
    point_inf = [iv for iv in items if iv.lo == iv.hi and math.isinf(iv.lo)]
    items = [iv for iv in items if not (iv.lo == iv.hi and math.isinf(iv.lo))]
    items.sort(key=lambda iv: (iv.lo, iv.lo_open))
    merged: list[SlopeInterval] = []
    for iv in items:
        if merged:
            last = merged[-1]
            touching = iv.lo < last.hi or (
                iv.lo == last.hi and not (iv.lo_open and last.hi_open)
            )
            if touching:
                if iv.hi > last.hi:
                    hi, hi_open = iv.hi, iv.hi_open
                elif iv.hi == last.hi:
                    hi, hi_open = last.hi, last.hi_open and iv.hi_open
                else:
                    hi, hi_open = last.hi, last.hi_open
                prov = tuple(sorted(set(last.provenance) | set(iv.provenance)))[:MAX_PROVENANCE]
                merged[-1] = SlopeInterval(last.lo, hi, last.lo_open, hi_open, prov)
                continue
        merged.append(iv)
    if point_inf:
        prov = tuple(sorted({p for iv in point_inf for p in iv.provenance}))[:MAX_PROVENANCE]
        merged.append(SlopeInterval(math.inf, math.inf, False, False, prov))
    return merged


def orderable_slopes(locus: Locus, k: int | None = None, sym_range: int = DEFAULT_SYM_RANGE) -> list[SlopeInterval]:
    """
    Slopes r whose line L_r meets the locus at a nonzero, non-parabolic point.

    Args:
        locus (Locus): Assembled locus.
        k (int): Order of the longitude (defaults to locus.k).
        sym_range (int): Translates x + nk with |n| <= sym_range are included.

    Returns:
        list[SlopeInterval]: Merged, pairwise disjoint intervals.
    """
    k = locus.k if k is None else k
    pieces: list[SlopeInterval] = []
    for arc in locus.arcs:
        if arc.branch_id == ABELIAN_BRANCH:
            if any(abs(s.x - round(s.x)) > ORIGIN_TOL for s in arc.samples):
                pieces.append(SlopeInterval(0.0, 0.0, False, False, (arc.ref,)))
            continue
        pieces.extend(_arc_slopes(arc, k, sym_range))
    merged = merge_intervals(pieces)
    logger.info("orderable slopes: %d pieces merged into %d intervals", len(pieces), len(merged))
    return merged


def branched_cover_check(locus: Locus, n: int, k: int | None = None, assume_small: bool = False) -> BranchedVerdict:
    """
    Whether some non-axis arc crosses the vertical line x = 1/n at a point that
    is not known to be ideal.
    """
    k = locus.k if k is None else k
    if k != 1 or n < 2:
        return BranchedVerdict(n, BranchedStatus.NOT_APPLICABLE)
    x0 = 1.0 / n
    # the axis meets x = 1/n away from the central points; reported, never a witness
    axis = abs(x0 - round(x0)) > ORIGIN_TOL
    unverified = None
    for arc in locus.arcs:
        if arc.branch_id == ABELIAN_BRANCH:
            continue
        for a, b in zip(arc.samples, arc.samples[1:]):
            if (a.x - x0) * (b.x - x0) > 0 or a.x == b.x:
                continue
            t = (x0 - a.x) / (b.x - a.x)
            y = a.y + t * (b.y - a.y)
            if abs(y) < 1e-9:
                continue
            flagged = SampleFlag.UNVERIFIED_NONIDEAL in (a.flags | b.flags)
            if not flagged or assume_small:
                return BranchedVerdict(n, BranchedStatus.ORDERABLE, axis, (x0, y), arc.ref)
            if unverified is None:
                unverified = BranchedVerdict(n, BranchedStatus.UNVERIFIED_WITNESS, axis, (x0, y), arc.ref)
    if unverified is not None:
        return unverified
    return BranchedVerdict(n, BranchedStatus.NO_WITNESS, axis)


def build_report(
    locus: Locus,
    alexander: AlexanderSummary | None,
    *,
    name: str,
    sym_range: int = DEFAULT_SYM_RANGE,
    branched_max: int = DEFAULT_BRANCHED_MAX,
    assume_small: bool = False,
    genus: int | None = None,
    counts: Mapping[str, int] | None = None,
    warnings: Iterable[str] = (),
) -> OrderReport:
    """
    Aggregate slope intervals, branched-cover verdicts, the Alexander summary
    and caveats into one report.
    """
    intervals = orderable_slopes(locus, locus.k, sym_range)
    branched = {n: branched_cover_check(locus, n, locus.k, assume_small)
                for n in range(2, branched_max + 1)}

    caveats = [Caveat.IRREDUCIBILITY_ASSUMED]
    nonaxis = locus.samples(include_axis=False)
    if not assume_small and any(SampleFlag.UNVERIFIED_NONIDEAL in s.flags for s in nonaxis):
        caveats.append(Caveat.UNVERIFIED_NONIDEAL_USED)
    orphans = orphan_alexander_points(locus)
    if orphans:
        caveats.append(Caveat.MISSING_COMPONENTS_POSSIBLE)
    for w in warnings:
        try:
            c = Caveat(w)
        except ValueError:
            continue
        if c not in caveats:
            caveats.append(c)

    all_counts = dict(counts or {})
    all_counts.update({
        "locus_samples": len(nonaxis),
        "arcs": sum(1 for a in locus.arcs if a.branch_id != ABELIAN_BRANCH),
        "compact_excluded": len(locus.excluded),
        "parabolic_samples": sum(1 for s in nonaxis if SampleFlag.PARABOLIC in s.flags),
        "parabolic_off_lattice": len(off_lattice_parabolic(locus)),
        "parabolic_odd_longitude": len(odd_parabolic_samples(locus)),
        "milnor_wood_violations": len(milnor_wood_violations(locus, genus)),
    })
    report = OrderReport(
        name=name,
        k=locus.k,
        intervals=intervals,
        branched=branched,
        caveats=caveats,
        alexander=alexander,
        orphan_alexander_points=orphans,
        counts=all_counts,
    )
    ok = sum(1 for v in branched.values() if v.status is BranchedStatus.ORDERABLE)
    logger.info(
        "report %s: %d intervals, %d/%d branched verdicts orderable, caveats %s",
        name, len(intervals), ok, len(branched), [c.value for c in caveats],
    )
    return report
