# locus_pipeline/locus.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import mpmath as mp
import numpy as np

from errors import PeripheralTypeError
from group_pipeline.alexander import AlexanderPoint
from group_pipeline.presentation import Presentation
from locus_pipeline.covergroup import LiftedRep, compose_word, translation_number
from repvar_pipeline.reality import PeripheralType
from repvar_pipeline.system import ABELIAN_BRANCH, RepPoint, trace, word_matrix

logger = logging.getLogger("elocus")

LATTICE_TOL = 1e-3
AXIS_SAMPLES_PER_UNIT = 64
CONTINUITY_FACTOR = 10.0
FALLBACK_STEP = 0.5


class SampleFlag(str, Enum):
    PARABOLIC = "parabolic"
    CENTRAL = "central"
    COMPACT_EXCLUDED = "compact_excluded"
    UNVERIFIED_NONIDEAL = "unverified_nonideal"


@dataclass(frozen=True, eq=False)
class LocusSample:
    x: float
    y: float
    flags: frozenset[SampleFlag] = frozenset()
    branch_id: int = ABELIAN_BRANCH
    angle_index: int = -1
    source: LiftedRep | None = field(default=None, repr=False)
    pillowcase: float | None = None

    @property
    def is_axis(self) -> bool:
        return self.branch_id == ABELIAN_BRANCH

    def with_flags(self, *extra: SampleFlag) -> "LocusSample":
        return replace(self, flags=self.flags | frozenset(extra))


@dataclass(frozen=True)
class LocusArc:
    branch_id: int
    index: int
    samples: tuple[LocusSample, ...]
    start_type: str = ""
    end_type: str = ""

    @property
    def ref(self) -> str:
        return f"{self.branch_id}:{self.index}"


@dataclass(frozen=True)
class Locus:
    arcs: tuple[LocusArc, ...]
    alexander_points: tuple[AlexanderPoint, ...]
    k: int
    excluded: tuple[LocusSample, ...] = ()

    @property
    def strip(self) -> tuple[float, float]:
        return 0.0, float(self.k)

    def samples(self, include_axis: bool = True) -> list[LocusSample]:
        return [s for a in self.arcs if include_axis or a.branch_id != ABELIAN_BRANCH
                for s in a.samples]


def _peripheral_flags(mu: PeripheralType, lam: PeripheralType) -> frozenset[SampleFlag]:
    flags: set[SampleFlag] = set()
    if PeripheralType.PARABOLIC in (mu, lam):
        flags.add(SampleFlag.PARABOLIC)
    if mu is PeripheralType.CENTRAL and lam is PeripheralType.CENTRAL:
        flags.add(SampleFlag.CENTRAL)
    return frozenset(flags)


def eval_sample(
    lift: LiftedRep,
    p: Presentation,
    peripheral: tuple[PeripheralType, PeripheralType],
    *,
    branch_id: int = ABELIAN_BRANCH,
    angle_index: int = -1,
) -> LocusSample:
    """
    Translation numbers of the lifted meridian and longitude.

    Args:
        lift (LiftedRep): Lift of a real representation.
        p (Presentation): Its presentation.
        peripheral: Types of ρ(μ) and ρ(λ) from classify_peripheral.

    Returns:
        LocusSample: (trans μ̃, trans λ̃) with parabolic / central flags.
    """
    t_mu, t_lam = peripheral
    if PeripheralType.HYPERBOLIC in (t_mu, t_lam):
        raise PeripheralTypeError(f"peripheral types ({t_mu.value}, {t_lam.value})")
    mu = compose_word(lift.generator_lifts, p.meridian)
    lam = compose_word(lift.generator_lifts, p.longitude)
    return LocusSample(
        x=translation_number(mu),
        y=translation_number(lam),
        flags=_peripheral_flags(t_mu, t_lam),
        branch_id=branch_id,
        angle_index=angle_index,
        source=lift,
    )


def normalize_sample(sample: LocusSample, k: int) -> LocusSample:
    """
    Representative in the strip 0 <= x <= k under translations by (k, 0) and
    the half-turns about the points (kn/2, 0).
    """
    x, y = sample.x, sample.y
    if x < 0:
        x, y = -x, -y
    x = float(np.mod(x, k))
    if x == 0.0 and y < 0:
        y = -y
    return replace(sample, x=x, y=y)


def mirror_sample(sample: LocusSample, k: int) -> LocusSample:
    """The image under the half-turn about (k/2, 0)."""
    return replace(sample, x=k - sample.x, y=-sample.y)


def pillowcase_point(x: float, y: float) -> tuple[float, float, float]:
    """
    Trace squares (tr² μ, tr² λ, tr² μλ) forced by translation numbers (x, y).

    The circle coordinate is θ ↦ [cos πθ : sin πθ], so the rotation by angle α
    has translation number α/π and a lift with translation number x has trace
    ±2cos(πx). Squaring drops the sign: 4cos²(πx), period 1 in x. Measuring the
    circle in whole turns instead would read x/2 and give 4cos²(2π·x/2).
    """
    return (
        4 * math.cos(math.pi * x) ** 2,
        4 * math.cos(math.pi * y) ** 2,
        4 * math.cos(math.pi * (x + y)) ** 2,
    )


def pillowcase_residual(sample: LocusSample, rep: RepPoint, p: Presentation) -> float:
    """
    Max difference between the pillowcase image of (x, y) and the trace
    squares of ρ(μ), ρ(λ), ρ(μλ).
    """
    c = pillowcase_point(sample.x, sample.y)
    with mp.workprec(max(rep.precision_bits, 53)):
        traces = []
        for w in p.peripheral_words():
            t = trace(word_matrix(rep.matrices, w))
            traces.append(complex(t * t))
    return max(abs(ci - ti) for ci, ti in zip(c, traces))


def _nearer(prev: LocusSample, cand: LocusSample, k: int) -> LocusSample:
    alt = mirror_sample(cand, k)
    d1 = math.hypot(cand.x - prev.x, cand.y - prev.y)
    d2 = math.hypot(alt.x - prev.x, alt.y - prev.y)
    return alt if d2 < d1 else cand


def _split_branch(
    samples: list[LocusSample], order: dict[int, int], k: int
) -> list[list[LocusSample]]:
    """Chain one branch's samples, choosing the orientation nearer the previous point."""
    if not samples:
        return []
    chained = [samples[0]]
    for s in samples[1:]:
        chained.append(_nearer(chained[-1], s, k))
    steps = [
        math.hypot(b.x - a.x, b.y - a.y)
        for a, b in zip(chained, chained[1:])
        if order[b.angle_index] - order[a.angle_index] == 1
    ]
    bound = CONTINUITY_FACTOR * float(np.median(steps)) if len(steps) >= 2 else FALLBACK_STEP
    bound = max(bound, 1e-9)

    arcs = [[chained[0]]]
    for a, b in zip(chained, chained[1:]):
        consecutive = order[b.angle_index] - order[a.angle_index] == 1
        if not consecutive or math.hypot(b.x - a.x, b.y - a.y) > bound:
            arcs.append([b])
        else:
            arcs[-1].append(b)
    return arcs


def _axis_arc(k: int) -> LocusArc:
    n = AXIS_SAMPLES_PER_UNIT * k
    samples = []
    for i in range(n + 1):
        x = k * i / n
        flags = frozenset({SampleFlag.CENTRAL}) if i % AXIS_SAMPLES_PER_UNIT == 0 else frozenset()
        samples.append(LocusSample(x=x, y=0.0, flags=flags, branch_id=ABELIAN_BRANCH,
                                   angle_index=i))
    return LocusArc(ABELIAN_BRANCH, 0, tuple(samples), "central", "central")


def _endpoint_type(s: LocusSample) -> str:
    if SampleFlag.PARABOLIC in s.flags:
        return "parabolic"
    if SampleFlag.CENTRAL in s.flags:
        return "central"
    return "elliptic"


def assemble_arcs(
    samples: Iterable[LocusSample],
    k: int,
    *,
    n_samples: int,
    start_index: int = 0,
    alexander_points: Sequence[AlexanderPoint] = (),
    assume_small: bool = False,
    excluded: Sequence[LocusSample] = (),
) -> Locus:
    """
    Group samples into arcs per branch in traversal order, normalized into the
    strip, with the abelian axis added analytically.

    Args:
        samples (Iterable[LocusSample]): Non-abelian samples (abelian ones are ignored).
        k (int): Order of the longitude.
        n_samples (int): Number of sample angles N.
        start_index (int): First angle index visited by the tracker.
        alexander_points: Alexander points to carry along.
        assume_small (bool): Skip the unverified_nonideal flag.
        excluded: Compact points kept for reporting.

    Returns:
        Locus: Arcs (axis first) plus their mirror images.
    """
    order = {j: (j - start_index) % n_samples for j in range(n_samples)}
    by_branch: dict[int, list[LocusSample]] = {}
    for s in samples:
        if s.branch_id == ABELIAN_BRANCH:
            continue
        s = normalize_sample(s, k)
        if not assume_small:
            s = s.with_flags(SampleFlag.UNVERIFIED_NONIDEAL)
        by_branch.setdefault(s.branch_id, []).append(s)

    arcs: list[LocusArc] = [_axis_arc(k)]
    for branch_id in sorted(by_branch):
        branch = sorted(by_branch[branch_id], key=lambda s: order[s.angle_index])
        pieces = _split_branch(branch, order, k)
        index = 0
        for piece in pieces:
            for variant in (piece, [mirror_sample(s, k) for s in piece]):
                arcs.append(LocusArc(
                    branch_id=branch_id,
                    index=index,
                    samples=tuple(variant),
                    start_type=_endpoint_type(variant[0]),
                    end_type=_endpoint_type(variant[-1]),
                ))
                index += 1
        logger.debug("branch %d: %d samples in %d arcs", branch_id, len(branch), len(pieces))

    locus = Locus(
        arcs=tuple(arcs),
        alexander_points=tuple(alexander_points),
        k=k,
        excluded=tuple(excluded),
    )
    logger.info(
        "locus: %d arcs (%d non-axis samples), %d Alexander points, %d compact exclusions",
        len(arcs), len(locus.samples(include_axis=False)), len(alexander_points), len(excluded),
    )
    return locus


def _near_lattice(s: LocusSample, tol: float = LATTICE_TOL) -> bool:
    return abs(s.x - round(s.x)) < tol and abs(s.y - round(s.y)) < tol


def milnor_wood_violations(locus: Locus, genus: int | None, tol: float = 1e-6) -> list[LocusSample]:
    """
    Samples outside the horizontal strip k·|y| <= max(2g - 1, 0) forced by a
    genus-g Seifert surface of the longitude.
    """
    if genus is None:
        return []
    bound = max(2 * genus - 1, 0)
    return [s for s in locus.samples(include_axis=False) if locus.k * abs(s.y) > bound + tol]


def off_lattice_parabolic(locus: Locus) -> list[LocusSample]:
    return [
        s for s in locus.samples(include_axis=False)
        if SampleFlag.PARABOLIC in s.flags and not _near_lattice(s)
    ]


def odd_parabolic_samples(locus: Locus) -> list[LocusSample]:
    """Parabolic samples whose longitude translation is an odd integer."""
    out = []
    for s in locus.samples(include_axis=False):
        if SampleFlag.PARABOLIC in s.flags and _near_lattice(s) and round(s.y) % 2:
            out.append(s)
    return out


def orphan_alexander_points(locus: Locus, radius: float = 0.05) -> list[AlexanderPoint]:
    """
    Simple, non-excluded Alexander points with no non-axis sample nearby; an arc
    through them may have been missed.
    """
    samples = locus.samples(include_axis=False)
    out = []
    for a in locus.alexander_points:
        if a.multiple or a.excluded:
            continue
        if not any(math.hypot(s.x - a.x, s.y) < radius for s in samples):
            out.append(a)
    return out


def _orbit_distance(a: LocusSample, b: LocusSample, k: int) -> float:
    """Distance from a to the nearest strip image of b under translations and half-turns."""
    images = (
        (b.x, b.y), (k - b.x, -b.y), (-b.x, -b.y), (2 * k - b.x, -b.y),
        (b.x - k, b.y), (b.x + k, b.y),
    )
    return min(math.hypot(a.x - x, a.y - y) for x, y in images)


def symmetry_discrepancy(samples: Iterable[LocusSample], k: int, n_samples: int) -> float:
    """
    Hausdorff distance, up to the symmetries of the strip, between the tracked
    samples at angle j and those at the conjugate angle N - j. Mirror arcs are
    never consulted; pass the samples before assembly.
    """
    by_angle: dict[int, list[LocusSample]] = {}
    for s in samples:
        if s.branch_id == ABELIAN_BRANCH or s.angle_index < 0:
            continue
        by_angle.setdefault(s.angle_index, []).append(normalize_sample(s, k))
    worst = 0.0
    for j, here in by_angle.items():
        there = by_angle.get((n_samples - j) % n_samples)
        if not there:
            continue
        d = np.array([[_orbit_distance(a, b, k) for b in there] for a in here])
        worst = max(worst, float(d.min(axis=0).max()), float(d.min(axis=1).max()))
    return worst
