# tests/test_orderability.py
import math

import pytest

from group_pipeline.alexander import AlexanderPoint
from locus_pipeline.locus import Locus, LocusArc, LocusSample, SampleFlag, assemble_arcs
from locus_pipeline.orderability import (
    BranchedStatus,
    Caveat,
    SlopeInterval,
    branched_cover_check,
    build_report,
    merge_intervals,
    orderable_slopes,
)

INF = math.inf


def s(x, y, j=0, flags=()):
    return LocusSample(x=x, y=y, flags=frozenset(flags), branch_id=1, angle_index=j)


def locus_with(*arcs, k=1, alexander=()):
    axis = assemble_arcs([], k, n_samples=8).arcs[0]
    built = tuple(LocusArc(branch_id=1, index=i, samples=tuple(a)) for i, a in enumerate(arcs))
    return Locus(arcs=(axis,) + built, alexander_points=tuple(alexander), k=k)


def bounds(intervals):
    return [(iv.lo, iv.hi, iv.lo_open, iv.hi_open) for iv in intervals]


def test_axis_only_gives_zero_slope():
    out = orderable_slopes(assemble_arcs([], 1, n_samples=8))
    assert bounds(out) == [(0.0, 0.0, False, False)]
    assert str(out[0]) == "{0}"


def test_single_sample_gives_point_slope():
    out = orderable_slopes(locus_with([s(0.5, 1.0)]), sym_range=0)
    assert bounds(out) == [(-2.0, -2.0, False, False), (0.0, 0.0, False, False)]
    assert out[0].provenance == ("1:0",)


def test_translates_add_slopes():
    out = orderable_slopes(locus_with([s(0.5, 1.0)]), sym_range=1)
    # x = -0.5, 0.5, 1.5
    assert [iv.lo for iv in out] == pytest.approx([-2.0, -2 / 3, 0.0, 2.0])


def test_segment_gives_interval():
    out = orderable_slopes(locus_with([s(0.5, 1.0), s(0.5, -1.0)]), sym_range=0)
    assert bounds(out) == [(pytest.approx(-2.0), pytest.approx(2.0), False, False)]


def test_segment_through_vertical_wraps_through_infinity():
    out = orderable_slopes(locus_with([s(0.5, 1.0), s(-0.5, 1.0)]), sym_range=0)
    assert len(out) == 4
    lo, zero, hi, point = out
    assert zero.lo == zero.hi == 0.0
    assert (lo.lo, lo.lo_open, lo.hi_open) == (-INF, True, False)
    assert lo.hi == pytest.approx(-2.0)
    assert hi.lo == pytest.approx(2.0) and (hi.hi, hi.hi_open) == (INF, True)
    assert point.lo == point.hi == INF
    assert str(point) == "{∞}"


def test_parabolic_endpoint_is_open():
    par = {SampleFlag.PARABOLIC}
    out = orderable_slopes(locus_with([s(0.5, 1.0, flags=par), s(0.5, 0.5)]), sym_range=0)
    first = out[0]
    assert first.lo == pytest.approx(-2.0) and first.lo_open
    assert first.hi == pytest.approx(-1.0) and not first.hi_open


def test_lone_parabolic_sample_gives_nothing():
    out = orderable_slopes(locus_with([s(0.5, 1.0, flags={SampleFlag.PARABOLIC})]), sym_range=0)
    assert bounds(out) == [(0.0, 0.0, False, False)]


def test_origin_sample_is_skipped():
    out = orderable_slopes(locus_with([s(0.0, 0.0), s(0.0, 0.0, 1)]), sym_range=0)
    assert bounds(out) == [(0.0, 0.0, False, False)]


def test_vertical_sample_is_meridian_slope():
    out = orderable_slopes(locus_with([s(0.0, 1.0)]), sym_range=0)
    assert out[-1].lo == out[-1].hi == INF


def test_merge_intervals():
    merged = merge_intervals([
        SlopeInterval(1.0, 2.0, True, False, ("b",)),
        SlopeInterval(0.0, 1.0, False, False, ("a",)),
        SlopeInterval(3.0, 4.0, False, True),
        SlopeInterval(4.0, 5.0, True, False),
        SlopeInterval(3.5, 3.7),
        SlopeInterval(INF, INF, provenance=("c",)),
        SlopeInterval(INF, INF, provenance=("d",)),
    ])
    assert bounds(merged) == [
        (0.0, 2.0, False, False),
        (3.0, 4.0, False, True),
        (4.0, 5.0, True, False),
        (INF, INF, False, False),
    ]
    assert merged[0].provenance == ("a", "b")
    assert merged[-1].provenance == ("c", "d")


def test_merge_is_disjoint_and_sorted():
    merged = merge_intervals([SlopeInterval(-1.0, 3.0), SlopeInterval(0.0, 1.0), SlopeInterval(2.0, 6.0)])
    assert bounds(merged) == [(-1.0, 6.0, False, False)]


def test_interval_contains_and_text():
    iv = SlopeInterval(-1.0, 2.0, True, False)
    assert iv.contains(2.0) and iv.contains(0.0)
    assert not iv.contains(-1.0)
    assert str(iv) == "(-1, 2]"
    assert not SlopeInterval(-INF, 0.0, True, True).contains(0.0)


def test_branched_check_needs_k_one():
    locus = assemble_arcs([], 2, n_samples=8)
    assert branched_cover_check(locus, 2).status is BranchedStatus.NOT_APPLICABLE
    assert branched_cover_check(assemble_arcs([], 1, n_samples=8), 1).status is BranchedStatus.NOT_APPLICABLE


def test_branched_witness():
    locus = locus_with([s(0.3, 0.5), s(0.7, 0.5, 1)])
    v = branched_cover_check(locus, 2)
    assert v.status is BranchedStatus.ORDERABLE
    assert v.witness == pytest.approx((0.5, 0.5))
    assert v.arc == "1:0"
    assert v.axis_crossing
    assert branched_cover_check(locus, 5).status is BranchedStatus.NO_WITNESS


def test_branched_unverified_witness():
    flag = {SampleFlag.UNVERIFIED_NONIDEAL}
    locus = locus_with([s(0.3, 0.5, flags=flag), s(0.7, 0.5, 1, flags=flag)])
    assert branched_cover_check(locus, 2).status is BranchedStatus.UNVERIFIED_WITNESS
    assert branched_cover_check(locus, 2, assume_small=True).status is BranchedStatus.ORDERABLE


def test_branched_skips_axis_crossings():
    locus = locus_with([s(0.3, 0.2), s(0.7, -0.2, 1)])
    assert branched_cover_check(locus, 2).status is BranchedStatus.NO_WITNESS


def test_build_report():
    flag = {SampleFlag.UNVERIFIED_NONIDEAL}
    orphan = AlexanderPoint(x=0.9, multiple=False, excluded=False)
    locus = locus_with([s(0.3, 0.5, flags=flag), s(0.7, 0.5, 1, flags=flag)], alexander=(orphan,))
    report = build_report(
        locus, None, name="demo", sym_range=0, branched_max=4, genus=1,
        counts={"points_sample": 2}, warnings=["monodromy_not_bijective", "something_else"],
    )
    assert report.name == "demo"
    assert sorted(report.branched) == [2, 3, 4]
    assert report.branched[2].status is BranchedStatus.UNVERIFIED_WITNESS
    assert report.caveats == [
        Caveat.IRREDUCIBILITY_ASSUMED,
        Caveat.UNVERIFIED_NONIDEAL_USED,
        Caveat.MISSING_COMPONENTS_POSSIBLE,
        Caveat.MONODROMY_NOT_BIJECTIVE,
    ]
    assert report.orphan_alexander_points == [orphan]
    assert report.counts["points_sample"] == 2
    assert report.counts["locus_samples"] == 2
    assert report.counts["arcs"] == 1
    assert report.counts["milnor_wood_violations"] == 0


def test_build_report_assume_small():
    locus = locus_with([s(0.3, 0.5), s(0.7, 0.5, 1)])
    report = build_report(locus, None, name="demo", sym_range=0, branched_max=2, assume_small=True)
    assert report.caveats == [Caveat.IRREDUCIBILITY_ASSUMED]
    assert report.branched[2].status is BranchedStatus.ORDERABLE
