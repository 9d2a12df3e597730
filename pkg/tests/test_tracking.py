# tests/test_tracking.py
import cmath
import math

import mpmath as mp
import numpy as np
import pytest

import repvar_pipeline.tracking as tracking
from errors import TrackingError
from group_pipeline.homology import abelianization_data
from group_pipeline.presentation import parse_presentation
from repvar_pipeline.config import TrackingConfig
from repvar_pipeline.frames import _decode_complex, _encode_complex, dump_frames, load_frames
from repvar_pipeline.seeding import FiberFrame, seed_fiber
from repvar_pipeline.system import (
    ABELIAN_BRANCH,
    abelian_point,
    build_system,
    psl_key,
    same_point,
    trace,
)
from repvar_pipeline.tracking import EventKind, start_index, track_branch, track_circle

Z0 = TrackingConfig().z0


@pytest.fixture
def system(trefoil, trefoil_h):
    return build_system(trefoil, trefoil_h, np.random.default_rng(1))


def start_frame(system, z0=Z0):
    s = cmath.sqrt(z0)
    c0 = system.chart_vector[0]
    x = np.array([s, s, 1 - s * s - 1 / (s * s), 1 / c0, 0, s], dtype=complex)
    q = system.make_point(x, z0, (1,), branch_id=1, angle_index=-1)
    ab = abelian_point(system.homology, -1j * cmath.log(z0), angle_index=-1)
    return FiberFrame(angle_index=-1, target=z0, points=[ab, q])


def test_start_index():
    assert start_index(0.17, 16) == 1
    assert start_index(0.0, 16) == 1
    assert start_index(math.pi, 8) == 5
    assert start_index(-0.1, 8) == 0


def test_config_validation():
    with pytest.raises(ValueError):
        TrackingConfig(n_samples=12)
    with pytest.raises(ValueError):
        TrackingConfig(polish_bits=2048)
    with pytest.raises(ValueError):
        TrackingConfig(seed_attempts=0)
    assert "workers" not in TrackingConfig().to_metadata()


def test_seed_rejects_start_on_root_of_unity(system):
    with pytest.raises(ValueError):
        seed_fiber(system, 1.0 + 0j, TrackingConfig(seed_attempts=1))
    with pytest.raises(ValueError):
        seed_fiber(system, 0.5 + 0j, TrackingConfig(seed_attempts=1))


def test_seed_trefoil_fiber(system):
    cfg = TrackingConfig(n_samples=8, seed_attempts=60)
    frame = seed_fiber(system, Z0, cfg)
    assert frame.points[0].branch_id == ABELIAN_BRANCH
    assert len(frame.points) == 2
    q = frame.points[1]
    assert q.branch_id == 1
    assert q.residual < cfg.residual_tol
    # the trefoil has one irreducible character over each holonomy
    tr_a = complex(trace(q.matrices[0]))
    assert tr_a * tr_a == pytest.approx(Z0 + 2 + 1 / Z0, abs=1e-8)
    assert frame.warnings == []


def test_seed_is_reproducible(system):
    cfg = TrackingConfig(n_samples=8, seed_attempts=20, rng_seed=4)
    a = seed_fiber(system, Z0, cfg)
    b = seed_fiber(system, Z0, cfg)
    assert len(a.points) == len(b.points)
    for p, q in zip(a.points[1:], b.points[1:]):
        assert np.allclose(np.array(p.params, dtype=complex), np.array(q.params, dtype=complex))


def test_seed_without_irreducibles_warns():
    p = parse_presentation({"name": "cyclic", "generators": 2, "relators": ["aB"],
                            "meridian": "a", "longitude": "aB"})
    h = abelianization_data(p)
    system = build_system(p, h, np.random.default_rng(0))
    frame = seed_fiber(system, Z0, TrackingConfig(seed_attempts=4))
    assert len(frame.points) == 1
    assert frame.warnings == ["no_nonabelian_seed"]


def test_track_trefoil_branch_around_circle(system):
    cfg = TrackingConfig(n_samples=8)
    result = track_circle(start_frame(system), cfg, system)
    assert len(result.frames) == 8
    assert result.start_index == 1
    for j, frame in enumerate(result.frames):
        assert frame.angle_index == j
        assert frame.target == pytest.approx(cmath.exp(2j * math.pi * j / 8))
        assert frame.points[0].branch_id == ABELIAN_BRANCH
    hits = [f for f in result.frames if f.branch(1) is not None]
    assert len(hits) >= 7
    for f in hits:
        q = f.branch(1)
        assert q.residual < cfg.residual_tol
        assert q.target == pytest.approx(f.target)
    assert result.traversal_order(1) == 0
    assert result.traversal_order(0) == 7


def test_singular_step_halves(system, monkeypatch):
    calls = {"n": 0}

    def spiky(J):
        calls["n"] += 1
        return 1e13 if calls["n"] == 1 else 1.0

    monkeypatch.setattr(tracking, "_condition", spiky)
    cfg = TrackingConfig(n_samples=8)
    track = track_branch(system, start_frame(system).points[1], Z0, cfg)
    halvings = [e for e in track.events if e.kind is EventKind.HALVING]
    assert len(halvings) >= 1
    assert "cond" in halvings[0].detail
    assert len(track.points) >= 7


def test_all_branches_dead_is_fatal(system, monkeypatch):
    monkeypatch.setattr(tracking, "_condition", lambda J: 1e13)
    cfg = TrackingConfig(n_samples=8, max_halvings=2)
    with pytest.raises(TrackingError, match="died"):
        track_circle(start_frame(system), cfg, system)


def test_frame_dump_resume(system, tmp_path):
    cfg = TrackingConfig(n_samples=8)
    result = track_circle(start_frame(system), cfg, system)
    path = dump_frames(result, tmp_path / "frames.jsonl", "abc123")
    loaded, digest = load_frames(path, system)
    assert digest == "abc123"
    assert loaded.start_index == result.start_index
    assert loaded.monodromy == result.monodromy
    for a, b in zip(result.frames, loaded.frames):
        assert [q.branch_id for q in a.points] == [q.branch_id for q in b.points]
        for p, q in zip(a.points[1:], b.points[1:]):
            assert p.params == q.params
            assert same_point(psl_key(p.matrices), psl_key(q.matrices), 1e-15)


def test_missing_frame_dump(system, tmp_path):
    with pytest.raises(TrackingError):
        load_frames(tmp_path / "none.jsonl", system)


def test_hex_codec_keeps_negative_values():
    for v in (-1.5, -3e-17, 2.25, 0.0):
        assert _decode_complex(_encode_complex(complex(v, -v)), 53) == complex(v, -v)
    assert _encode_complex(-1.5)[0].startswith("-0x")
    with mp.workprec(256):
        x = -mp.pi
        back = _decode_complex(_encode_complex(mp.mpc(x, -x / 3)), 256)
        assert back.real == x
        assert back.imag == -x / 3


def test_monodromy_after_full_circle(system):
    # s -> -s around the circle is the same point of PSL(2, C)
    result = track_circle(start_frame(system), TrackingConfig(n_samples=8), system)
    assert result.monodromy == {1: 1}
    assert result.monodromy_is_bijection
    assert "monodromy_not_bijective" not in result.warnings


def test_dead_branch_breaks_monodromy(system):
    q = start_frame(system).points[1]
    alive = tracking.BranchTrack(branch_id=1, circle_start=q, circle_end=q)
    dead = tracking.BranchTrack(branch_id=2, dead_at=3)
    mapping, bijective = tracking._monodromy([alive, dead], 1e-6)
    assert mapping == {1: 1, 2: None}
    assert not bijective
    mapping, bijective = tracking._monodromy([alive], 1e-6)
    assert mapping == {1: 1}
    assert bijective


def test_tracked_points_match_meridian_holonomy(system):
    result = track_circle(start_frame(system), TrackingConfig(n_samples=8), system)
    assert not [e for e in result.events if e.kind is EventKind.HOLONOMY]


def test_holonomy_drift_is_recorded(system, monkeypatch):
    monkeypatch.setattr(tracking, "holonomy_mu", lambda q, p, reference=None: reference + 1e-3)
    track = track_branch(system, start_frame(system).points[1], Z0, TrackingConfig(n_samples=8))
    drifts = [e for e in track.events if e.kind is EventKind.HOLONOMY]
    assert drifts
    assert "drift=1.00e-03" in drifts[0].detail
