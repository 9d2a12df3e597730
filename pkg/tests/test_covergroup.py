# tests/test_covergroup.py
import math

import numpy as np
import pytest

from conftest import load
from errors import LiftError
from group_pipeline.presentation import parse_presentation
from locus_pipeline.covergroup import (
    EulerData,
    LiftedElement,
    LiftedRep,
    circle_map,
    compose_word,
    euler_defects,
    lift,
    lift_representation,
    lifted_compose,
    lifted_eval,
    lifted_inverse,
    shift,
    shift_lift,
    solve_lift,
    translation_number,
    word_translation,
)

A_TREFOIL = np.array([[1.0, 1.0], [0.0, 1.0]])
B_TREFOIL = np.array([[1.0, 0.0], [-1.0, 1.0]])


def rotation(turns: float) -> np.ndarray:
    """Moves the circle coordinate by `turns`."""
    a = math.pi * turns
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def power(g, n):
    out = g
    for _ in range(n - 1):
        out = lifted_compose(out, g)
    return out


def test_circle_map_of_rotation():
    assert circle_map(rotation(0.25), 0.5) == pytest.approx(0.75)
    assert circle_map(rotation(0.25), 0.9) == pytest.approx(0.15)


def test_lift_is_increasing_and_equivariant():
    g = lift(np.array([[2.0, 1.0], [1.0, 1.0]]))
    xs = np.linspace(-1.5, 1.5, 61)
    values = [lifted_eval(g, x) for x in xs]
    assert all(b > a for a, b in zip(values, values[1:]))
    for x in (0.1, 0.37, 0.8):
        assert lifted_eval(g, x + 1) == pytest.approx(lifted_eval(g, x) + 1)


def test_rotation_translation_number():
    assert translation_number(lift(rotation(0.3))) == pytest.approx(0.3, abs=1e-12)


def test_homogeneous_on_powers():
    g = lift(rotation(0.3))
    assert translation_number(power(g, 3)) == pytest.approx(0.9, abs=1e-12)


def test_shift_translation():
    assert translation_number(shift(3)) == 3.0
    assert translation_number(lifted_compose(shift(1), lift(rotation(0.3)))) == pytest.approx(1.3)


def test_hyperbolic_and_parabolic_translation():
    h = lift(np.diag([2.0, 0.5]))
    assert translation_number(h) == 0.0
    assert translation_number(lifted_compose(shift(2), h)) == 2.0
    assert translation_number(lift(A_TREFOIL)) == 0.0


def test_conjugation_invariance():
    P = np.array([[2.0, 1.0], [1.0, 1.0]])
    Pinv = np.linalg.inv(P)
    g = lift(P @ rotation(0.3) @ Pinv)
    assert translation_number(g) == pytest.approx(0.3, abs=1e-9)


def test_inverse():
    g = lifted_compose(shift(1), lift(np.array([[1.0, 2.0], [1.0, 3.0]])))
    gi = lifted_inverse(g)
    e = lifted_compose(g, gi)
    assert np.allclose(np.abs(e.matrix), np.eye(2))
    assert e.base == pytest.approx(0.0, abs=1e-12)
    for x in (0.0, 0.3, -0.7):
        assert lifted_eval(gi, lifted_eval(g, x)) == pytest.approx(x)


def test_quasimorphism_defect_at_most_one():
    rng = np.random.default_rng(7)
    for _ in range(50):
        mats = []
        for _ in range(2):
            M = rng.normal(size=(2, 2))
            d = np.linalg.det(M)
            if d < 0:
                M[:, 0] *= -1
                d = -d
            mats.append(M / math.sqrt(d))
        g, h = lift(mats[0]), lift(mats[1])
        defect = translation_number(lifted_compose(g, h)) - translation_number(g) - translation_number(h)
        assert abs(defect) <= 1.0 + 1e-9


def test_trefoil_lift(trefoil):
    rep, data = lift_representation([A_TREFOIL, B_TREFOIL], trefoil)
    assert rep is not None
    assert data.solvable
    assert euler_defects(rep.generator_lifts, trefoil).defects == (0,)
    relator = compose_word(rep.generator_lifts, trefoil.relators[0])
    assert relator.base == pytest.approx(0.0, abs=1e-9)


def test_central_relator_required(trefoil):
    with pytest.raises(LiftError, match="not central"):
        euler_defects([lift(A_TREFOIL), lift(np.diag([2.0, 0.5]))], trefoil)


def test_solve_lift():
    e = solve_lift(EulerData(defects=(2,), exponent_matrix=((1, -1),), rank=2))
    assert e.solvable
    n = e.adjustment
    assert n[0] - n[1] == -2


def test_solve_lift_obstructed():
    e = solve_lift(EulerData(defects=(1,), exponent_matrix=((2, 0),), rank=2))
    assert e.solvable is False
    assert e.adjustment is None


def test_shift_lift_moves_meridian(trefoil):
    rep, _ = lift_representation([A_TREFOIL, B_TREFOIL], trefoil)
    before = word_translation(rep, trefoil.meridian)
    moved = shift_lift(rep, (1, 1))
    assert word_translation(moved, trefoil.meridian) == pytest.approx(before + 1)
    assert word_translation(moved, trefoil.longitude) == pytest.approx(
        word_translation(rep, trefoil.longitude)
    )


def test_shift_lift_rejects_non_homomorphism(trefoil):
    rep, _ = lift_representation([A_TREFOIL, B_TREFOIL], trefoil)
    with pytest.raises(LiftError, match="homomorphism"):
        shift_lift(rep, (1, 0))
    with pytest.raises(LiftError, match="entries"):
        shift_lift(rep, (1,))


def test_free_group_lift_keeps_generators():
    p = parse_presentation({"name": "st", "generators": 1, "relators": [],
                            "meridian": "a", "longitude": ""})
    rep, data = lift_representation([rotation(0.2)], p)
    assert len(rep.generator_lifts) == 1
    assert data.defects == ()
    assert isinstance(rep, LiftedRep)
    assert word_translation(rep, p.meridian) == pytest.approx(0.2)


def _shifted(lifts, n):
    return [LiftedElement(g.matrix, g.base + float(k)) for g, k in zip(lifts, n)]


# a: rotation by 1/10, b: rotation by 1/5; the relator a^10 b^-10 has translation -1
OBSTRUCTED = [rotation(0.1), rotation(0.2)]


@pytest.mark.parametrize(
    "name, matrices, solvable",
    [("trefoil", [A_TREFOIL, B_TREFOIL], True), ("torsion10", OBSTRUCTED, False)],
)
def test_lift_verdict_ignores_central_shifts(name, matrices, solvable):
    p = load(name)
    lifts = [lift(M) for M in matrices]
    E = np.array(p.exponent_matrix())
    defects = np.array(euler_defects(lifts, p).defects)
    rng = np.random.default_rng(23)
    for _ in range(100):
        n = rng.integers(-6, 7, size=p.rank)
        data = euler_defects(_shifted(lifts, n), p)
        assert list(data.defects) == (defects + E @ n).tolist()
        assert solve_lift(data).solvable is solvable


@pytest.mark.parametrize(
    "name, matrices", [("trefoil", [A_TREFOIL, B_TREFOIL]), ("torsion10", OBSTRUCTED)]
)
def test_generator_shift_moves_defects_by_its_column(name, matrices):
    p = load(name)
    lifts = [lift(M) for M in matrices]
    E = p.exponent_matrix()
    before = euler_defects(lifts, p).defects
    for g in range(p.rank):
        for step in (1, -1, 3):
            n = [0] * p.rank
            n[g] = step
            after = euler_defects(_shifted(lifts, n), p).defects
            assert [b - a for a, b in zip(before, after)] == [step * row[g] for row in E]


def _random_element(rng):
    kind = rng.integers(3)
    t = rng.uniform(-1.5, 1.5)
    P = np.array([[math.exp(t), rng.uniform(-2, 2)], [0.0, math.exp(-t)]]) @ rotation(rng.uniform(0, 1))
    Pinv = np.linalg.inv(P)
    if kind == 0:
        M = P @ rotation(rng.uniform(-1, 1)) @ Pinv
    elif kind == 1:
        lam = math.exp(rng.uniform(-2, 2))
        M = P @ np.diag([lam, 1 / lam]) @ Pinv
    else:
        M = P @ np.array([[1.0, rng.uniform(-3, 3)], [0.0, 1.0]]) @ Pinv
    return lifted_compose(shift(int(rng.integers(-3, 4))), lift(M))


def test_quasimorphism_defect_on_mixed_pairs():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10_000):
        g, h = _random_element(rng), _random_element(rng)
        defect = translation_number(lifted_compose(g, h)) - translation_number(g) - translation_number(h)
        worst = max(worst, abs(defect))
    assert worst <= 1.0 + 1e-6


def test_central_powers_translate_by_their_exponent():
    for k in range(-100, 101):
        assert translation_number(shift(k)) == k
    g = lift(rotation(0.3))
    step = shift(1)
    acc = g
    for k in range(1, 101):
        acc = lifted_compose(step, acc)
        assert translation_number(acc) == pytest.approx(k + 0.3, abs=1e-9)
    assert translation_number(lifted_compose(lifted_inverse(shift(100)), g)) == pytest.approx(-99.7, abs=1e-9)


def test_additive_on_commuting_pairs():
    rng = np.random.default_rng(31)
    P = np.array([[2.0, 1.0], [1.0, 1.0]])
    Pinv = np.linalg.inv(P)
    for _ in range(200):
        m, n = (int(v) for v in rng.integers(-3, 4, size=2))
        kind = rng.integers(3)
        if kind == 0:
            a, b = rng.uniform(-1, 1, size=2)
            G, H = P @ rotation(a) @ Pinv, P @ rotation(b) @ Pinv
        elif kind == 1:
            a, b = np.exp(rng.uniform(-2, 2, size=2))
            G, H = P @ np.diag([a, 1 / a]) @ Pinv, P @ np.diag([b, 1 / b]) @ Pinv
        else:
            a, b = rng.uniform(-3, 3, size=2)
            G = P @ np.array([[1.0, a], [0.0, 1.0]]) @ Pinv
            H = P @ np.array([[1.0, b], [0.0, 1.0]]) @ Pinv
        g = lifted_compose(shift(m), lift(G))
        h = lifted_compose(shift(n), lift(H))
        total = translation_number(lifted_compose(g, h))
        assert total == pytest.approx(translation_number(g) + translation_number(h), abs=1e-9)
