# tests/test_repvar.py
import cmath

import mpmath as mp
import numpy as np
import pytest

from conftest import load
from errors import PolishError
from group_pipeline.homology import abelianization_data
from repvar_pipeline.solver import newton, polish
from repvar_pipeline.system import (
    ABELIAN_BRANCH,
    Chart,
    abelian_point,
    abelian_residual,
    build_system,
    commutator_residual,
    holonomy_mu,
    psl_key,
    same_point,
    sup_norm,
    word_matrix,
)


@pytest.fixture
def system(trefoil, trefoil_h):
    return build_system(trefoil, trefoil_h, np.random.default_rng(3))


def trefoil_point(system, s):
    """
    Exact irreducible trefoil representation in normal form: t = s and
    tr(ab) = 1, meridian eigenvalue zeta = s.
    """
    c0 = system.chart_vector[0]
    u = 1 - s * s - 1 / (s * s)
    return np.array([s, s, u, 1 / c0, 0, s], dtype=complex), s * s


def test_system_shape(system):
    assert system.n_matrix_unknowns == 3
    assert system.n_unknowns == 6
    assert system.n_equations == 8
    assert system.sign_choices == ((1,), (-1,))


def test_rank_one_has_no_system():
    p = load("solid_torus")
    with pytest.raises(ValueError):
        build_system(p, abelianization_data(p), np.random.default_rng(0))


def test_sl2z_point_has_zero_residual(system):
    x, z = trefoil_point(system, 1.0 + 0j)
    assert sup_norm(system.residual(x, z, (1,))) < 1e-14
    mats = system.matrices(x)
    assert np.allclose(mats[0], [[1, 1], [0, 1]])
    assert np.allclose(mats[1], [[1, 0], [-1, 1]])


@pytest.mark.parametrize("s", [1.3 + 0.4j, cmath.exp(0.3j), 0.7 - 0.2j])
def test_generic_points_solve_the_system(system, s):
    x, z = trefoil_point(system, s)
    assert sup_norm(system.residual(x, z, (1,))) < 1e-12
    assert commutator_residual(system.matrices(x), system.presentation) < 1e-12


def test_wrong_sign_system_is_not_solved(system):
    x, z = trefoil_point(system, 1.3 + 0.4j)
    assert sup_norm(system.residual(x, z, (-1,))) > 1.0


def test_jacobian_matches_finite_differences(system):
    rng = np.random.default_rng(11)
    x = rng.normal(size=6) + 1j * rng.normal(size=6) + 1.0
    z = 0.8 + 0.3j
    J = system.jacobian(x, z, (1,))
    h = 1e-6
    for j in range(len(x)):
        e = np.zeros(len(x), dtype=complex)
        e[j] = h
        fd = (system.residual(x + e, z, (1,)) - system.residual(x - e, z, (1,))) / (2 * h)
        assert np.allclose(J[:, j], fd, atol=1e-6, rtol=1e-6)


def test_newton_converges_from_nearby(system):
    x, z = trefoil_point(system, 1.3 + 0.4j)
    start = x + 1e-3 * (1 + 1j)
    res = newton(system, start, z, (1,), max_iter=20, tol=1e-12)
    assert res.converged
    assert res.residual < 1e-12
    assert np.max(np.abs(res.x - x)) < 1e-8
    assert np.isfinite(res.condition)


def test_polish_reaches_target(system):
    x, z = trefoil_point(system, 1.3 + 0.4j)
    point = system.make_point(x, z, (1,), branch_id=1, angle_index=0)
    q = polish(point, 128, system)
    assert q.precision_bits == 128
    assert q.residual < 2.0 ** (8 - 128)
    assert isinstance(q.params[0], mp.mpc)
    assert abs(complex(q.params[0]) - (1.3 + 0.4j)) < 1e-12


def test_polish_rejects_bad_start(system):
    x, z = trefoil_point(system, 1.3 + 0.4j)
    point = system.make_point(x + 0.1, z, (1,), branch_id=1, angle_index=0)
    with pytest.raises(PolishError, match="too large"):
        polish(point, 128, system)


def test_polish_needs_system(system):
    x, z = trefoil_point(system, 1.3 + 0.4j)
    point = system.make_point(x, z, (1,), branch_id=1, angle_index=0)
    with pytest.raises(PolishError):
        polish(point, 128)


def test_abelian_point(trefoil, trefoil_h):
    q = abelian_point(trefoil_h, 0.6, angle_index=3)
    assert q.chart is Chart.ABELIAN
    assert q.branch_id == ABELIAN_BRANCH
    assert q.target == pytest.approx(cmath.exp(0.6j))
    assert abelian_residual(trefoil, q) < 1e-14
    mu = word_matrix(q.matrices, trefoil.meridian)
    assert complex(mu[0, 0]) == pytest.approx(cmath.exp(0.3j))


def test_abelian_polish_recomputes_in_closed_form(system):
    q = system.abelian_point(0.6, angle_index=3)
    r = polish(q, 256, system)
    assert r.precision_bits == 256
    assert r.residual < 1e-70


def test_abelian_point_with_torsion(torsion10):
    h = abelianization_data(torsion10)
    q = abelian_point(h, 1.0, angle_index=0)
    assert abelian_residual(torsion10, q) < 1e-12
    # meridian a^10 has eigenvalue e^{i/2}
    mu = word_matrix(q.matrices, torsion10.meridian)
    assert complex(mu[0, 0]) == pytest.approx(cmath.exp(0.5j))


def test_psl_key_ignores_signs_and_conjugation(system):
    x, _ = trefoil_point(system, 1.3 + 0.4j)
    mats = system.matrices(x)
    P = np.array([[2, 1], [1, 1]], dtype=complex)
    Pinv = np.linalg.inv(P)
    other = [-(P @ mats[0] @ Pinv), P @ mats[1] @ Pinv]
    assert same_point(psl_key(mats), psl_key(other), 1e-9)
    y, _ = trefoil_point(system, 0.7 - 0.2j)
    assert not same_point(psl_key(mats), psl_key(system.matrices(y)), 1e-9)


def test_holonomy_of_meridian(system, trefoil):
    x, z = trefoil_point(system, 1.3 + 0.4j)
    point = system.make_point(x, z, (1,), branch_id=1, angle_index=0)
    assert holonomy_mu(point, trefoil, reference=z) == pytest.approx(z)
