# repvar_pipeline/reality.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import mpmath as mp
import numpy as np

from errors import RealityError
from group_pipeline.presentation import Presentation, Word
from repvar_pipeline.system import RepPoint, trace, word_matrix

logger = logging.getLogger("elocus")

SIGMA_TOL = 1e-8

# Fixed trial matrices for building the real structure A = B + conj(C B).
_TRIAL_B = (
    ((1, 0), (0, 1)),
    ((1, 1j), (0, 1)),
    ((1, 0), (1j, 1)),
    ((2, 1), (1j, 1)),
)


class RealForm(str, Enum):
    SPLIT = "split"
    COMPACT = "compact"
    CIRCLE = "circle"


class PeripheralType(str, Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    CENTRAL = "central"


@dataclass(frozen=True, eq=False)
class RealRep:
    """
    A real-character representation in normal position.

    Split and circle forms carry real float64 matrices in SL(2, R); compact
    points keep their complex matrices since they have no real model.
    """
    matrices: tuple[np.ndarray, ...]
    form: RealForm
    source: RepPoint


def _test_words(p: Presentation) -> list[Word]:
    gens = [Word(((g, 1),)) for g in range(p.rank)]
    pairs = [gens[i] + gens[j] for i, j in combinations(range(p.rank), 2)]
    return gens + pairs + list(p.peripheral_words())


def reality_defect(point: RepPoint, p: Presentation) -> float:
    """
    Largest relative imaginary part of tr² over generators, pairwise products
    and peripheral words.
    """
    worst = 0.0
    with mp.workprec(max(point.precision_bits, 53)):
        for w in _test_words(p):
            t = trace(word_matrix(point.matrices, w))
            t2 = t * t
            worst = max(worst, float(abs(mp.im(t2)) / (1 + abs(t2))))
    return worst


def is_real_character(point: RepPoint, p: Presentation, tol: float = 1e-8) -> bool:
    return reality_defect(point, p) < tol


def is_borderline(point: RepPoint, p: Presentation, tol: float = 1e-8) -> bool:
    """
    True when the reality verdict sits close to the threshold and deserves a
    second polish at higher precision.
    """
    d = reality_defect(point, p)
    return tol * 1e-12 < d < tol * 1e3


def _mp2(M) -> mp.matrix:
    return mp.matrix([[mp.mpc(M[0, 0]), mp.mpc(M[0, 1])], [mp.mpc(M[1, 0]), mp.mpc(M[1, 1])]])


def _to_float(M: mp.matrix) -> np.ndarray:
    return np.array([[float(mp.re(M[i, j])) for j in range(2)] for i in range(2)])


def _is_circle(mats, tol: float) -> bool:
    for M in mats:
        if abs(M[0, 1]) > tol or abs(M[1, 0]) > tol:
            return False
        if abs(abs(M[0, 0]) - 1) > tol or abs(abs(M[1, 1]) - 1) > tol:
            return False
    return True


def _already_real(mats, tol: float) -> bool:
    return all(abs(mp.im(v)) <= tol * (1 + abs(v)) for M in mats for v in np.ravel(M))


def _intertwiner(mats) -> mp.matrix:
    """
    Solve C·G = conj(G)·C for all generators G; the solution space must be a line.
    """
    rows = []
    for G in mats:
        g0, g1, g2, g3 = (mp.mpc(v) for v in (G[0, 0], G[0, 1], G[1, 0], G[1, 1]))
        h0, h1, h2, h3 = (mp.conj(v) for v in (g0, g1, g2, g3))
        rows.append([g0 - h0, g2, -h1, 0])
        rows.append([g1, g3 - h0, 0, -h1])
        rows.append([-h2, 0, g0 - h3, g2])
        rows.append([0, -h2, g1, g3 - h3])
    A = mp.matrix(rows)
    _U, S, V = mp.svd_c(A)
    svals = [S[i] for i in range(S.rows)]
    top = max(svals)
    thresh = top * mp.mpf(2) ** (-(mp.mp.prec // 4))
    small = [i for i, s in enumerate(svals) if s < thresh]
    if len(small) != 1:
        raise RealityError(
            f"intertwiner space has dimension {len(small)} "
            f"(singular values {[mp.nstr(s, 5) for s in svals]})"
        )
    i = small[0]
    c = [mp.conj(V[i, j]) for j in range(4)]
    C = mp.matrix([[c[0], c[1]], [c[2], c[3]]])
    return C / mp.sqrt(mp.det(C))


def real_form(point: RepPoint) -> RealRep:
    """
    Put a real-character representation in real position.

    Returns:
        RealRep: circle form for simultaneously diagonal unit-modulus matrices,
        split form (real matrices) or compact form (SU(2) type, not conjugated).
    """
    mats = point.matrices
    bits = max(point.precision_bits, 53)
    tol = SIGMA_TOL
    with mp.workprec(bits):
        if _is_circle(mats, tol):
            rot = []
            for M in mats:
                e = mp.mpc(M[0, 0])
                e = e / abs(e)
                rot.append(np.array(
                    [[float(mp.re(e)), -float(mp.im(e))], [float(mp.im(e)), float(mp.re(e))]]
                ))
            return RealRep(tuple(rot), RealForm.CIRCLE, point)

        if _already_real(mats, tol):
            real = tuple(_to_float(_mp2(M)) for M in mats)
            return RealRep(real, RealForm.SPLIT, point)

        C = _intertwiner(mats)
        CC = C * C.apply(mp.conj)
        dist_plus = max(abs(CC[i, j] - (1 if i == j else 0)) for i in range(2) for j in range(2))
        dist_minus = max(abs(CC[i, j] + (1 if i == j else 0)) for i in range(2) for j in range(2))
        if dist_minus < tol:
            complex_mats = tuple(
                np.array([[complex(M[i, j]) for j in range(2)] for i in range(2)]) for M in mats
            )
            return RealRep(complex_mats, RealForm.COMPACT, point)
        if dist_plus >= tol:
            raise RealityError(
                f"C·conj(C) is not ±I (distances {float(dist_plus):.2e}, {float(dist_minus):.2e})"
            )

        for B in _TRIAL_B:
            Bm = mp.matrix([[mp.mpc(B[0][0]), mp.mpc(B[0][1])], [mp.mpc(B[1][0]), mp.mpc(B[1][1])]])
            A = Bm + (C * Bm).apply(mp.conj)
            d = mp.det(A)
            if abs(d) > mp.mpf("0.01") * mp.mnorm(A, 1) ** 2:
                break
        else:
            raise RealityError("no trial matrix gives an invertible real structure")

        Ainv = mp.inverse(A)
        real = []
        for M in mats:
            R = Ainv * _mp2(M) * A
            imag = max(abs(mp.im(R[i, j])) for i in range(2) for j in range(2))
            if imag > tol * (1 + mp.mnorm(R, 1)):
                raise RealityError(f"conjugated matrix keeps imaginary part {float(imag):.2e}")
            real.append(_to_float(R))
    return RealRep(tuple(real), RealForm.SPLIT, point)


def classify_matrix(M: np.ndarray, tol: float = 1e-8) -> PeripheralType:
    I = np.eye(2)
    if np.max(np.abs(M - I)) < tol or np.max(np.abs(M + I)) < tol:
        return PeripheralType.CENTRAL
    t2 = float(np.real(M[0, 0] + M[1, 1])) ** 2
    if abs(t2 - 4) < tol:
        return PeripheralType.PARABOLIC
    return PeripheralType.ELLIPTIC if t2 < 4 else PeripheralType.HYPERBOLIC


def classify_peripheral(
    rep: RealRep, p: Presentation, tol: float = 1e-8
) -> tuple[PeripheralType, PeripheralType]:
    """
    Types of ρ(μ) and ρ(λ) for a split or circle representation.
    """
    if rep.form is RealForm.COMPACT:
        raise ValueError("compact representations have no peripheral classification")
    mu = word_matrix(rep.matrices, p.meridian)
    lam = word_matrix(rep.matrices, p.longitude)
    return classify_matrix(np.real(mu), tol), classify_matrix(np.real(lam), tol)

