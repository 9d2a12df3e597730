# locus_pipeline/covergroup.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from errors import LiftError
from group_pipeline.homology import solve_integer_system
from group_pipeline.presentation import Presentation, Word

logger = logging.getLogger("elocus")

SNAP_TOL = 0.1
CENTRAL_TOL = 1e-6
_EDGE = 1e-12


@dataclass(frozen=True, eq=False)
class LiftedElement:
    """
    Element of the universal cover of PSL(2, R): a matrix ±A together with the
    value at 0 of the chosen lift of its circle map.
    """
    matrix: np.ndarray
    base: float


@dataclass(frozen=True, eq=False)
class LiftedRep:
    generator_lifts: tuple[LiftedElement, ...]
    presentation: Presentation


@dataclass(frozen=True)
class EulerData:
    defects: tuple[int, ...]
    exponent_matrix: tuple[tuple[int, ...], ...]
    solvable: bool | None = None
    adjustment: tuple[int, ...] | None = None
    rank: int = 0


IDENTITY = LiftedElement(np.eye(2), 0.0)


def shift(n: int = 1) -> LiftedElement:
    """The central element s^n: x ↦ x + n."""
    return LiftedElement(np.eye(2), float(n))


def _sign_normalized(A: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(A)))
    for v in A.ravel():
        if abs(v) > 1e-14 * scale:
            return A if v > 0 else -A
    return A


def circle_map(A: np.ndarray, theta: float) -> float:
    """Projective action on R/Z via θ ↦ [cos πθ : sin πθ], result in [0, 1)."""
    c, s = math.cos(math.pi * theta), math.sin(math.pi * theta)
    v0 = A[0, 0] * c + A[0, 1] * s
    v1 = A[1, 0] * c + A[1, 1] * s
    out = (math.atan2(v1, v0) / math.pi) % 1.0
    return 0.0 if out >= 1.0 else out


def lift(A: np.ndarray, base: float | None = None) -> LiftedElement:
    """
    Canonical lift of ±A: the one with f̃(0) in [0, 1), or the given base.
    """
    A = _sign_normalized(np.asarray(A, dtype=float))
    return LiftedElement(A, circle_map(A, 0.0) if base is None else float(base))


def lifted_eval(g: LiftedElement, x: float) -> float:
    """
    Value of the lift f̃ at x: for x = m + t, m + the representative of f_A(t)
    in [base, base + 1).
    """
    m = math.floor(x)
    t = x - m
    f = circle_map(g.matrix, t)
    delta = (f - g.base) % 1.0
    # f̃ is continuous and increasing: near t = 0 the value sits just above
    # base, near t = 1 just below base + 1.
    if delta > 1.0 - _EDGE and t < 0.5:
        delta -= 1.0
    elif delta < _EDGE and t > 0.5:
        delta += 1.0
    return m + g.base + delta


def lifted_compose(g: LiftedElement, h: LiftedElement) -> LiftedElement:
    """g ∘ h."""
    return LiftedElement(_sign_normalized(g.matrix @ h.matrix), lifted_eval(g, h.base))


def lifted_inverse(g: LiftedElement) -> LiftedElement:
    A = g.matrix
    Ainv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]])
    c = circle_map(Ainv, 0.0)
    # f̃_g(c) is an integer m; the inverse lift sends 0 to c - m
    m = round(lifted_eval(g, c))
    return LiftedElement(_sign_normalized(Ainv), c - m)


def compose_word(lifts: Sequence[LiftedElement], word: Word) -> LiftedElement:
    inverses: dict[int, LiftedElement] = {}
    out = IDENTITY
    for g, e in word:
        if e > 0:
            out = lifted_compose(out, lifts[g])
        else:
            if g not in inverses:
                inverses[g] = lifted_inverse(lifts[g])
            out = lifted_compose(out, inverses[g])
    return out


def _is_central(A: np.ndarray, tol: float) -> bool:
    # det A = 1, so |A| ≈ I entrywise means A ≈ ±I
    return float(np.max(np.abs(np.abs(A) - np.eye(2)))) < tol


def _fixed_point(A: np.ndarray) -> float:
    tr = A[0, 0] + A[1, 1]
    lam = (tr + math.copysign(math.sqrt(max(tr * tr - 4.0, 0.0)), tr)) / 2
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    v = (b, lam - a)
    if abs(v[0]) + abs(v[1]) < 1e-12 * (1 + abs(lam)):
        v = (lam - d, c)
    if abs(v[0]) + abs(v[1]) < 1e-300:
        return 0.0
    return (math.atan2(v[1], v[0]) / math.pi) % 1.0


def translation_number(g: LiftedElement, parabolic_tol: float = 1e-12) -> float:
    """
    Translation number of a lifted element.

    Hyperbolic and parabolic elements have integer translation read at a fixed
    point; elliptic ones get the fractional part from the rotation angle and the
    integer part from the Birkhoff average f̃ⁿ(0)/n.
    """
    A = g.matrix
    if _is_central(A, 1e-9):
        return float(round(g.base))
    tr = float(A[0, 0] + A[1, 1])
    if abs(tr) >= 2.0 - parabolic_tol:
        theta = _fixed_point(A)
        return float(round(lifted_eval(g, theta) - theta))

    B = A if tr >= 0 else -A
    alpha = math.copysign(math.acos(min(1.0, abs(tr) / 2)), B[1, 0])
    frac = (alpha / math.pi) % 1.0
    x = 0.0
    for n in range(1, 65):
        x = lifted_eval(g, x)
        est = x / n
        cand = frac + round(est - frac)
        if n >= 3 and abs(est - cand) < 0.4:
            return cand
    return frac + round(x / 64 - frac)


def euler_defects(lifts: Sequence[LiftedElement], p: Presentation) -> EulerData:
    """
    Integer translation of every relator composed from the chosen generator lifts.
    """
    defects = []
    for r in p.relators:
        L = compose_word(lifts, r)
        if not _is_central(L.matrix, CENTRAL_TOL):
            raise LiftError(
                f"relator {r} is not central under the representation "
                f"(matrix {L.matrix.round(6).tolist()})"
            )
        e = round(L.base)
        if abs(L.base - e) > SNAP_TOL:
            raise LiftError(f"relator {r} translation {L.base:.4f} is not near an integer")
        defects.append(int(e))
    E = tuple(tuple(row) for row in p.exponent_matrix())
    return EulerData(defects=tuple(defects), exponent_matrix=E, rank=p.rank)


def solve_lift(e: EulerData) -> EulerData:
    """
    Decide whether some central adjustment n (generator g ↦ g̃·s^{n_g}) kills all
    defects: E·n = -defects over Z.
    """
    ncols = e.rank or (len(e.exponent_matrix[0]) if e.exponent_matrix else 0)
    if not any(e.defects):
        return replace(e, solvable=True, adjustment=(0,) * ncols)
    n = solve_integer_system([list(r) for r in e.exponent_matrix], [-d for d in e.defects], ncols)
    if n is None:
        return replace(e, solvable=False, adjustment=None)
    return replace(e, solvable=True, adjustment=tuple(n))


def _apply_shifts(lifts: Sequence[LiftedElement], n: Sequence[int]) -> tuple[LiftedElement, ...]:
    return tuple(LiftedElement(g.matrix, g.base + k) for g, k in zip(lifts, n))


def shift_lift(rep: LiftedRep, phi: Sequence[int]) -> LiftedRep:
    """
    Multiply each generator lift by s^{φ(g)}; φ must vanish on every relator.
    """
    p = rep.presentation
    if len(phi) != p.rank:
        raise LiftError(f"phi has {len(phi)} entries, expected {p.rank}")
    for row in p.exponent_matrix():
        if sum(a * b for a, b in zip(row, phi)):
            raise LiftError(f"phi={list(phi)} is not a homomorphism (violates relator {row})")
    return LiftedRep(_apply_shifts(rep.generator_lifts, phi), p)


def lift_representation(
    matrices: Sequence[np.ndarray], p: Presentation
) -> tuple[LiftedRep | None, EulerData]:
    """
    Lift a PSL(2, R) representation to the universal cover if possible.

    Returns:
        tuple: (LiftedRep or None when the Euler class obstructs, EulerData).
    """
    lifts = tuple(lift(np.real(np.asarray(M))) for M in matrices)
    data = solve_lift(euler_defects(lifts, p))
    if not data.solvable:
        return None, data
    lifted = _apply_shifts(lifts, data.adjustment)
    check = euler_defects(lifted, p)
    if any(check.defects):
        raise LiftError(f"adjusted lift still has defects {check.defects}")
    return LiftedRep(lifted, p), data


def word_translation(rep: LiftedRep, word: Word) -> float:
    return translation_number(compose_word(rep.generator_lifts, word))
