# group_pipeline/alexander.py
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from functools import reduce
from itertools import combinations

import mpmath as mp
import numpy as np
import sympy as sp

from errors import AlexanderError
from group_pipeline.homology import HomologyData
from group_pipeline.presentation import Presentation, Word

logger = logging.getLogger("elocus")

T = sp.Symbol("t")
ROOT_POLISH_BITS = 256


@dataclass(frozen=True)
class LaurentPoly:
    """
    Integer Laurent polynomial, coefficients listed from the lowest exponent up.
    """
    coeffs: tuple[int, ...]
    offset: int = 0

    @classmethod
    def from_poly(cls, poly: sp.Poly) -> "LaurentPoly":
        # all_coeffs() runs from the highest degree down
        coeffs = [int(c) for c in reversed(poly.all_coeffs())]
        return cls(tuple(coeffs)).normalized()

    def normalized(self) -> "LaurentPoly":
        """Strip zeros at both ends, shift to lowest exponent 0, leading coefficient > 0."""
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        lo = 0
        while lo < len(c) and c[lo] == 0:
            lo += 1
        c = c[lo:]
        if not c:
            return LaurentPoly((), 0)
        if c[-1] < 0:
            c = [-x for x in c]
        return LaurentPoly(tuple(c), 0)

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 + self.offset

    def to_poly(self) -> sp.Poly:
        n = self.normalized()
        return sp.Poly(list(reversed(n.coeffs)) or [0], T, domain=sp.ZZ)

    def __call__(self, t: complex) -> complex:
        return sum(c * t ** (i + self.offset) for i, c in enumerate(self.coeffs))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms: list[str] = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            e = i + self.offset
            mono = "" if e == 0 else ("t" if e == 1 else f"t^{e}")
            mag = abs(c)
            body = str(mag) if not mono else (mono if mag == 1 else f"{mag}*{mono}")
            if not terms:
                terms.append(body if c > 0 else f"-{body}")
            else:
                terms.append(("+ " if c > 0 else "- ") + body)
        return " ".join(terms)


@dataclass(frozen=True)
class UnitCircleRoot:
    value: complex
    argument: float
    multiplicity: int
    simple: bool


@dataclass(frozen=True)
class AlexanderPoint:
    x: float
    multiple: bool
    excluded: bool
    root: UnitCircleRoot | None = None


def _fox_row(relator: Word, h: HomologyData, rank: int) -> list[dict[int, int]]:
    """
    Fox derivatives of one relator, abelianized onto the free quotient.

    Each entry is a Laurent polynomial {exponent: coefficient}.
    """
    row: list[dict[int, int]] = [dict() for _ in range(rank)]
    prefix = 0  # free image of the prefix read so far
    for g, e in relator:
        if e > 0:
            term = prefix
            row[g][term] = row[g].get(term, 0) + 1
            prefix += h.free_images[g]
        else:
            prefix -= h.free_images[g]
            term = prefix
            row[g][term] = row[g].get(term, 0) - 1
    return row


def alexander_matrix(p: Presentation, h: HomologyData) -> sp.Matrix:
    """
    Fox matrix with each row multiplied by a power of t so all entries are polynomials.
    """
    rows: list[list[sp.Expr]] = []
    for r in p.relators:
        fox = _fox_row(r, h, p.rank)
        exps = [e for entry in fox for e, c in entry.items() if c]
        shift = -min(exps) if exps else 0
        rows.append([
            sp.Add(*[c * T ** (e + shift) for e, c in entry.items() if c])
            for entry in fox
        ])
    return sp.Matrix(rows) if rows else sp.zeros(0, p.rank)


def alexander_polynomial(p: Presentation, h: HomologyData) -> LaurentPoly:
    """
    Alexander polynomial as the gcd of the (rank-1)-minors of the Fox matrix.

    Args:
        p (Presentation): Presentation with free rank 1.
        h (HomologyData): Its abelianization data.

    Returns:
        LaurentPoly: Δ normalized to lowest exponent 0 and positive leading coefficient.
    """
    if h.free_rank != 1:
        raise AlexanderError(f"free rank {h.free_rank} != 1")
    size = p.rank - 1
    if size == 0:
        return LaurentPoly((1,))

    M = alexander_matrix(p, h)
    if M.is_zero_matrix:
        raise AlexanderError(f"{p.name}: Alexander matrix is zero (degenerate presentation)")

    minors: list[sp.Poly] = []
    for rows in combinations(range(M.rows), size):
        for cols in combinations(range(M.cols), size):
            det = sp.expand(M.extract(list(rows), list(cols)).det(method="berkowitz"))
            if det != 0:
                minors.append(sp.Poly(det, T, domain=sp.ZZ))
    if not minors:
        raise AlexanderError(f"{p.name}: every codimension-one minor vanishes")

    g = reduce(sp.gcd, minors)
    delta = LaurentPoly.from_poly(g)
    logger.debug("Δ(%s) = %s", p.name, delta)
    return delta


def _polish_root(coeffs_high: list[int], z0: complex) -> complex:
    with mp.workprec(ROOT_POLISH_BITS):
        z = mp.mpc(z0)
        for _ in range(60):
            f, df = mp.polyval(coeffs_high, z, derivative=True)
            if df == 0:
                break
            step = f / df
            z -= step
            if abs(step) < mp.mpf(2) ** (16 - ROOT_POLISH_BITS):
                break
        return complex(z)


def unit_circle_roots(d: LaurentPoly, tol: float = 1e-9) -> list[UnitCircleRoot]:
    """
    Roots of Δ on the unit circle, with exact multiplicities.

    Multiplicity comes from the square-free decomposition over Z; each
    square-free factor is solved by a companion eigensolve and Newton-polished.
    """
    if d.is_zero:
        raise AlexanderError("zero polynomial has no root set")
    _content, factors = sp.sqf_list(d.to_poly())
    out: list[UnitCircleRoot] = []
    for factor, mult in factors:
        coeffs = [int(c) for c in factor.all_coeffs()]
        if len(coeffs) < 2:
            continue
        for z0 in np.roots(coeffs):
            z = _polish_root(coeffs, complex(z0))
            if abs(abs(z) - 1.0) >= tol:
                continue
            if abs(z.imag) < 1e-15:
                z = complex(z.real, 0.0)
            out.append(UnitCircleRoot(
                value=z,
                argument=cmath.phase(z),
                multiplicity=int(mult),
                simple=(mult == 1),
            ))
    out.sort(key=lambda r: r.argument)
    return out


def alexander_points(
    roots: list[UnitCircleRoot], k: int, tol: float = 1e-9
) -> list[AlexanderPoint]:
    """
    Place each unit-circle root on the horizontal axis at x = k·arg(ξ)/2π mod k.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    points = []
    for r in roots:
        x = float(np.mod(k * r.argument / (2 * math.pi), k))
        if x >= k:
            x = 0.0
        points.append(AlexanderPoint(
            x=x,
            multiple=not r.simple,
            excluded=abs(r.value ** k - 1) < tol,
            root=r,
        ))
    points.sort(key=lambda a: a.x)
    return points


def lspace_form_check(d: LaurentPoly) -> bool:
    """
    True iff the nonzero coefficients of Δ are ±1 with alternating signs.
    """
    if d.is_zero:
        raise AlexanderError("zero polynomial")
    nz = [c for c in d.normalized().coeffs if c != 0]
    if any(abs(c) != 1 for c in nz):
        return False
    return all(a == -b for a, b in zip(nz, nz[1:]))


@dataclass(frozen=True)
class AlexanderSummary:
    polynomial: LaurentPoly
    roots: tuple[UnitCircleRoot, ...]
    points: tuple[AlexanderPoint, ...]
    lspace_form: bool
    value_at_one: int


def summarize_alexander(p: Presentation, h: HomologyData, tol: float = 1e-9) -> AlexanderSummary:
    delta = alexander_polynomial(p, h)
    roots = unit_circle_roots(delta, tol)
    points = alexander_points(roots, h.k, tol)
    summary = AlexanderSummary(
        polynomial=delta,
        roots=tuple(roots),
        points=tuple(points),
        lspace_form=lspace_form_check(delta),
        value_at_one=int(sum(delta.coeffs)),
    )
    logger.info(
        "Δ = %s; %d unit-circle roots (%d simple), %d Alexander points",
        delta, len(roots), sum(r.simple for r in roots), len(points),
    )
    return summary
