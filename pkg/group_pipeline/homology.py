# group_pipeline/homology.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gcd, lcm

from errors import PresentationError
from group_pipeline.presentation import Presentation, Word

logger = logging.getLogger("elocus")

IntMatrix = list[list[int]]


def _identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(rows: IntMatrix, ncols: int) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """
    Smith normal form with unimodular transforms.

    Args:
        rows (IntMatrix): m x n integer matrix (m may be 0).
        ncols (int): n, needed when the matrix has no rows.

    Returns:
        tuple: (D, P, Q) with D = P @ A @ Q diagonal, d_i | d_{i+1}, d_i >= 0.
    """
    A = [list(map(int, r)) for r in rows]
    m, n = len(A), ncols
    P, Q = _identity(m), _identity(n)

    def swap_rows(i: int, j: int) -> None:
        A[i], A[j] = A[j], A[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i: int, j: int) -> None:
        for M in (A, Q):
            for r in M:
                r[i], r[j] = r[j], r[i]

    def add_row(dst: int, src: int, c: int) -> None:
        # row_dst += c * row_src
        for M in (A, P):
            M[dst] = [x + c * y for x, y in zip(M[dst], M[src])]

    def add_col(dst: int, src: int, c: int) -> None:
        for M in (A, Q):
            for r in M:
                r[dst] += c * r[src]

    for t in range(min(m, n)):
        while True:
            nonzero = [
                (abs(A[i][j]), i, j)
                for i in range(t, m)
                for j in range(t, n)
                if A[i][j] != 0
            ]
            if not nonzero:
                break
            _, i, j = min(nonzero)
            swap_rows(t, i)
            swap_cols(t, j)
            p = A[t][t]

            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))

            if any(A[i][t] for i in range(t + 1, m)) or any(A[t][j] for j in range(t + 1, n)):
                continue  # remainders are smaller than the pivot; re-pivot

            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is not None:
                add_row(t, bad, 1)
                continue
            break

        if t < m and A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            P[t] = [-x for x in P[t]]

    return A, P, Q


def _matvec(M: IntMatrix, v: list[int]) -> list[int]:
    return [sum(a * b for a, b in zip(row, v)) for row in M]


def solve_integer_system(E: IntMatrix, b: list[int], ncols: int) -> list[int] | None:
    """
    Solve E @ n = b over the integers.

    Returns:
        list[int] | None: One solution, or None if none exists.
    """
    D, P, Q = smith_normal_form(E, ncols)
    Pb = _matvec(P, b)
    y = [0] * ncols
    for i, rhs in enumerate(Pb):
        d = D[i][i] if i < ncols else 0
        if d == 0:
            if rhs != 0:
                return None
        elif rhs % d:
            return None
        else:
            y[i] = rhs // d
    return _matvec(Q, y)


@dataclass(frozen=True)
class HomologyData:
    """
    H_1(M; Z) = Z + torsion, read off from the Smith normal form of the
    abelianized relators.
    """
    free_rank: int
    torsion_order: int
    torsion: tuple[int, ...]
    free_images: tuple[int, ...]
    k: int
    mu_index: int


def abelianization_data(p: Presentation) -> HomologyData:
    """
    Compute the abelianization of the presentation and the peripheral indices.

    Args:
        p (Presentation): Validated presentation.

    Returns:
        HomologyData: Free rank (always 1), torsion, per-generator free images,
        order k of the longitude and index of the meridian.
    """
    E = p.exponent_matrix()
    D, _P, Q = smith_normal_form(E, p.rank)
    diag = [D[i][i] for i in range(min(len(D), p.rank))]
    nonzero = [d for d in diag if d != 0]
    r = len(nonzero)
    free_rank = p.rank - r
    if free_rank != 1:
        raise PresentationError(
            f"{p.name}: free rank of H_1 is {free_rank}, expected 1 "
            "(not a rational homology solid torus)"
        )

    # In the basis given by the columns of Q, the relations are D's rows; column r is free.
    f = r
    images = [Q[g][f] for g in range(p.rank)]
    mu_image = sum(e * images[g] for g, e in p.meridian)
    if mu_image == 0:
        raise PresentationError(f"{p.name}: meridian is torsion in H_1")
    if mu_image < 0:
        images = [-x for x in images]
        mu_image = -mu_image

    lam = p.longitude.exponent_sums(p.rank)
    coords = [sum(lam[g] * Q[g][j] for g in range(p.rank)) for j in range(p.rank)]
    if coords[f] != 0:
        raise PresentationError(
            f"{p.name}: longitude has free image {coords[f]}, expected 0"
        )
    k = 1
    for i, d in enumerate(nonzero):
        if d > 1:
            k = lcm(k, d // gcd(coords[i] % d, d))

    torsion = tuple(d for d in nonzero if d > 1)
    torsion_order = 1
    for d in torsion:
        torsion_order *= d

    if mu_image != k:
        raise PresentationError(
            f"{p.name}: meridian index {mu_image} differs from longitude order {k}; "
            "peripheral words do not form a homological framing"
        )

    h = HomologyData(
        free_rank=free_rank,
        torsion_order=torsion_order,
        torsion=torsion,
        free_images=tuple(images),
        k=k,
        mu_index=mu_image,
    )
    logger.debug("homology of %s: torsion=%s k=%d images=%s", p.name, torsion, k, images)
    return h


def free_image(h: HomologyData, w: Word) -> int:
    return sum(e * h.free_images[g] for g, e in w)
