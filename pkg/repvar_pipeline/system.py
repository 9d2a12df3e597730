# repvar_pipeline/system.py
from __future__ import annotations

import cmath
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import mpmath as mp
import numpy as np

from group_pipeline.homology import HomologyData
from group_pipeline.presentation import Presentation, Word

logger = logging.getLogger("elocus")

ABELIAN_BRANCH = 0


class Chart(str, Enum):
    NORMAL = "normal"
    ABELIAN = "abelian"


@dataclass(frozen=True, eq=False)
class RepPoint:
    """
    A numerical representation: chart parameters, generator matrices and the
    holonomy target it was solved for.

    params are complex128 at 53 bits and mpmath mpc above that.
    """
    params: tuple
    matrices: tuple[np.ndarray, ...]
    residual: float
    precision_bits: int
    branch_id: int
    angle_index: int
    target: complex
    signs: tuple[int, ...] = ()
    chart: Chart = Chart.NORMAL
    angle: complex = 0.0  # unwrapped -i·log(target), abelian chart only

    @property
    def zeta(self):
        """Chosen eigenvalue of ρ(μ); its square is the holonomy."""
        return self.params[-1]


def adj(M: np.ndarray) -> np.ndarray:
    """Adjugate of a 2x2 matrix; the inverse when det = 1."""
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]], dtype=M.dtype)


def identity(dtype) -> np.ndarray:
    if dtype == object:
        return np.array([[mp.mpc(1), mp.mpc(0)], [mp.mpc(0), mp.mpc(1)]], dtype=object)
    return np.eye(2, dtype=complex)


def word_matrix(mats: Sequence[np.ndarray], word: Word) -> np.ndarray:
    dtype = mats[0].dtype if mats else complex
    W = identity(dtype)
    for g, e in word:
        W = W @ (mats[g] if e > 0 else adj(mats[g]))
    return W


def trace(M: np.ndarray):
    return M[0, 0] + M[1, 1]


def det(M: np.ndarray):
    return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]


def sup_norm(values) -> float:
    return float(max((abs(v) for v in np.ravel(values)), default=0.0))


def commutator_residual(mats: Sequence[np.ndarray], p: Presentation) -> float:
    """Distance of [ρ(μ), ρ(λ)] from ±I."""
    M = word_matrix(mats, p.meridian)
    L = word_matrix(mats, p.longitude)
    C = M @ L @ adj(M) @ adj(L)
    I = identity(C.dtype)
    return min(sup_norm(C - I), sup_norm(C + I))


def psl_key(mats: Sequence[np.ndarray]) -> np.ndarray:
    """
    Sign-invariant character coordinates, used to identify points up to
    conjugation and the SL/PSL sign ambiguity.
    """
    key: list[complex] = []
    tr = [complex(trace(m)) for m in mats]
    key.extend(t * t for t in tr)
    for i, j in itertools.combinations(range(len(mats)), 2):
        tij = complex(trace(mats[i] @ mats[j]))
        key.append(tij * tij)
        key.append(tr[i] * tr[j] * tij)
    return np.array(key, dtype=complex)


def same_point(key1: np.ndarray, key2: np.ndarray, tol: float) -> bool:
    scale = 1.0 + float(np.max(np.abs(key1)))
    return float(np.max(np.abs(key1 - key2))) < tol * scale


@dataclass(frozen=True, eq=False)
class RepSystem:
    """
    Equations of the representation variety in a matrix normal form, plus the
    holonomy constraint H_μ = z.

    Unknowns, in order: s, t, u for the first two generators
    (ρ(a) = [[s, 1], [0, 1/s]], ρ(b) = [[t, 0], [u, 1/t]]), four entries for every
    further generator, then the augmentation v0, v1, ζ with ρ(μ)v = ζv,
    c·v = 1 and ζ² = z.
    """
    presentation: Presentation
    homology: HomologyData
    chart_vector: tuple[complex, complex]
    sign_choices: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return self.presentation.rank

    @property
    def n_matrix_unknowns(self) -> int:
        return 3 + 4 * (self.rank - 2)

    @property
    def n_unknowns(self) -> int:
        return self.n_matrix_unknowns + 3

    @property
    def n_equations(self) -> int:
        return 4 * len(self.presentation.relators) + (self.rank - 2) + 4

    # ----- matrices -----

    def matrices(self, x: np.ndarray) -> list[np.ndarray]:
        dt = x.dtype
        s, t, u = x[0], x[1], x[2]
        zero = x[0] * 0
        mats = [
            np.array([[s, zero + 1], [zero, 1 / s]], dtype=dt),
            np.array([[t, zero], [u, 1 / t]], dtype=dt),
        ]
        for g in range(2, self.rank):
            q = 3 + 4 * (g - 2)
            mats.append(np.array([[x[q], x[q + 1]], [x[q + 2], x[q + 3]]], dtype=dt))
        return mats

    def _matrix_derivatives(self, x: np.ndarray) -> list[list[tuple[int, np.ndarray]]]:
        dt = x.dtype
        zero = x[0] * 0
        one = zero + 1

        def m(a, b, c, d):
            return np.array([[a, b], [c, d]], dtype=dt)

        d: list[list[tuple[int, np.ndarray]]] = [
            [(0, m(one, zero, zero, -1 / x[0] ** 2))],
            [(1, m(one, zero, zero, -1 / x[1] ** 2)), (2, m(zero, zero, one, zero))],
        ]
        for g in range(2, self.rank):
            q = 3 + 4 * (g - 2)
            d.append([
                (q, m(one, zero, zero, zero)),
                (q + 1, m(zero, one, zero, zero)),
                (q + 2, m(zero, zero, one, zero)),
                (q + 3, m(zero, zero, zero, one)),
            ])
        return d

    @staticmethod
    def _word_with_gradient(mats, dmats, word: Word):
        letters = [(mats[g] if e > 0 else adj(mats[g]), g, e) for g, e in word]
        I = identity(mats[0].dtype)
        prefix = [I]
        for M, _, _ in letters:
            prefix.append(prefix[-1] @ M)
        suffix = [I] * (len(letters) + 1)
        for p in range(len(letters) - 1, -1, -1):
            suffix[p] = letters[p][0] @ suffix[p + 1]
        grads: dict[int, np.ndarray] = {}
        for p, (_, g, e) in enumerate(letters):
            for j, dG in dmats[g]:
                term = prefix[p] @ (dG if e > 0 else adj(dG)) @ suffix[p + 1]
                grads[j] = grads[j] + term if j in grads else term
        return prefix[-1], grads

    # ----- equations -----

    def residual(self, x: np.ndarray, z, signs: Sequence[int]) -> np.ndarray:
        p = self.presentation
        mats = self.matrices(x)
        F: list = []
        for r, eps in zip(p.relators, signs):
            W = word_matrix(mats, r)
            F.extend([W[0, 0] - eps, W[0, 1], W[1, 0], W[1, 1] - eps])
        for g in range(2, self.rank):
            F.append(det(mats[g]) - 1)
        nm = self.n_matrix_unknowns
        v0, v1, zeta = x[nm], x[nm + 1], x[nm + 2]
        M = word_matrix(mats, p.meridian)
        F.append((M[0, 0] - zeta) * v0 + M[0, 1] * v1)
        F.append(M[1, 0] * v0 + (M[1, 1] - zeta) * v1)
        c0, c1 = self.chart_vector
        F.append(c0 * v0 + c1 * v1 - 1)
        F.append(zeta * zeta - z)
        return np.array(F, dtype=x.dtype)

    def jacobian(self, x: np.ndarray, z, signs: Sequence[int]) -> np.ndarray:
        p = self.presentation
        mats = self.matrices(x)
        dmats = self._matrix_derivatives(x)
        n = self.n_unknowns
        J = np.zeros((self.n_equations, n), dtype=x.dtype)
        if x.dtype == object:
            J[:, :] = mp.mpc(0)
        row = 0
        for r in p.relators:
            _, grads = self._word_with_gradient(mats, dmats, r)
            for j, dW in grads.items():
                J[row:row + 4, j] = dW.reshape(4)
            row += 4
        for g in range(2, self.rank):
            q = 3 + 4 * (g - 2)
            J[row, q] = x[q + 3]
            J[row, q + 1] = -x[q + 2]
            J[row, q + 2] = -x[q + 1]
            J[row, q + 3] = x[q]
            row += 1
        nm = self.n_matrix_unknowns
        v = np.array([x[nm], x[nm + 1]], dtype=x.dtype)
        zeta = x[nm + 2]
        M, grads = self._word_with_gradient(mats, dmats, p.meridian)
        for j, dM in grads.items():
            J[row:row + 2, j] = dM @ v
        J[row, nm] = M[0, 0] - zeta
        J[row, nm + 1] = M[0, 1]
        J[row + 1, nm] = M[1, 0]
        J[row + 1, nm + 1] = M[1, 1] - zeta
        J[row, nm + 2] = -v[0]
        J[row + 1, nm + 2] = -v[1]
        row += 2
        J[row, nm] = self.chart_vector[0]
        J[row, nm + 1] = self.chart_vector[1]
        row += 1
        J[row, nm + 2] = 2 * zeta
        return J

    # ----- points -----

    def make_point(
        self,
        x: np.ndarray,
        z: complex,
        signs: tuple[int, ...],
        *,
        branch_id: int,
        angle_index: int,
        bits: int = 53,
        residual: float | None = None,
    ) -> RepPoint:
        if residual is None:
            residual = sup_norm(self.residual(x, z, signs))
        return RepPoint(
            params=tuple(x),
            matrices=tuple(self.matrices(x)),
            residual=residual,
            precision_bits=bits,
            branch_id=branch_id,
            angle_index=angle_index,
            target=complex(z),
            signs=signs,
            chart=Chart.NORMAL,
        )

    def abelian_point(
        self, angle: complex, *, angle_index: int, bits: int = 53
    ) -> RepPoint:
        return abelian_point(self.homology, angle, angle_index=angle_index, bits=bits)

    def residual_at(self, point: RepPoint) -> float:
        if point.chart is Chart.ABELIAN:
            return abelian_residual(self.presentation, point)
        x = np.array(point.params, dtype=object if point.precision_bits > 53 else complex)
        return sup_norm(self.residual(x, point.target, point.signs))


def abelian_point(
    h: HomologyData, angle: complex, *, angle_index: int, bits: int = 53
) -> RepPoint:
    """
    Closed-form reducible point ρ(g) = diag(w^{f(g)}, w^{-f(g)}), w = e^{iφ/2k},
    whose holonomy is e^{iφ}. φ is real on the unit circle.
    """
    k = h.k
    if bits > 53:
        with mp.workprec(bits):
            w = mp.exp(1j * mp.mpc(angle) / (2 * k))
            mats = tuple(
                np.array([[w ** f, mp.mpc(0)], [mp.mpc(0), w ** (-f)]], dtype=object)
                for f in h.free_images
            )
            zeta = w ** k
    else:
        w = cmath.exp(1j * angle / (2 * k))
        mats = tuple(
            np.array([[w ** f, 0], [0, w ** (-f)]], dtype=complex) for f in h.free_images
        )
        zeta = w ** k
    return RepPoint(
        params=(w, zeta),
        matrices=mats,
        residual=0.0,
        precision_bits=bits,
        branch_id=ABELIAN_BRANCH,
        angle_index=angle_index,
        target=cmath.exp(1j * angle),
        signs=(),
        chart=Chart.ABELIAN,
        angle=angle,
    )


def abelian_residual(p: Presentation, point: RepPoint) -> float:
    mats = point.matrices
    res = 0.0
    for r in p.relators:
        W = word_matrix(mats, r)
        res = max(res, sup_norm(W - identity(W.dtype)))
    zeta = point.zeta
    target = point.target
    if point.precision_bits > 53:
        target = mp.exp(1j * mp.mpc(point.angle))
    return max(res, float(abs(zeta * zeta - target)))


def build_system(
    p: Presentation, h: HomologyData, rng: np.random.Generator
) -> RepSystem:
    """
    Build the normal-form system for a presentation of rank >= 2.

    Args:
        p (Presentation): Validated presentation.
        h (HomologyData): Its abelianization.
        rng (np.random.Generator): Source for the random eigenvector chart.

    Returns:
        RepSystem: Equation description with every relator sign system enumerated.
    """
    if p.rank < 2:
        raise ValueError("rank-1 groups have only the abelian branch; no system to build")
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    signs = tuple(itertools.product((1, -1), repeat=len(p.relators)))
    system = RepSystem(
        presentation=p,
        homology=h,
        chart_vector=(complex(c[0]), complex(c[1])),
        sign_choices=signs,
    )
    logger.info(
        "system %s: %d matrix unknowns (+3 holonomy), %d equations, %d sign systems",
        p.name, system.n_matrix_unknowns, system.n_equations, len(signs),
    )
    return system


def holonomy_mu(point: RepPoint, p: Presentation, reference: complex | None = None) -> complex:
    """
    Square of the eigenvalue of ρ(μ).

    With a reference (previous frame's holonomy) the eigenvalue whose square is
    closest to it is taken; otherwise the one of modulus >= 1.
    """
    M = word_matrix(point.matrices, p.meridian)
    M = np.array([[complex(M[0, 0]), complex(M[0, 1])], [complex(M[1, 0]), complex(M[1, 1])]])
    I = np.eye(2)
    if min(np.max(np.abs(M - I)), np.max(np.abs(M + I))) < 1e-12:
        return 1.0 + 0j
    tr = M[0, 0] + M[1, 1]
    disc = cmath.sqrt(tr * tr - 4)
    if abs(disc) < 1e-12:
        return 1.0 + 0j  # parabolic
    e1, e2 = (tr + disc) / 2, (tr - disc) / 2
    if reference is not None:
        return min((e1 * e1, e2 * e2), key=lambda h2: abs(h2 - reference))
    e = e1 if abs(e1) >= abs(e2) else e2
    return e * e
