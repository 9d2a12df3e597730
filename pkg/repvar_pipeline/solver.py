# repvar_pipeline/solver.py
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import mpmath as mp
import numpy as np

import quiet
from errors import PolishError
from repvar_pipeline.system import (
    Chart,
    RepPoint,
    RepSystem,
    abelian_point,
    abelian_residual,
    sup_norm,
)

logger = logging.getLogger("elocus")

POLISH_ENTRY_RESIDUAL = 1e-6
POLISH_MAX_STEPS = 40


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool
    condition: float = 1.0


def newton(
    system: RepSystem,
    x0: np.ndarray,
    z: complex,
    signs: tuple[int, ...],
    *,
    max_iter: int,
    tol: float,
    damped: bool = False,
) -> NewtonResult:
    """
    Gauss-Newton at double precision on the (overdetermined, consistent) system.

    Args:
        system (RepSystem): Equations.
        x0 (np.ndarray): Start point, complex128.
        z (complex): Holonomy target.
        signs (tuple[int, ...]): Relator sign system (±I per relator).
        max_iter (int): Iteration cap.
        tol (float): Convergence threshold on the sup-norm residual.
        damped (bool): Backtrack on the step length while the residual grows.

    Returns:
        NewtonResult: Last iterate, its residual and the Jacobian condition number.
    """
    x = np.array(x0, dtype=complex)
    with quiet.quiet_numerics():
        F = system.residual(x, z, signs)
        res = sup_norm(F)
        for it in range(1, max_iter + 1):
            if not np.isfinite(res):
                return NewtonResult(x, float("inf"), it, False)
            J = system.jacobian(x, z, signs)
            if not np.all(np.isfinite(J)):
                return NewtonResult(x, float("inf"), it, False)
            delta = np.linalg.lstsq(J, -F, rcond=None)[0]
            step = 1.0
            while True:
                x_new = x + step * delta
                F_new = system.residual(x_new, z, signs)
                res_new = sup_norm(F_new)
                if not damped or res_new < res or step < 1.0 / 64:
                    break
                step /= 2
            x, F, res = x_new, F_new, res_new
            if res < tol:
                J = system.jacobian(x, z, signs)
                cond = float(np.linalg.cond(J)) if np.all(np.isfinite(J)) else float("inf")
                return NewtonResult(x, res, it, True, cond)
    return NewtonResult(x, res, max_iter, False)


def polish(point: RepPoint, bits: int, system: RepSystem | None = None) -> RepPoint:
    """
    Refine a point with Newton at `bits` bits of mantissa until the residual is
    below 2^(8 - bits).

    Args:
        point (RepPoint): Point with residual < 1e-6.
        bits (int): Working precision.
        system (RepSystem | None): Required for normal-chart points.

    Returns:
        RepPoint: Polished copy with precision_bits = bits.
    """
    if not point.residual < POLISH_ENTRY_RESIDUAL:
        raise PolishError(f"residual {point.residual:.3g} too large to polish")

    if point.chart is Chart.ABELIAN:
        if system is None:
            raise PolishError("abelian polish needs the system for its homology")
        fresh = abelian_point(
            system.homology, point.angle, angle_index=point.angle_index, bits=bits
        )
        fresh = replace(fresh, branch_id=point.branch_id)
        with mp.workprec(bits):
            return replace(fresh, residual=abelian_residual(system.presentation, fresh))

    if system is None:
        raise PolishError("polishing a normal-chart point needs its system")

    target_res = 2.0 ** (8 - bits)
    with mp.workprec(bits):
        x = np.array([mp.mpc(v) for v in point.params], dtype=object)
        z = mp.mpc(point.target)
        F = system.residual(x, z, point.signs)
        history = [sup_norm(F)]
        for _ in range(POLISH_MAX_STEPS):
            if history[-1] < target_res:
                break
            J = mp.matrix(system.jacobian(x, z, point.signs).tolist())
            Fm = mp.matrix(list(F))
            JH = J.H
            delta = mp.lu_solve(JH * J, -(JH * Fm))
            x = np.array([x[i] + delta[i] for i in range(len(x))], dtype=object)
            F = system.residual(x, z, point.signs)
            history.append(sup_norm(F))
            recent = history[-6:]
            if len(recent) == 6 and not all(b < a for a, b in zip(recent, recent[1:])):
                raise PolishError(
                    f"polish diverged at {bits} bits: residuals "
                    + ", ".join(f"{r:.2e}" for r in recent)
                )
        else:
            raise PolishError(f"polish did not reach 2^{8 - bits} in {POLISH_MAX_STEPS} steps")

        logger.debug(
            "polished branch %d angle %d in %d steps: %.2e",
            point.branch_id, point.angle_index, len(history) - 1, history[-1],
        )
        return replace(
            point,
            params=tuple(x),
            matrices=tuple(system.matrices(x)),
            residual=history[-1],
            precision_bits=bits,
        )
