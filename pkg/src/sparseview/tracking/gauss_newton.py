"""Damped Gauss-Newton least-squares solver.

Each iteration first attempts the undamped step (the exact
normal-equations solution, computed through a rank-safe least-squares
solve of ``J dx = -r``); only if that fails to reduce the cost does it
fall back to Levenberg-damped steps ``(J^T J + mu I) dx = -J^T r`` with
escalating ``mu``. Linear problems therefore land on the least-squares
solution in one accepted step, while the damping ladder rescues the
usual non-convex energies. Accepted iterates never increase the cost
and the best iterate seen is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SolverDivergedError

DEFAULT_DAMPING = 1e-4
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 50
_DAMPING_LADDER = 9  # mu, 10 mu, ... up to mu * 10^8


@dataclass
class GaussNewtonResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool


def finite_difference_jacobian(residual, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian fallback."""
    x = np.asarray(x, dtype=float)
    r0 = np.asarray(residual(x), dtype=float)
    jac = np.zeros((r0.size, x.size))
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.asarray(residual(xp)) - np.asarray(residual(xm))) / (2.0 * h)
    return jac


def gauss_newton(
    residual,
    x0,
    jacobian=None,
    max_iters: int = DEFAULT_MAX_ITERS,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
) -> GaussNewtonResult:
    """Minimize ``|residual(x)|^2``.

    Args:
        residual: x -> r(x). May re-associate internal correspondences;
            the value at the current iterate is what acceptance tests.
        x0: initial iterate.
        jacobian: x -> J(x); central finite differences when omitted.
        max_iters: accepted-step budget.
        damping: base Levenberg damping ``mu``.
        tol: stop once the accepted step has ``|dx| < tol``.

    Returns:
        Best-so-far iterate by cost.

    Raises:
        SolverDivergedError: if the residual turns non-finite at the
            current iterate or along every damped step; carries the last
            finite iterate.
    """
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    r = np.asarray(residual(x), dtype=float).reshape(-1)
    if not np.all(np.isfinite(r)):
        raise SolverDivergedError("residual not finite at x0", last_iterate=None)
    cost = float(r @ r)
    best_x, best_cost = x.copy(), cost

    iterations = 0
    converged = False
    for _ in range(max_iters):
        if jacobian is not None:
            jac = np.asarray(jacobian(x), dtype=float)
        else:
            jac = finite_difference_jacobian(residual, x)
        jac = jac.reshape(r.size, x.size)
        if not np.all(np.isfinite(jac)):
            raise SolverDivergedError("Jacobian not finite", last_iterate=best_x)

        accepted = False
        saw_finite_trial = False
        mu = 0.0
        for attempt in range(_DAMPING_LADDER + 1):
            if mu == 0.0:
                dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
            else:
                jtj = jac.T @ jac + mu * np.eye(x.size)
                try:
                    dx = np.linalg.solve(jtj, -jac.T @ r)
                except np.linalg.LinAlgError:
                    mu = damping if mu == 0.0 else mu * 10.0
                    continue
            x_new = x + dx
            r_new = np.asarray(residual(x_new), dtype=float).reshape(-1)
            if np.all(np.isfinite(r_new)):
                saw_finite_trial = True
                cost_new = float(r_new @ r_new)
                if cost_new < cost:
                    x, r, cost = x_new, r_new, cost_new
                    accepted = True
                    break
            mu = damping if mu == 0.0 else mu * 10.0
        if not saw_finite_trial:
            raise SolverDivergedError("residual not finite along every step", last_iterate=best_x)
        if not accepted:
            break
        iterations += 1
        if cost < best_cost:
            best_x, best_cost = x.copy(), cost
        if float(np.linalg.norm(dx)) < tol:
            converged = True
            break
    return GaussNewtonResult(x=best_x, cost=best_cost, iterations=iterations, converged=converged)
