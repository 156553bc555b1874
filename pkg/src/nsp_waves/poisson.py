"""Damped-Newton solver for the Poisson-Boltzmann potential equation.

Given ion density n, the potential solves

    phi_xx = n - exp(-phi)

with either periodic closure or Dirichlet data on a line segment. The
exp(-phi) term makes the Newton Jacobian (diff2 - diag(exp(-phi))) strictly
negative definite, so the iteration is safe from the usual pure-Neumann
nullspace and converges from the quasineutral initial guess phi = -ln n in a
handful of steps for the densities that occur here.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

from .grid import LINE, PERIODIC, SpatialField, cyc_next, cyc_prev
from .tridiag import TridiagonalSolveError


class PoissonConvergenceError(RuntimeError):
    pass


def poisson_residual(n: SpatialField, phi: SpatialField) -> SpatialField:
    from .grid import diff2

    return phi.like(diff2(phi).values - n.values + np.exp(-phi.values))


def _residual_arr(nv, pv, h, periodic, phi_l, phi_r):
    if periodic:
        lap = (cyc_next(pv) - 2.0 * pv + cyc_prev(pv)) / (h * h)
        return lap - nv + np.exp(-pv)
    r = np.empty_like(pv)
    r[1:-1] = (pv[2:] - 2.0 * pv[1:-1] + pv[:-2]) / (h * h) - nv[1:-1] + np.exp(-pv[1:-1])
    r[0] = pv[0] - phi_l
    r[-1] = pv[-1] - phi_r
    return r


def _newton_step(res, pv, inv_h2, periodic):
    # One linearized solve (diff2 - diag(exp(-phi))) step = -res.  Plain
    # systems go straight to dgtsv; the periodic corner entries are folded in
    # by the usual rank-one Sherman-Morrison trick.  Dirichlet rows of the
    # line system are pinned rows (identity), so step[0] = step[-1] = -res
    # there keeps the boundary residual exactly zero after the first sweep.
    m = pv.size
    diag = -2.0 * inv_h2 - np.exp(-pv)
    if not periodic:
        lower = np.full(m - 1, inv_h2)
        upper = np.full(m - 1, inv_h2)
        diag[0] = diag[-1] = 1.0
        lower[-1] = 0.0
        upper[0] = 0.0
        du2, d, du, x, info = lapack.dgtsv(lower, diag, upper, -res)
        if info != 0:
            raise TridiagonalSolveError("dgtsv zero pivot at row %d" % (info - 1))
        return x
    gamma = -diag[0]
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= inv_h2 * inv_h2 / gamma
    band = np.full(m - 1, inv_h2)
    two = np.empty((m, 2))
    two[:, 0] = -res
    two[:, 1] = 0.0
    two[0, 1] = gamma
    two[-1, 1] = inv_h2
    du2, dd, du, sol, info = lapack.dgtsv(band, d, band.copy(), two)
    if info != 0:
        raise TridiagonalSolveError("cyclic dgtsv zero pivot at row %d" % (info - 1))
    y, q = sol[:, 0], sol[:, 1]
    fac = inv_h2 / gamma
    denom = 1.0 + q[0] + fac * q[-1]
    if denom == 0.0:
        raise TridiagonalSolveError("cyclic reduction produced a singular correction")
    return y - q * ((y[0] + fac * y[-1]) / denom)


def pb_newton_arr(nv, h, periodic, pv, phi_l=None, phi_r=None, tol=1e-9, max_iter=50):
    """Damped Newton on raw sample arrays; the hot path for time stepping.

    ``nv`` holds the density samples (no duplicated endpoint for periodic
    closure) and ``pv`` the initial potential iterate, which is not modified.
    Returns (phi_values, iterations, sup_residual).
    """
    pv = pv.copy()
    if not periodic:
        pv[0], pv[-1] = phi_l, phi_r
    res = _residual_arr(nv, pv, h, periodic, phi_l, phi_r)
    res_norm = np.max(np.abs(res))
    iters = 0
    inv_h2 = 1.0 / (h * h)
    while res_norm > tol:
        if iters >= max_iter:
            raise PoissonConvergenceError(
                "Newton stalled at residual %.3e after %d iterations" % (res_norm, iters)
            )
        step = _newton_step(res, pv, inv_h2, periodic)
        lam = 1.0
        while True:
            trial = pv + lam * step
            trial_res = _residual_arr(nv, trial, h, periodic, phi_l, phi_r)
            trial_norm = np.max(np.abs(trial_res))
            if trial_norm <= (1.0 - 0.5 * lam) * res_norm or lam <= 1.0 / 64.0:
                break
            lam *= 0.5
        pv, res, res_norm = trial, trial_res, trial_norm
        iters += 1
    return pv, iters, float(res_norm)


def poisson_boltzmann_solve(
    n: SpatialField,
    phi_left: float | None = None,
    phi_right: float | None = None,
    init: SpatialField | None = None,
    tol: float = 1e-9,
    max_iter: int = 50,
) -> tuple[SpatialField, dict]:
    """Solve phi_xx = n - exp(-phi) for phi on the grid of ``n``.

    For line fields the Dirichlet values default to the quasineutral
    potentials -ln n at the two ends. Returns (phi, info) where info records
    the iteration count and the final sup-norm residual; raises
    PoissonConvergenceError if the damped Newton loop does not reach ``tol``
    within ``max_iter`` iterations.
    """
    if np.any(n.values <= 0.0):
        raise ValueError("density must be positive for the Boltzmann closure")
    h = n.grid.spacing
    periodic = n.boundary_kind == PERIODIC

    if periodic:
        nv = n.values[:-1]
        phi_l = phi_r = None
    else:
        nv = n.values
        phi_l = -float(np.log(n.values[0])) if phi_left is None else float(phi_left)
        phi_r = -float(np.log(n.values[-1])) if phi_right is None else float(phi_right)

    if init is not None:
        pv = init.values[:-1] if periodic else init.values
    else:
        pv = -np.log(nv)

    pv, iters, res_norm = pb_newton_arr(
        nv, h, periodic, pv, phi_l=phi_l, phi_r=phi_r, tol=tol, max_iter=max_iter
    )
    full = np.append(pv, pv[0]) if periodic else pv
    phi = SpatialField(n.grid, full, PERIODIC if periodic else LINE)
    return phi, {"iterations": iters, "residual_sup": res_norm}
