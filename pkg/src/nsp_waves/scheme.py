"""Explicit SSP-RK2 semidiscretization of the viscous ion equations.

The update keeps both equations in flux form so discrete cell sums telescope
exactly.  The electric force is absorbed into the momentum flux through the
potential equation: whenever phi_xx = n - exp(-phi),

    n phi_x = (phi_x^2 / 2 - exp(-phi))_x,

so the semidiscrete system is

    dn/dt = -D1 m
    dm/dt = -D1 [ m^2/n + A n - (D1 phi)^2 / 2 + exp(-phi) ] + D2 (m/n)

with second-order central differences D1, D2.  The potential is re-solved
(implicitly, damped Newton) after every stage so the flux sees a consistent
phi.  Central convective fluxes are adequate here because every scenario we
run is smooth: small periodic perturbations, resolved viscous profiles, or
smoothed fans.  There is no shock capturing and none is needed.

Periodic kernels act on the unique samples (duplicated endpoint stripped);
line kernels act on the full array and leave the two endpoint values to the
caller, which pins them to boundary data after each stage.
"""

from __future__ import annotations

import numpy as np

from .grid import cyc_next, cyc_prev, diff1_line_arr, diff2_line_arr
from .poisson import pb_newton_arr


class PositivityError(RuntimeError):
    """Density lost positivity during a time step."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class BlowUpError(RuntimeError):
    """A monitored norm exceeded its abort threshold."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


def stable_dt(n, m, spacing, temperature, cfl_hyperbolic=0.4, cfl_parabolic=0.25):
    """Largest admissible step: min(cfl_h*h/max(|u|+c), cfl_p*h^2)."""
    u_max = float(np.max(np.abs(m / n)))
    c = np.sqrt(temperature + 1.0)
    return min(
        cfl_hyperbolic * spacing / (u_max + c),
        cfl_parabolic * spacing * spacing,
    )


def momentum_flux_arr(nv, mv, pv, dphi, temperature):
    """Total momentum flux m^2/n + A n - phi_x^2/2 + exp(-phi)."""
    return mv * mv / nv + temperature * nv - 0.5 * dphi * dphi + np.exp(-pv)


def rhs_periodic_arr(nv, mv, pv, h, temperature):
    two_h = 2.0 * h
    h2 = h * h
    dphi = (cyc_next(pv) - cyc_prev(pv)) / two_h
    u = mv / nv
    flux = u * mv + temperature * nv - 0.5 * dphi * dphi + np.exp(-pv)
    dn = -(cyc_next(mv) - cyc_prev(mv)) / two_h
    dm = -(cyc_next(flux) - cyc_prev(flux)) / two_h
    dm += (cyc_next(u) - 2.0 * u + cyc_prev(u)) / h2
    return dn, dm


def rhs_line_arr(nv, mv, pv, h, temperature):
    # One-sided stencils fill the two end entries; steppers overwrite them
    # with Dirichlet data anyway, this just keeps the arrays finite.
    dphi = diff1_line_arr(pv, h)
    flux = momentum_flux_arr(nv, mv, pv, dphi, temperature)
    dn = -diff1_line_arr(mv, h)
    dm = -diff1_line_arr(flux, h) + diff2_line_arr(mv / nv, h)
    return dn, dm


def _check_positive(nv, t):
    if np.min(nv) <= 0.0:
        raise PositivityError(
            "density lost positivity (min %.3e) at t=%.6f" % (float(np.min(nv)), t),
            t=t,
            state=nv,
        )


def step_periodic_arr(nv, mv, pv, dt, h, temperature, t=0.0, poisson_tol=1e-9):
    """One Heun step on periodic sample arrays; returns (n, m, phi)."""
    dn1, dm1 = rhs_periodic_arr(nv, mv, pv, h, temperature)
    n1 = nv + dt * dn1
    m1 = mv + dt * dm1
    _check_positive(n1, t + dt)
    p1, _, _ = pb_newton_arr(n1, h, True, pv, tol=poisson_tol)

    dn2, dm2 = rhs_periodic_arr(n1, m1, p1, h, temperature)
    n2 = 0.5 * (nv + n1 + dt * dn2)
    m2 = 0.5 * (mv + m1 + dt * dm2)
    _check_positive(n2, t + dt)
    p2, _, _ = pb_newton_arr(n2, h, True, p1, tol=poisson_tol)
    return n2, m2, p2


def step_line_arr(nv, mv, pv, dt, h, temperature, boundary, t=0.0, poisson_tol=1e-9):
    """One Heun step on a truncated line with Dirichlet pinning.

    ``boundary`` maps a time to (n_left, m_left, n_right, m_right); both the
    Euler predictor and the final average live at t+dt, so both get pinned to
    boundary(t+dt).  The potential uses the quasineutral Dirichlet values
    phi(+-L) = -ln n(+-L).
    """
    t_new = t + dt
    n_l, m_l, n_r, m_r = boundary(t_new)
    phi_l, phi_r = -np.log(n_l), -np.log(n_r)

    dn1, dm1 = rhs_line_arr(nv, mv, pv, h, temperature)
    n1 = nv + dt * dn1
    m1 = mv + dt * dm1
    n1[0], m1[0], n1[-1], m1[-1] = n_l, m_l, n_r, m_r
    _check_positive(n1, t_new)
    p1, _, _ = pb_newton_arr(n1, h, False, pv, phi_l=phi_l, phi_r=phi_r, tol=poisson_tol)

    dn2, dm2 = rhs_line_arr(n1, m1, p1, h, temperature)
    n2 = 0.5 * (nv + n1 + dt * dn2)
    m2 = 0.5 * (mv + m1 + dt * dm2)
    n2[0], m2[0], n2[-1], m2[-1] = n_l, m_l, n_r, m_r
    _check_positive(n2, t_new)
    p2, _, _ = pb_newton_arr(n2, h, False, p1, phi_l=phi_l, phi_r=phi_r, tol=poisson_tol)
    return n2, m2, p2


def advance_to(nv, mv, pv, t, t_target, h, temperature, *, periodic,
               boundary=None, cfl_hyperbolic=0.4, cfl_parabolic=0.25,
               poisson_tol=1e-9, monitor=None, dt_max=None):
    """March the state from t to t_target in uniform substeps.

    The substep count is fixed up front from the stability bound at entry
    (fields change little over one output interval, and the bound carries a
    comfortable margin), so output times are hit exactly.  ``dt_max`` imposes
    a further cap on the substep.  ``monitor``, if given, is called as
    monitor(t, nv, mv, pv) after every step and may raise to abort (the
    blow-up guards live there).
    """
    span = t_target - t
    if span <= 0.0:
        return nv, mv, pv
    bound = stable_dt(nv, mv, h, temperature, cfl_hyperbolic, cfl_parabolic)
    if dt_max is not None:
        bound = min(bound, dt_max)
    n_sub = max(1, int(np.ceil(span / bound - 1e-12)))
    dt = span / n_sub
    if dt <= 0.0 or not np.isfinite(dt):
        raise ValueError("degenerate substep %r" % dt)
    for i in range(n_sub):
        if periodic:
            nv, mv, pv = step_periodic_arr(
                nv, mv, pv, dt, h, temperature, t=t, poisson_tol=poisson_tol
            )
        else:
            nv, mv, pv = step_line_arr(
                nv, mv, pv, dt, h, temperature, boundary, t=t, poisson_tol=poisson_tol
            )
        t += dt
        if monitor is not None:
            monitor(t, nv, mv, pv)
    return nv, mv, pv
