"""Shift curves for the composite shock ansatz.

The ansatz places the background profile at a time-dependent translate:
density/potential at x - st - X(t), momentum at x - st - Y(t).  Requiring the
excess mass and momentum integrals to stay zero forces (X, Y) to satisfy a
2-ODE system driven by the periodic solutions, with initial values picked by
two scalar root problems.  Everything here is quadrature over [periodic
fields] x [profile weight derivatives], so the pieces are: weight evaluation
from the profile's dense orbit, truncated line quadratures, scalar Newton for
the roots, classical RK4 for the trajectory, and the closed-form limits.

Conventions: jump brackets are (+ side) - (- side); the sigma weight is the
normalized density profile, increasing from 0 at -infinity to 1 at +infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import diff1_periodic_arr, diff2_periodic_arr
from .periodic import PerturbationSpec, PeriodicHistory
from .profile import ShockProfile


class ShiftError(RuntimeError):
    pass


@dataclass(frozen=True)
class MassLedger:
    """Half-line integrals of the localized part of the initial data.

    int_n_left / int_n_right hold the integrals of n0 - n_profile - rho0 over
    the negative/positive half-lines, int_m_left / int_m_right the momentum
    analogues.
    """

    int_n_left: float
    int_n_right: float
    int_m_left: float
    int_m_right: float

    def __post_init__(self):
        vals = (self.int_n_left, self.int_n_right, self.int_m_left, self.int_m_right)
        if not all(np.isfinite(vals)):
            raise ValueError("ledger integrals must be finite, got %r" % (vals,))

    @property
    def n_total(self) -> float:
        return self.int_n_left + self.int_n_right

    @property
    def m_total(self) -> float:
        return self.int_m_left + self.int_m_right


@dataclass
class ShiftState:
    t: float
    X: float
    Y: float


@dataclass(frozen=True)
class AsymptoticShifts:
    X_inf: float
    Y_inf: float
    zero_mass_residual: float


@dataclass(frozen=True)
class LocalizedBump:
    """Compact cos^2 window bump: amplitude * cos^2(pi (x-center)/width)."""

    amplitude: float
    center: float = 0.0
    width: float = 4.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        arg = (x - self.center) / self.width
        out = np.where(
            np.abs(arg) <= 0.5,
            self.amplitude * np.cos(np.pi * arg) ** 2,
            0.0,
        )
        return out if out.ndim else float(out)

    @property
    def mass(self) -> float:
        return self.amplitude * self.width / 2.0

    def mass_left_of(self, x: float) -> float:
        """Exact integral of the bump over (-inf, x]."""
        t = float(np.clip((x - self.center) / self.width, -0.5, 0.5))
        return self.amplitude * self.width * (
            0.5 * t + np.sin(2.0 * np.pi * t) / (4.0 * np.pi) + 0.25
        )


def weight_support(profile: ShockProfile, cutoff_rel=1e-12) -> float:
    """Half-width outside which sigma' (and the sigma tails) are negligible.

    The truncation threshold is relative to max sigma'; the periodic factors
    in the shift quadratures are bounded, so dropping the tails changes the
    integrals by less than cutoff * O(tail width).
    """
    x = profile.xi_grid.x
    l, r = profile.connection.left, profile.connection.right
    jump = r.n_bar - l.n_bar
    dsig = np.abs(profile.dn_s.values / jump)
    cutoff = cutoff_rel * float(np.max(dsig))
    sig = profile.sigma
    keep = (dsig >= cutoff) | (np.minimum(sig, 1.0 - sig) >= cutoff)
    if not np.any(keep):
        raise ShiftError("profile weight is identically negligible")
    return float(np.max(np.abs(x[keep]))) + profile.xi_grid.spacing


def _half_line_functional(profile, jump_fn, shift, support, spacing):
    """sigma-weighted half-line integrals of a periodic jump.

    Returns (value, derivative) of
        -int_{-inf}^0 jump * sigma(x-shift) dx
        +int_0^{inf}  jump * (1 - sigma(x-shift)) dx
    with d/dshift = int_R jump * sigma'(x-shift) dx.
    """
    lo = min(shift - support, 0.0)
    hi = max(shift + support, 0.0)
    n_lo = int(np.ceil(-lo / spacing))
    n_hi = int(np.ceil(hi / spacing))
    x_left = -spacing * np.arange(n_lo, -1, -1, dtype=float)
    x_right = spacing * np.arange(0, n_hi + 1, dtype=float)

    sig_l, dsig_l = profile.sigma_at(x_left - shift)
    sig_r, dsig_r = profile.sigma_at(x_right - shift)
    jump_l = jump_fn(x_left)
    jump_r = jump_fn(x_right)

    value = -np.trapz(jump_l * sig_l, dx=spacing) + np.trapz(
        jump_r * (1.0 - sig_r), dx=spacing
    )
    deriv = np.trapz(jump_l * dsig_l, dx=spacing) + np.trapz(
        jump_r * dsig_r, dx=spacing
    )
    return float(value), float(deriv)


def _solve_root(profile, jump_fn, ledger_total, state_jump, support, spacing,
                label, tol=1e-12, max_iter=30, bound=50.0):
    """Newton root of  X + (functional(X) + ledger)/state_jump = 0."""
    x = -ledger_total / state_jump
    for _ in range(max_iter):
        val, dval = _half_line_functional(profile, jump_fn, x, support, spacing)
        f = x + (val + ledger_total) / state_jump
        fprime = 1.0 + dval / state_jump
        if abs(fprime - 1.0) >= 1.0:
            raise ShiftError(
                "%s functional is not a contraction (|A'-1| = %.3f >= 1); "
                "perturbation too large for a unique shift" % (label, abs(fprime - 1.0))
            )
        step = -f / fprime
        x += step
        if abs(x) > bound:
            raise ShiftError("%s Newton diverged beyond |%g|" % (label, bound))
        if abs(step) <= tol * max(1.0, abs(x)):
            return x
    raise ShiftError("%s Newton did not converge in %d iterations" % (label, max_iter))


def _jump_realizer(spec_minus, spec_plus, component):
    def jump(x):
        minus = spec_minus.realize(x)[component]
        plus = spec_plus.realize(x)[component]
        return plus - minus
    return jump


def initial_shifts(ledger: MassLedger, spec_minus: PerturbationSpec,
                   spec_plus: PerturbationSpec, profile: ShockProfile,
                   tol=1e-12):
    """Solve the two scalar root problems fixing (X0, Y0).

    The density equation reads A1(X0) + ledger_n/[[n_bar]] = 0 with
    A1(X) = X + (sigma-weighted half-line integrals of [[rho0]])/[[n_bar]],
    and the momentum equation is the analogue with w0, Y and [[m_bar]] (the
    momentum weight is sigma at the Y-translate; the density weight appearing
    there in one printed display is treated as a typo).
    """
    conn = profile.connection
    jn = conn.right.n_bar - conn.left.n_bar
    jm = conn.right.m_bar - conn.left.m_bar
    support = weight_support(profile)
    spacing = min(spec_minus.period, spec_plus.period) / 1024.0

    x0 = _solve_root(
        profile, _jump_realizer(spec_minus, spec_plus, 0), ledger.n_total,
        jn, support, spacing, "X0", tol=tol,
    )
    y0 = _solve_root(
        profile, _jump_realizer(spec_minus, spec_plus, 1), ledger.m_total,
        jm, support, spacing, "Y0", tol=tol,
    )
    return x0, y0


def _check_pairing(hist_minus, hist_plus, profile):
    l, r = profile.connection.left, profile.connection.right
    if abs(hist_minus.base.n_bar - l.n_bar) > 1e-12 or abs(
        hist_minus.base.m_bar - l.m_bar
    ) > 1e-12:
        raise ValueError("minus-side history base does not match the left end state")
    if abs(hist_plus.base.n_bar - r.n_bar) > 1e-12 or abs(
        hist_plus.base.m_bar - r.m_bar
    ) > 1e-12:
        raise ValueError("plus-side history base does not match the right end state")
    hm = hist_minus.grid.spacing
    hp = hist_plus.grid.spacing
    if abs(hm - hp) > 1e-12 * hm:
        raise ValueError(
            "cell spacings %.3e and %.3e differ; the line quadrature needs a "
            "common sample spacing" % (hm, hp)
        )


def _cell_flux_arrays(snapshot, temperature, h):
    """The full momentum-flux bracket on one cell (unique samples)."""
    n = snapshot[0].values[:-1]
    m = snapshot[1].values[:-1]
    phi = snapshot[2].values[:-1]
    u = m / n
    dphi = diff1_periodic_arr(phi, h)
    return (
        m * u
        + (temperature + 1.0) * n
        - diff1_periodic_arr(u, h)
        - 0.5 * dphi * dphi
        - diff2_periodic_arr(phi, h)
    )


def shift_rhs(t, state: ShiftState, hist_minus: PeriodicHistory,
              hist_plus: PeriodicHistory, profile: ShockProfile,
              support=None):
    """(X', Y') of the shift ODE at time t.

    Periodic snapshot fields are extended to the line by exact index
    arithmetic (the quadrature grid is the shared cell grid), the weight
    sigma' comes from the profile's dense orbit at the shifted argument, and
    the integrals are truncated where the weight has decayed.
    """
    _check_pairing(hist_minus, hist_plus, profile)
    conn = profile.connection
    s = conn.speed
    jn = conn.right.n_bar - conn.left.n_bar
    jm = conn.right.m_bar - conn.left.m_bar
    if support is None:
        support = weight_support(profile)

    snap_m = hist_minus.at(t)
    snap_p = hist_plus.at(t)
    h = hist_minus.grid.spacing
    M_m = hist_minus.grid.n_points - 1
    M_p = hist_plus.grid.n_points - 1

    def window(center):
        j_lo = int(np.floor((center - support) / h))
        j_hi = int(np.ceil((center + support) / h))
        j = np.arange(j_lo, j_hi + 1)
        x = j * h
        return j, x

    def jump_of(values_minus, values_plus, j):
        return values_plus[j % M_p] - values_minus[j % M_m]

    n_m = snap_m[0].values[:-1]
    n_p = snap_p[0].values[:-1]
    m_m = snap_m[1].values[:-1]
    m_p = snap_p[1].values[:-1]

    # X equation: jumps of m and n against sigma'(x - st - X)
    cx = s * t + state.X
    j, x = window(cx)
    _, w = profile.sigma_at(x - cx)
    num_x = float(np.sum(jump_of(m_m, m_p, j) * w))
    den_x = float(np.sum(jump_of(n_m, n_p, j) * w))
    if abs(den_x * h) < 1e-3 * abs(jn):
        raise ShiftError(
            "X denominator %.3e below 1e-3 * |[[n_bar]]| at t=%g" % (den_x * h, t)
        )
    x_prime = -s + num_x / den_x

    # Y equation: jumps of the momentum flux and m against sigma'(x - st - Y)
    flux_m = _cell_flux_arrays(snap_m, conn.temperature, h)
    flux_p = _cell_flux_arrays(snap_p, conn.temperature, h)
    cy = s * t + state.Y
    j, x = window(cy)
    _, w = profile.sigma_at(x - cy)
    num_y = float(np.sum(jump_of(flux_m, flux_p, j) * w))
    den_y = float(np.sum(jump_of(m_m, m_p, j) * w))
    if abs(den_y * h) < 1e-3 * abs(jm):
        raise ShiftError(
            "Y denominator %.3e below 1e-3 * |[[m_bar]]| at t=%g" % (den_y * h, t)
        )
    y_prime = -s + num_y / den_y
    return x_prime, y_prime


@dataclass
class ShiftTrajectory:
    times: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Xprime: np.ndarray
    Yprime: np.ndarray

    def final(self) -> ShiftState:
        return ShiftState(float(self.times[-1]), float(self.X[-1]), float(self.Y[-1]))

    def states(self):
        return [
            ShiftState(float(t), float(x), float(y))
            for t, x, y in zip(self.times, self.X, self.Y)
        ]


def integrate_shifts(x0, y0, hist_minus, hist_plus, profile, t_end,
                     dt=0.02, conv_tol=1e-6):
    """Classical RK4 on the shift ODE; histories must hold snapshots at every
    stage time (multiples of dt/2).  Raises ShiftError when the terminal tail
    estimate |[X',Y'](T)| / (2 alpha) exceeds conv_tol (run too short)."""
    _check_pairing(hist_minus, hist_plus, profile)
    support = weight_support(profile)
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9:
        raise ValueError("t_end must be a multiple of dt")

    def f(t, xy):
        state = ShiftState(t, xy[0], xy[1])
        return np.array(shift_rhs(t, state, hist_minus, hist_plus, profile,
                                  support=support))

    times = np.empty(n_steps + 1)
    xs = np.empty(n_steps + 1)
    ys = np.empty(n_steps + 1)
    xps = np.empty(n_steps + 1)
    yps = np.empty(n_steps + 1)

    xy = np.array([x0, y0], dtype=float)
    t = 0.0
    for i in range(n_steps):
        k1 = f(t, xy)
        times[i], xs[i], ys[i] = t, xy[0], xy[1]
        xps[i], yps[i] = k1
        k2 = f(t + 0.5 * dt, xy + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, xy + 0.5 * dt * k2)
        k4 = f(t + dt, xy + dt * k3)
        xy = xy + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (i + 1) * dt
    klast = f(t, xy)
    times[-1], xs[-1], ys[-1] = t, xy[0], xy[1]
    xps[-1], yps[-1] = klast

    alphas = [h.fitted_alpha for h in (hist_minus, hist_plus) if h.fitted_alpha]
    alpha = min(alphas) if alphas else 0.25
    tail = float(np.hypot(*klast)) / (2.0 * alpha)
    if tail > conv_tol:
        raise ShiftError(
            "shift ODE not converged by t=%g: tail estimate %.3e > %.1e"
            % (t_end, tail, conv_tol)
        )
    return ShiftTrajectory(times, xs, ys, xps, yps)


def mean_cumulative(spec: PerturbationSpec):
    """Cell averages of the running integrals of (rho0, w0).

    For a mode amp*cos(kappa x + phase) the running integral from 0 is
    (amp/kappa)(sin(kappa x + phase) - sin(phase)); averaging over a full
    period kills the sine and leaves -(amp/kappa) sin(phase).
    """
    a_n = 0.0
    a_m = 0.0
    for k, amp_n, amp_m, phase_n, phase_m in spec.modes:
        kappa = 2.0 * np.pi * k / spec.period
        a_n -= amp_n * np.sin(phase_n) / kappa
        a_m -= amp_m * np.sin(phase_m) / kappa
    return a_n, a_m


def flux_average_jump(hist_minus, hist_plus, temperature):
    """Time series of the bracketed cell-average flux deviation.

    Per side and snapshot: cell average of m^2/n + (A+1)n - (d phi)^2/2
    minus its constant-state value; returned as (times, plus - minus).
    """
    if hist_minus.times.size != hist_plus.times.size or np.max(
        np.abs(hist_minus.times - hist_plus.times)
    ) > 1e-9:
        raise ValueError("histories must share snapshot times")

    def series(hist):
        nb, mb = hist.base.n_bar, hist.base.m_bar
        ref = mb * mb / nb + (temperature + 1.0) * nb
        h = hist.grid.spacing
        out = np.empty(hist.times.size)
        for i, (n, m, phi) in enumerate(hist.snapshots):
            nv = n.values[:-1]
            mv = m.values[:-1]
            dphi = diff1_periodic_arr(phi.values[:-1], h)
            avg = np.mean(mv * mv / nv + (temperature + 1.0) * nv - 0.5 * dphi * dphi)
            out[i] = avg - ref
        return out

    return hist_minus.times.copy(), series(hist_plus) - series(hist_minus)


def asymptotic_shifts(x0, y0, spec_minus, spec_plus, hist_minus, hist_plus,
                      profile, tail_tol=1e-10):
    """Closed-form limits X_inf, Y_inf and the zero-mass residual.

    (x0, y0) must be the roots returned by initial_shifts for this data; the
    residual reconstruction reads the ledger off the functional values there.
    X_inf needs only the initial data (the sigma-weighted functional at the
    root plus the cell-mean cumulative integrals); Y_inf adds the time
    integral of the flux-average jump, computed by trapezoid over the
    snapshot times with a Richardson error estimate and an exponential tail
    bound, both required below tail_tol.
    """
    conn = profile.connection
    s = conn.speed
    jn = conn.right.n_bar - conn.left.n_bar
    jm = conn.right.m_bar - conn.left.m_bar
    support = weight_support(profile)
    spacing = min(spec_minus.period, spec_plus.period) / 1024.0

    val_x, _ = _half_line_functional(
        profile, _jump_realizer(spec_minus, spec_plus, 0), x0, support, spacing
    )
    a1 = x0 + val_x / jn
    val_y, _ = _half_line_functional(
        profile, _jump_realizer(spec_minus, spec_plus, 1), y0, support, spacing
    )
    a2 = y0 + val_y / jm

    an_minus, am_minus = mean_cumulative(spec_minus)
    an_plus, am_plus = mean_cumulative(spec_plus)
    jump_a = an_plus - an_minus
    jump_b = am_plus - am_minus

    times, g = flux_average_jump(hist_minus, hist_plus, conn.temperature)
    t_integral = float(np.trapz(g, times))
    refine_err = abs(t_integral - float(np.trapz(g[::2], times[::2]))) / 3.0
    alphas = [h.fitted_alpha for h in (hist_minus, hist_plus) if h.fitted_alpha]
    alpha = min(alphas) if alphas else 0.25
    tail_bound = abs(float(g[-1])) / (2.0 * alpha)
    if abs(float(g[-1])) > tail_tol or tail_bound > 10.0 * tail_tol:
        raise ShiftError(
            "flux-average integrand not decayed: |g(T)|=%.3e, tail bound %.3e"
            % (abs(float(g[-1])), tail_bound)
        )
    if refine_err > 100.0 * tail_tol:
        raise ShiftError("time-integral refinement error %.3e too large" % refine_err)

    x_inf = a1 - jump_a / jn
    y_inf = a2 - jump_b / jm + t_integral / jm

    ledger_n = -a1 * jn  # A1(X0) = -ledger_n / jn at the root
    ledger_m = -a2 * jm
    residual = s * (ledger_n + jump_a) - (ledger_m + jump_b - t_integral)
    return AsymptoticShifts(
        X_inf=float(x_inf), Y_inf=float(y_inf), zero_mass_residual=float(residual)
    )


@dataclass(frozen=True)
class ShockInitialData:
    """Construction recipe for perturbed shock initial data.

    n0 = profile + rho0^- (1-sigma) + rho0^+ sigma + bump_n
    m0 = profile + w0^-  (1-sigma) + w0^+  sigma + bump_m
    with the unshifted profile/weight as the t=0 reference.
    """

    spec_minus: PerturbationSpec
    spec_plus: PerturbationSpec
    bump_n: LocalizedBump = LocalizedBump(0.0)
    bump_m: LocalizedBump = LocalizedBump(0.0)


def mass_ledger(data: ShockInitialData, profile: ShockProfile) -> MassLedger:
    """Half-line ledger integrals of the constructed initial data.

    By construction n0 - profile - rho0^- = [[rho0]] sigma + bump_n on the
    left half-line and -[[rho0]](1-sigma) + bump_n on the right, so the
    integrals reduce to sigma-weighted quadratures plus exact bump masses.
    """
    support = weight_support(profile)
    spacing = min(data.spec_minus.period, data.spec_plus.period) / 1024.0
    for bump in (data.bump_n, data.bump_m):
        if abs(bump.center) + 0.5 * bump.width > support:
            raise ValueError("localized bump extends beyond the quadrature window")

    n_pts = int(np.ceil(support / spacing))
    x_left = -spacing * np.arange(n_pts, -1, -1, dtype=float)
    x_right = spacing * np.arange(0, n_pts + 1, dtype=float)
    sig_l, _ = profile.sigma_at(x_left)
    sig_r, _ = profile.sigma_at(x_right)

    out = []
    for component, bump in ((0, data.bump_n), (1, data.bump_m)):
        jump = _jump_realizer(data.spec_minus, data.spec_plus, component)
        left = np.trapz(jump(x_left) * sig_l, dx=spacing) + bump.mass_left_of(0.0)
        right = np.trapz(-jump(x_right) * (1.0 - sig_r), dx=spacing) + (
            bump.mass - bump.mass_left_of(0.0)
        )
        out.extend([float(left), float(right)])
    return MassLedger(
        int_n_left=out[0], int_n_right=out[1],
        int_m_left=out[2], int_m_right=out[3],
    )


def enforce_zero_mass(data: ShockInitialData, profile: ShockProfile,
                      hist_minus: PeriodicHistory, hist_plus: PeriodicHistory,
                      max_amplitude=0.1):
    """Add the momentum bump that zeroes the coinciding-shift condition.

    Returns (corrected data, (X0, Y0), AsymptoticShifts).  The condition is
    linear in the m0 mass: adding mass mu shifts the residual by exactly -mu,
    so one evaluation fixes the bump.  Rejected when the needed amplitude
    exceeds max_amplitude (smallness would be violated).
    """
    ledger = mass_ledger(data, profile)
    x0, y0 = initial_shifts(ledger, data.spec_minus, data.spec_plus, profile)
    draft = asymptotic_shifts(
        x0, y0, data.spec_minus, data.spec_plus, hist_minus, hist_plus, profile
    )
    needed_mass = draft.zero_mass_residual
    amplitude = data.bump_m.amplitude + 2.0 * needed_mass / data.bump_m.width
    if abs(amplitude) > max_amplitude:
        raise ShiftError(
            "zero-mass bump amplitude %.3e exceeds the smallness cap %g"
            % (amplitude, max_amplitude)
        )
    corrected = replace(data, bump_m=replace(data.bump_m, amplitude=amplitude))

    ledger2 = mass_ledger(corrected, profile)
    x0c, y0c = initial_shifts(ledger2, corrected.spec_minus, corrected.spec_plus, profile)
    final = asymptotic_shifts(
        x0c, y0c, corrected.spec_minus, corrected.spec_plus,
        hist_minus, hist_plus, profile,
    )
    if abs(final.zero_mass_residual) > 1e-10:
        raise ShiftError(
            "zero-mass residual %.3e after correction" % final.zero_mass_residual
        )
    if abs(final.X_inf - final.Y_inf) > 1e-6:
        raise ShiftError(
            "asymptotic shifts disagree after correction: |X-Y|=%.3e"
            % abs(final.X_inf - final.Y_inf)
        )
    return corrected, (x0c, y0c), final
