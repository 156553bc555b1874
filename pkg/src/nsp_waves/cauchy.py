"""Truncated-line Cauchy runs with ansatz far fields.

The initial-value problem lives on all of x; we run it on [-L, L] with
time-dependent Dirichlet data taken from the composite ansatz at the two
endpoints, which is the correct far-field oscillation by construction.  L is
validated against a boundary-influence horizon: the fastest characteristic
plus a diffusive pad must not reach within 20% of L of the diagnostic window
by the end time.  Doubling L is the falsification test for the truncation
(diagnostics must move by less than 1e-6).

Diagnostics realize the two stability statements at desk scale: distance to
the asymptotically shifted profile (shock) or to the self-similar fan
(rarefaction), perturbation norms against the ansatz, and the anti-derivative
norms the energy argument actually controls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import build_rarefaction_ansatz, build_shock_ansatz, profile_at_shift
from .fitting import golden_section_min
from .grid import (
    Grid1D,
    SpatialField,
    cumulative_integral,
    diff2_line_arr,
    integrate,
    lp_norm,
    sobolev_norm,
)
from .periodic import PeriodicHistory
from .poisson import pb_newton_arr
from .profile import ShockProfile
from .riemann import rarefaction_exact, sound_speed
from .scheme import advance_to
from .shifts import AsymptoticShifts, ShockInitialData


class CauchyError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Resolution, horizon, and output plan of one truncated-line run."""

    L: float
    n_points: int
    t_end: float
    output_times: tuple
    scenario: str = "shock"
    boundary_mode: str = "ansatz_dirichlet"
    cfl_hyperbolic: float = 0.4
    cfl_parabolic: float = 0.25
    diagnostic_halfwidth: float = 25.0
    poisson_tol: float = 1e-10
    epsilon0: float = 0.1
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not (self.L > 0.0 and np.isfinite(self.L)):
            raise ValueError("L must be a positive finite half-width")
        if self.n_points < 16:
            raise ValueError("n_points=%d too small" % self.n_points)
        if self.scenario not in ("shock", "rarefaction"):
            raise ValueError("unknown scenario %r" % (self.scenario,))
        if self.boundary_mode != "ansatz_dirichlet":
            raise ValueError("unknown boundary_mode %r" % (self.boundary_mode,))
        if not 0.0 < self.cfl_hyperbolic <= 1.0:
            raise ValueError("cfl_hyperbolic out of (0, 1]")
        if not 0.0 < self.cfl_parabolic <= 0.5:
            raise ValueError("cfl_parabolic out of (0, 0.5]")
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        ts = np.asarray(self.output_times, dtype=float)
        if ts.size == 0 or np.any(np.diff(ts) <= 0.0):
            raise ValueError("output_times must be nonempty and increasing")
        if ts[0] < 0.0 or ts[-1] > self.t_end + 1e-9:
            raise ValueError("output_times must lie in [0, t_end]")
        if self.diagnostic_halfwidth <= 0.0:
            raise ValueError("diagnostic_halfwidth must be positive")
        if not 0.0 < self.poisson_tol <= 1e-6:
            raise ValueError("poisson_tol out of (0, 1e-6]")
        if self.epsilon0 <= 0.0:
            raise ValueError("epsilon0 must be positive")

    @property
    def grid(self) -> Grid1D:
        return Grid1D(-self.L, self.L, self.n_points)


@dataclass(frozen=True)
class CauchyState:
    """One snapshot of the truncated-line solution."""

    t: float
    grid: Grid1D
    n: SpatialField
    m: SpatialField
    phi: SpatialField

    def __post_init__(self):
        if np.min(self.n.values) <= 0.0:
            raise CauchyError("state at t=%g has nonpositive density" % self.t)

    @property
    def u(self) -> SpatialField:
        return SpatialField(self.grid, self.m.values / self.n.values)


@dataclass(frozen=True)
class ShockScenario:
    """Everything a shock run needs besides the solver config.

    The histories must be the evolutions of data.spec_minus/spec_plus; the
    shift pair (x0, y0) and asym come from the zero-mass enforcement chain.
    """

    profile: ShockProfile
    hist_minus: PeriodicHistory
    hist_plus: PeriodicHistory
    data: ShockInitialData
    x0: float = 0.0
    y0: float = 0.0
    asym: AsymptoticShifts | None = None

    @property
    def nu(self) -> float:
        return max(self.hist_minus.nu, self.hist_plus.nu,
                   abs(self.data.bump_n.amplitude),
                   abs(self.data.bump_m.amplitude))

    @property
    def x_inf(self) -> float:
        return self.asym.X_inf if self.asym is not None else 0.0


@dataclass(frozen=True)
class RarefactionScenario:
    smooth: object
    hist_minus: PeriodicHistory
    hist_plus: PeriodicHistory

    @property
    def nu(self) -> float:
        return max(self.hist_minus.nu, self.hist_plus.nu)


@dataclass
class DiagnosticsSeries:
    """Per-output-time records of one run, ready for delimited emission."""

    times: np.ndarray
    dist_linf: np.ndarray
    shift_obs: np.ndarray
    h1_pert_norm: np.ndarray
    phi_l2: np.ndarray
    anti_phi: np.ndarray
    anti_psi: np.ndarray
    mass_total: np.ndarray
    momentum_total: np.ndarray
    monitor_constant: float = 0.0

    COLUMNS = ("t", "dist_linf", "shift_obs", "h1_pert_norm", "phi_l2",
               "anti_phi", "anti_psi", "mass_total", "momentum_total")

    def rows(self):
        return np.column_stack([
            self.times, self.dist_linf, self.shift_obs, self.h1_pert_norm,
            self.phi_l2, self.anti_phi, self.anti_psi, self.mass_total,
            self.momentum_total,
        ])


def _temperature_of(scenario) -> float:
    if isinstance(scenario, ShockScenario):
        return scenario.profile.connection.temperature
    return scenario.smooth.endpoints.temperature


def _end_states(scenario):
    if isinstance(scenario, ShockScenario):
        conn = scenario.profile.connection
        return conn.left, conn.right
    ep = scenario.smooth.endpoints
    return ep.left, ep.right


def _check_horizon(config: SolverConfig, scenario) -> None:
    """Boundary-influence horizon must stay 0.2 L away from the diagnostics."""
    l, r = _end_states(scenario)
    c = sound_speed(_temperature_of(scenario))
    lam = c + max(abs(l.u_bar), abs(r.u_bar))
    horizon = lam * config.t_end + 2.0 * np.sqrt(config.t_end)
    w = config.diagnostic_halfwidth
    if isinstance(scenario, ShockScenario):
        s = scenario.profile.connection.speed
        w_min = min(0.0, s * config.t_end) + scenario.x_inf - w
        w_max = max(0.0, s * config.t_end) + scenario.x_inf + w
    else:
        w_min, w_max = -w, w
    margin = 0.2 * config.L
    lo = -config.L + horizon
    hi = config.L - horizon
    if w_min - lo < margin or hi - w_max < margin:
        raise CauchyError(
            "horizon rule violated: influence reaches [%.1f, %.1f], window "
            "[%.1f, %.1f], need %.1f clearance (L=%.1f, t_end=%g)"
            % (lo, hi, w_min, w_max, margin, config.L, config.t_end)
        )


def _check_spacing(grid: Grid1D, hist: PeriodicHistory) -> None:
    h = hist.grid.spacing
    if abs(grid.spacing - h) > 1e-12 * h:
        raise CauchyError(
            "line spacing %.12g must equal the cell spacing %.12g; pick "
            "n_points = 2*round(L/h)+1 with L a multiple of h"
            % (grid.spacing, h)
        )


def _solve_phi(nv, h, guess, tol):
    phi_l = -np.log(nv[0])
    phi_r = -np.log(nv[-1])
    pv, _, res = pb_newton_arr(nv, h, False, guess, phi_l=phi_l, phi_r=phi_r,
                               tol=tol)
    return pv, res


def poisson_residual(state: CauchyState) -> float:
    """Sup norm of the discrete potential equation on interior points."""
    h = state.grid.spacing
    r = diff2_line_arr(state.phi.values, h) - state.n.values \
        + np.exp(-state.phi.values)
    return float(np.max(np.abs(r[1:-1])))


def init_state(config: SolverConfig, scenario) -> CauchyState:
    """Initial data on the line grid; potential from the constrained solve.

    Shock: composite ansatz at t=0 plus the localized bumps carried by the
    scenario data; rejects smallness violations (nu, bump amplitudes, or the
    initial anti-derivative size above epsilon0).  Rarefaction: composite
    ansatz at t=0.
    """
    grid = config.grid
    _check_spacing(grid, scenario.hist_minus)
    _check_spacing(grid, scenario.hist_plus)
    _check_horizon(config, scenario)
    if scenario.nu > config.epsilon0:
        raise CauchyError(
            "perturbation size %.3g exceeds epsilon0=%.3g"
            % (scenario.nu, config.epsilon0)
        )

    if isinstance(scenario, ShockScenario):
        if config.scenario != "shock":
            raise CauchyError("config.scenario=%r but scenario data is shock"
                              % (config.scenario,))
        a = build_shock_ansatz(0.0, scenario.profile, scenario.hist_minus,
                               scenario.hist_plus, 0.0, 0.0, grid)
        n0 = a.n_sharp.values + scenario.data.bump_n(grid.x)
        m0 = a.m_sharp.values + scenario.data.bump_m(grid.x)
        ref = build_shock_ansatz(0.0, scenario.profile, scenario.hist_minus,
                                 scenario.hist_plus, scenario.x0, scenario.y0,
                                 grid)
        tilde_n = SpatialField(grid, n0 - ref.n_sharp.values)
        tilde_m = SpatialField(grid, m0 - ref.m_sharp.values)
    else:
        if config.scenario != "rarefaction":
            raise CauchyError(
                "config.scenario=%r but scenario data is rarefaction"
                % (config.scenario,))
        a = build_rarefaction_ansatz(0.0, scenario.smooth, scenario.hist_minus,
                                     scenario.hist_plus, grid)
        n0 = a.n_sharp.values.copy()
        m0 = a.m_sharp.values.copy()
        tilde_n = SpatialField(grid, np.zeros(grid.n_points))
        tilde_m = tilde_n

    size0 = float(np.hypot(sobolev_norm(cumulative_integral(tilde_n), 2),
                           sobolev_norm(cumulative_integral(tilde_m), 2)))
    if size0 > config.epsilon0:
        raise CauchyError(
            "initial anti-derivative size %.3g exceeds epsilon0=%.3g"
            % (size0, config.epsilon0)
        )

    if np.min(n0) <= 0.0:
        raise CauchyError("initial density nonpositive")
    phi0, _ = _solve_phi(n0, grid.spacing, -np.log(n0), config.poisson_tol)
    return CauchyState(
        t=0.0, grid=grid,
        n=SpatialField(grid, n0),
        m=SpatialField(grid, m0),
        phi=SpatialField(grid, phi0),
    )


class _ShockBoundary:
    """Time-interpolated ansatz values at the two endpoints.

    Evaluated once per history snapshot (the endpoint cell indices are
    fixed), then linearly interpolated in time for the stepper.  Shifts are
    held at zero: the weight tails make the boundary values insensitive to
    them at far below the truncation error.
    """

    def __init__(self, profile, hist_minus, hist_plus, L):
        if hist_minus.times.size != hist_plus.times.size or \
                np.max(np.abs(hist_minus.times - hist_plus.times)) > 1e-9:
            raise CauchyError("histories must share their output times")
        self.times = hist_minus.times
        conn = profile.connection
        l, r = conn.left, conn.right
        s = conn.speed

        h = hist_minus.grid.spacing
        m_cells = hist_minus.grid.n_points - 1
        cols = {}
        for tag, x_b in (("l", -L), ("r", L)):
            i = int(round(x_b / h)) % m_cells
            for side, hist in (("m", hist_minus), ("p", hist_plus)):
                arr = np.array(
                    [[sn[0].values[i], sn[1].values[i]] for sn in hist.snapshots]
                )
                cols[tag + side] = arr
        prof_l = profile_at_shift(profile, -L - s * self.times, 0.0)
        prof_r = profile_at_shift(profile, L - s * self.times, 0.0)
        jn = r.n_bar - l.n_bar
        jm = r.m_bar - l.m_bar
        vals = {}
        for tag, pf in (("l", prof_l), ("r", prof_r)):
            sig = (pf["n"] - l.n_bar) / jn
            sig_m = (pf["m"] - l.m_bar) / jm
            nm_ = cols[tag + "m"]
            np_ = cols[tag + "p"]
            vals[tag + "n"] = nm_[:, 0] * (1.0 - sig) + np_[:, 0] * sig
            vals[tag + "m"] = nm_[:, 1] * (1.0 - sig_m) + np_[:, 1] * sig_m
        self._table = np.column_stack(
            [vals["ln"], vals["lm"], vals["rn"], vals["rm"]]
        )

    def __call__(self, t):
        ts = self.times
        if t <= ts[0]:
            row = self._table[0]
        elif t >= ts[-1]:
            row = self._table[-1]
        else:
            j = int(np.searchsorted(ts, t)) - 1
            w = (t - ts[j]) / (ts[j + 1] - ts[j])
            row = (1.0 - w) * self._table[j] + w * self._table[j + 1]
        return row[0], row[1], row[2], row[3]


class _RarefactionBoundary:
    """Same contract as _ShockBoundary for the smoothed-fan scenario."""

    def __init__(self, smooth, hist_minus, hist_plus, L):
        if hist_minus.times.size != hist_plus.times.size or \
                np.max(np.abs(hist_minus.times - hist_plus.times)) > 1e-9:
            raise CauchyError("histories must share their output times")
        self.times = hist_minus.times
        ep = smooth.endpoints
        l, r = ep.left, ep.right
        jn = r.n_bar - l.n_bar
        ju = r.u_bar - l.u_bar

        h = hist_minus.grid.spacing
        m_cells = hist_minus.grid.n_points - 1
        rows = []
        for k, t in enumerate(self.times):
            row = []
            for x_b in (-L, L):
                i = int(round(x_b / h)) % m_cells
                f = smooth.fields(np.array([x_b]), float(t))
                sig = (f["n"][0] - l.n_bar) / jn
                eta = (f["u"][0] - l.u_bar) / ju
                sm, sp = hist_minus.snapshots[k], hist_plus.snapshots[k]
                rho = sm[0].values[i] - l.n_bar
                rho_p = sp[0].values[i] - r.n_bar
                um = sm[1].values[i] / sm[0].values[i] - l.u_bar
                up = sp[1].values[i] / sp[0].values[i] - r.u_bar
                n_b = f["n"][0] + rho * (1.0 - sig) + rho_p * sig
                u_b = f["u"][0] + um * (1.0 - eta) + up * eta
                row.extend([n_b, n_b * u_b])
            rows.append(row)
        self._table = np.asarray(rows)

    __call__ = _ShockBoundary.__call__


def make_boundary(config: SolverConfig, scenario):
    if isinstance(scenario, ShockScenario):
        return _ShockBoundary(scenario.profile, scenario.hist_minus,
                              scenario.hist_plus, config.L)
    return _RarefactionBoundary(scenario.smooth, scenario.hist_minus,
                                scenario.hist_plus, config.L)


def observed_shift(profile: ShockProfile, n: SpatialField, center, halfwidth,
                   resolution) -> float:
    """Least-squares translate of the profile density against computed n.

    Golden-section over the translate parameter within +-2 of the expected
    center, refined to the requested resolution; returns the minimizing
    absolute translate (lab frame).
    """
    grid = n.grid
    mask = np.abs(grid.x - center) <= halfwidth
    x_w = grid.x[mask]
    n_w = n.values[mask]

    def misfit(a):
        ref = profile.eval_at(x_w - a)["n"]
        d = n_w - ref
        return float(np.dot(d, d))

    return golden_section_min(misfit, center - 2.0, center + 2.0,
                              tol=resolution)


def _shock_diagnostics(state, scenario, config):
    conn = scenario.profile.connection
    s = conn.speed
    center = s * state.t + scenario.x_inf
    grid = state.grid
    mask = np.abs(grid.x - center) <= config.diagnostic_halfwidth
    ref = scenario.profile.eval_at(grid.x[mask] - center)
    dist = max(
        float(np.max(np.abs(state.n.values[mask] - ref["n"]))),
        float(np.max(np.abs(state.m.values[mask] - ref["m"]))),
        float(np.max(np.abs(state.phi.values[mask] - ref["phi"]))),
    )
    shift = observed_shift(scenario.profile, state.n, center,
                           config.diagnostic_halfwidth,
                           grid.spacing / 10.0) - s * state.t
    a = build_shock_ansatz(state.t, scenario.profile, scenario.hist_minus,
                           scenario.hist_plus, 0.0, 0.0, grid)
    return dist, shift, a


def _rarefaction_diagnostics(state, scenario, config):
    ep = scenario.smooth.endpoints
    grid = state.grid
    mask = np.abs(grid.x) <= config.diagnostic_halfwidth
    xi = grid.x[mask] / max(state.t, 1e-12)
    n_f, u_f, _ = rarefaction_exact(ep.left, ep.right, ep.temperature, xi)
    u = state.m.values[mask] / state.n.values[mask]
    dist = max(
        float(np.max(np.abs(state.n.values[mask] - n_f))),
        float(np.max(np.abs(u - u_f))),
    )
    a = build_rarefaction_ansatz(state.t, scenario.smooth, scenario.hist_minus,
                                 scenario.hist_plus, grid)
    return dist, 0.0, a


def run(config: SolverConfig, scenario):
    """March to t_end and collect diagnostics at the output times.

    Returns (DiagnosticsSeries, final CauchyState, snapshots) where
    snapshots maps each requested snapshot time to its CauchyState.  Raises
    CauchyError when the stored potential violates its residual bound, or
    when the anti-derivative monitor exceeds its a priori constant (an
    instability signal at these scales).
    """
    state = init_state(config, scenario)
    boundary = make_boundary(config, scenario)
    if boundary.times[-1] < config.t_end - 1e-9:
        raise CauchyError(
            "histories end at t=%g, before t_end=%g"
            % (boundary.times[-1], config.t_end)
        )
    temperature = _temperature_of(scenario)
    grid = state.grid
    h = grid.spacing

    times = np.asarray(config.output_times, dtype=float)
    cols = {key: np.empty(times.size) for key in DiagnosticsSeries.COLUMNS[1:]}
    snapshots = {}
    size_ref = None
    monitor_c = 0.0

    nv = state.n.values.copy()
    mv = state.m.values.copy()
    pv = state.phi.values.copy()
    t = 0.0
    for k, t_out in enumerate(times):
        if t_out > t:
            nv, mv, pv = advance_to(
                nv, mv, pv, t, t_out, h, temperature, periodic=False,
                boundary=boundary, cfl_hyperbolic=config.cfl_hyperbolic,
                cfl_parabolic=config.cfl_parabolic,
                poisson_tol=config.poisson_tol,
            )
            t = t_out
        state = CauchyState(
            t=t, grid=grid,
            n=SpatialField(grid, nv.copy()),
            m=SpatialField(grid, mv.copy()),
            phi=SpatialField(grid, pv.copy()),
        )
        res = poisson_residual(state)
        if res > 1e-8:
            raise CauchyError(
                "potential residual %.3e exceeds 1e-8 at t=%g" % (res, t)
            )

        if isinstance(scenario, ShockScenario):
            dist, shift, a = _shock_diagnostics(state, scenario, config)
        else:
            dist, shift, a = _rarefaction_diagnostics(state, scenario, config)
        tilde_n = SpatialField(grid, nv - a.n_sharp.values)
        tilde_m = SpatialField(grid, mv - a.m_sharp.values)
        tilde_p = SpatialField(grid, pv - a.phi_sharp.values)
        phi_big = cumulative_integral(tilde_n)
        psi_big = cumulative_integral(tilde_m)

        cols["dist_linf"][k] = dist
        cols["shift_obs"][k] = shift
        cols["h1_pert_norm"][k] = np.hypot(sobolev_norm(tilde_n, 1),
                                           sobolev_norm(tilde_m, 1))
        cols["phi_l2"][k] = lp_norm(tilde_p, 2)
        cols["anti_phi"][k] = lp_norm(phi_big, 2)
        cols["anti_psi"][k] = lp_norm(psi_big, 2)
        cols["mass_total"][k] = integrate(state.n)
        cols["momentum_total"][k] = integrate(state.m)

        size = np.hypot(cols["anti_phi"][k], cols["anti_psi"][k])
        if size_ref is None:
            size_ref = size + scenario.nu
        # below this the run sits at the discretization floor and the a
        # priori bound has no content to enforce
        if size_ref >= 1e-6:
            monitor_c = max(monitor_c, size / size_ref)
        # The a priori bound constrains the shock scenario only: the smooth
        # fan background is not an exact solution, so its tilde momentum
        # absorbs the O(strength * smoothing^2) viscous residual of the
        # background and (Phi, Psi) legitimately exceed any multiple of nu.
        # For the fan run the monitor column is reported, not asserted.
        if monitor_c > 100.0 and isinstance(scenario, ShockScenario):
            raise CauchyError(
                "anti-derivative monitor %.1f exceeds 100 at t=%g "
                "(initial scale %.3e)" % (monitor_c, t, size_ref)
            )

        for t_snap in config.snapshot_times:
            if abs(t_snap - t) <= 1e-9 * max(1.0, abs(t)):
                snapshots[float(t_snap)] = state

    series = DiagnosticsSeries(
        times=times.copy(),
        dist_linf=cols["dist_linf"],
        shift_obs=cols["shift_obs"],
        h1_pert_norm=cols["h1_pert_norm"],
        phi_l2=cols["phi_l2"],
        anti_phi=cols["anti_phi"],
        anti_psi=cols["anti_psi"],
        mass_total=cols["mass_total"],
        momentum_total=cols["momentum_total"],
        monitor_constant=float(monitor_c),
    )
    return series, state, snapshots
