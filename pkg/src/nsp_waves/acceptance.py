"""Desk-scale verification campaigns behind `verify-all` and the test gate.

Each criterion function measures one stability statement end to end and
returns a CriterionResult with the raw numbers it used, so both the CLI and
the test suite print the same evidence.  The heavy shared inputs (profile,
periodic cell histories) live in an AcceptanceContext and are built lazily
exactly once.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .ansatz import (
    SmoothRarefaction,
    burgers_smooth,
    derivative_norm_envelope,
    fan_sup_distance,
    lemma_error_checks,
    residual_series,
)
from .cauchy import RarefactionScenario, ShockScenario, SolverConfig, run
from .config import solve_fan_density
from .fitting import FitError, log_linear_fit
from .grid import Grid1D
from .periodic import (
    constant_history,
    eigenmode_spec,
    evolve_periodic,
    fit_alpha,
    spec_with_nu,
    zero_perturbation,
)
from .poisson import pb_newton_arr
from .profile import (
    compute_profile,
    fit_profile_decay,
    unintegrated_residuals,
)
from .riemann import EndState, hugoniot_connect, rarefaction_connect, rh_residuals, sound_speed
from .shifts import (
    LocalizedBump,
    ShiftState,
    ShockInitialData,
    asymptotic_shifts,
    enforce_zero_mass,
    initial_shifts,
    integrate_shifts,
    mass_ledger,
    shift_rhs,
)
from .tridiag import TridiagonalSystem, solve_tridiagonal

TEMPERATURE = 1.0
N_LEFT, U_LEFT, N_RIGHT = 1.1, 0.0, 1.0
NU = 1e-3
PERIOD = 2.0 * math.pi
CELLS_PER_PERIOD = 64
HALF_CELLS = 1920  # line halfwidth 1920 * (2 pi / 64), 3841 points


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    details: dict
    seconds: float

    def line(self) -> str:
        keys = sorted(self.details)
        parts = []
        for k in keys:
            v = self.details[k]
            if isinstance(v, bool):
                parts.append("%s=%s" % (k, "yes" if v else "no"))
            elif isinstance(v, float):
                parts.append("%s=%.4g" % (k, v))
            else:
                parts.append("%s=%s" % (k, v))
        return "criterion %d %-26s %s  [%.1fs]  %s" % (
            self.index, self.name, "PASS" if self.passed else "FAIL",
            self.seconds, " ".join(parts))


class AcceptanceContext:
    """Lazy one-shot cache of the expensive shared inputs."""

    def __init__(self):
        self._cache = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def connection(self):
        return self._get("conn", lambda: hugoniot_connect(
            EndState(N_LEFT, U_LEFT), N_RIGHT, TEMPERATURE))

    @property
    def profile(self):
        return self._get("profile", lambda: compute_profile(self.connection))

    @property
    def specs(self):
        def build():
            conn = self.connection
            sm = spec_with_nu(
                eigenmode_spec(conn.left, PERIOD, 1, NU, TEMPERATURE, phase=0.7),
                NU, n_points_per_period=CELLS_PER_PERIOD)
            sp = spec_with_nu(
                eigenmode_spec(conn.right, PERIOD, 1, NU, TEMPERATURE, phase=-0.3),
                NU, n_points_per_period=CELLS_PER_PERIOD)
            return sm, sp
        return self._get("specs", build)

    @property
    def histories(self):
        """Dense cell histories: 0.005 output grid to t=40.005 plus the
        half-delta sample used by the residual time-difference check."""
        def build():
            sm, sp = self.specs
            conn = self.connection
            t_end = 40.005
            times = np.round(np.arange(0, int(round(t_end / 0.005)) + 1) * 0.005, 10)
            # the residual time-difference check halves delta around times[0]
            times = np.unique(np.concatenate([times, [0.9975, 1.0025]]))
            hm = evolve_periodic(conn.left, sm, TEMPERATURE, t_end,
                                 output_times=times,
                                 n_points_per_period=CELLS_PER_PERIOD)
            hp = evolve_periodic(conn.right, sp, TEMPERATURE, t_end,
                                 output_times=times,
                                 n_points_per_period=CELLS_PER_PERIOD)
            return hm, hp
        return self._get("histories", build)

    @property
    def line_grid(self) -> Grid1D:
        h = PERIOD / CELLS_PER_PERIOD
        return Grid1D(-HALF_CELLS * h, HALF_CELLS * h, 2 * HALF_CELLS + 1)

    def alpha_hat(self) -> float:
        hm, hp = self.histories
        return min(hm.fitted_alpha, hp.fitted_alpha)


def _timed(index, name, worker) -> CriterionResult:
    t0 = time.time()
    passed, details = worker()
    return CriterionResult(index, name, bool(passed), details, time.time() - t0)


def criterion_profile(ctx: AcceptanceContext) -> CriterionResult:
    """Traveling-wave correctness: convergence order, flux identity, shape."""
    def worker():
        prof = ctx.profile
        conn = ctx.connection
        res = unintegrated_residuals(prof)
        n_fine = 2 * prof.xi_grid.n_points - 1
        halfwidth = 0.5 * (prof.xi_grid.x_max - prof.xi_grid.x_min)
        fine = compute_profile(conn, xi_halfwidth=halfwidth, n_points=n_fine)
        res_f = unintegrated_residuals(fine)
        ratio_mom = res["momentum_sup"] / res_f["momentum_sup"]
        ratio_poi = res["poisson_sup"] / res_f["poisson_sup"]
        order_ok = 2.8 <= ratio_mom <= 5.5 and 2.8 <= ratio_poi <= 5.5

        j = conn.mass_flux
        flux_dev = float(np.max(np.abs(
            prof.n_s.values * (prof.u_s.values - conn.speed) - j))) / abs(j)
        flux_ok = flux_dev <= 1e-6

        sigma = prof.sigma
        mono_ok = bool(np.all(np.diff(sigma) > 0.0))
        i0 = prof.xi_grid.index_of(0.0)
        center_dev = abs(float(sigma[i0]) - 0.5)
        center_ok = center_dev <= 1e-9

        decay = fit_profile_decay(prof)
        r2 = min(decay["r2_left"], decay["r2_right"])
        tails_ok = r2 >= 0.999

        return order_ok and flux_ok and mono_ok and center_ok and tails_ok, {
            "ratio_momentum": ratio_mom, "ratio_poisson": ratio_poi,
            "flux_rel_dev": flux_dev, "sigma_monotone": mono_ok,
            "sigma_center_dev": center_dev, "tail_r2": r2,
        }
    return _timed(1, "profile-correctness", worker)


def criterion_periodic(ctx: AcceptanceContext) -> CriterionResult:
    """Cell decay at the amplitude-independent rate with conserved means."""
    def worker():
        base = EndState(1.0, 0.0)
        times = np.round(np.arange(0, 801) * 0.05, 10)
        runs = {}
        for nu in (1e-3, 1e-4):
            spec = spec_with_nu(
                eigenmode_spec(base, PERIOD, 1, nu, TEMPERATURE, phase=0.25),
                nu, n_points_per_period=128)
            runs[nu] = evolve_periodic(base, spec, TEMPERATURE, 40.0,
                                       output_times=times,
                                       n_points_per_period=128)
        hist = runs[1e-3]
        drift = 0.0
        base_means = [float(np.mean(f.values[:-1])) for f in hist.snapshots[0][:2]]
        for snap in hist.snapshots:
            for f, m0 in zip(snap[:2], base_means):
                drift = max(drift, abs(float(np.mean(f.values[:-1])) - m0))
        means_ok = drift <= 1e-12

        fits = {nu: fit_alpha(runs[nu]) for nu in runs}
        f3 = fits[1e-3]
        envelope_ok = f3.envelope_c <= 10.0 and f3.r_squared >= 0.99
        rel = abs(fits[1e-3].alpha / fits[1e-4].alpha - 1.0)
        amp_ok = rel <= 0.10

        return means_ok and envelope_ok and amp_ok, {
            "mean_drift": drift, "alpha_1e3": f3.alpha,
            "alpha_1e4": fits[1e-4].alpha, "alpha_rel_spread": rel,
            "envelope_c": f3.envelope_c, "fit_r2": f3.r_squared,
        }
    return _timed(2, "periodic-decay", worker)


def criterion_shifts(ctx: AcceptanceContext) -> CriterionResult:
    """RK4 trajectory versus the closed-form limits, plus the RH identity."""
    def worker():
        prof = ctx.profile
        sm, sp = ctx.specs
        hm, hp = ctx.histories
        draft = ShockInitialData(spec_minus=sm, spec_plus=sp,
                                 bump_n=LocalizedBump(0.02, 0.0, 4.0))
        ledger = mass_ledger(draft, prof)
        x0, y0 = initial_shifts(ledger, sm, sp, prof)
        t_end = 16.0
        traj = integrate_shifts(x0, y0, hm, hp, prof, t_end, dt=0.02)
        asym = asymptotic_shifts(x0, y0, sm, sp, hm, hp, prof)
        alpha = ctx.alpha_hat()
        precond = NU * math.exp(-2.0 * alpha * t_end)
        tol = 1e-3 * max(1.0, abs(asym.X_inf))
        dx = abs(traj.X[-1] - asym.X_inf)
        dy = abs(traj.Y[-1] - asym.Y_inf)
        ode_ok = precond < 1e-6 and dx <= tol and dy <= tol

        zm = constant_history(hm)
        zp = constant_history(hp)
        rh_dev = 0.0
        for t, x, y in ((0.0, 0.0, 0.0), (1.0, 0.3, -0.2), (5.0, -1.0, 2.0)):
            xp, yp = shift_rhs(t, ShiftState(t, x, y), zm, zp, prof)
            rh_dev = max(rh_dev, abs(xp), abs(yp))
        rh_ok = rh_dev <= 1e-12

        return ode_ok and rh_ok, {
            "x_inf": asym.X_inf, "dx_terminal": dx, "dy_terminal": dy,
            "tolerance": tol, "tail_precondition": precond,
            "zero_pert_rhs": rh_dev,
        }
    return _timed(3, "shift-consistency", worker)


def criterion_zero_mass(ctx: AcceptanceContext) -> CriterionResult:
    def worker():
        prof = ctx.profile
        sm, sp = ctx.specs
        hm, hp = ctx.histories
        draft = ShockInitialData(spec_minus=sm, spec_plus=sp,
                                 bump_n=LocalizedBump(0.02, 0.0, 4.0))
        _, _, asym = enforce_zero_mass(draft, prof, hm, hp)
        resid = abs(asym.zero_mass_residual)
        gap = abs(asym.X_inf - asym.Y_inf)
        return resid <= 1e-10 and gap <= 1e-6, {
            "zero_mass_residual": resid, "x_inf": asym.X_inf,
            "xy_gap": gap,
        }
    return _timed(4, "zero-mass-enforcement", worker)


def _masked_envelope(times, values, rate, scale):
    """Envelope constant above the series' own late-time floor.

    The controlled residuals bottom out at the float-rounding floor of the
    stacked difference operators (the floor itself wiggles by a factor of a
    few); samples within 10x of the series minimum measure that floor, not
    the decay, and are excluded.
    """
    values = np.asarray(values)
    mask = values > 10.0 * float(values.min())
    if not np.any(mask):
        return float(np.max(values / (scale * np.exp(-rate * times))))
    t = np.asarray(times)[mask]
    return float(np.max(values[mask] / (scale * np.exp(-rate * t))))


def criterion_residuals(ctx: AcceptanceContext) -> CriterionResult:
    """Quadratic-ansatz residual envelopes at the paper's nu, delta scales."""
    def worker():
        prof = ctx.profile
        hm, hp = ctx.histories
        times = np.round(np.arange(0, 79) * 0.5 + 1.0, 10)
        res = residual_series(prof, hm, hp, ctx.line_grid, times, TEMPERATURE)
        alpha = ctx.alpha_hat()
        delta = ctx.connection.strength
        nu = max(hm.nu, hp.nu)
        consts = {}
        ok = True
        for key, scale in (("h1_l2", nu * delta ** 0.5),
                           ("h1_h2", nu * delta ** 0.5),
                           ("h2_l2", nu * delta ** 0.5),
                           ("h2_h2", nu * delta ** 0.5),
                           ("h3_l2", nu * delta ** 0.5),
                           ("h3_h2", nu * delta ** 0.5),
                           ("H1_l2", nu * delta ** -0.5),
                           ("H2_l2", nu * delta ** -0.5)):
            c = _masked_envelope(res["times"], res["controlled"][key], alpha, scale)
            consts["C_" + key] = c
            ok = ok and c <= 10.0
        return ok, consts
    return _timed(5, "ansatz-residual-decay", worker)


def criterion_shock_run(ctx: AcceptanceContext) -> CriterionResult:
    """Full shock Cauchy run: contraction, terminal shift, truncation."""
    def worker():
        prof = ctx.profile
        sm, sp = ctx.specs
        hm, hp = ctx.histories
        draft = ShockInitialData(spec_minus=sm, spec_plus=sp)
        data, (x0, y0), asym = enforce_zero_mass(draft, prof, hm, hp)
        sc = ShockScenario(profile=prof, hist_minus=hm, hist_plus=hp,
                           data=data, x0=x0, y0=y0, asym=asym)
        h = PERIOD / CELLS_PER_PERIOD
        t_end = 30.0
        outs = tuple(np.round(np.arange(0, 61) * 0.5, 10))
        series = {}
        for half in (HALF_CELLS, 2 * HALF_CELLS):
            cfg = SolverConfig(L=half * h, n_points=2 * half + 1, t_end=t_end,
                               output_times=outs, scenario="shock")
            series[half], _, _ = run(cfg, sc)
        s1 = series[HALF_CELLS]
        post = s1.times >= 1.0
        peak = float(np.max(s1.dist_linf[post]))
        final = float(s1.dist_linf[-1])
        ratio = peak / final
        shift_gap = abs(float(s1.shift_obs[-1]) - asym.X_inf)
        trunc = float(np.max(np.abs(
            s1.dist_linf - series[2 * HALF_CELLS].dist_linf)))
        ok = (ratio >= 10.0 and shift_gap <= 2.0 * h and trunc < 1e-6
              and 2 * HALF_CELLS + 1 <= 4096)
        return ok, {
            "peak": peak, "final": final, "contraction": ratio,
            "shift_gap": shift_gap, "shift_tol": 2.0 * h,
            "truncation_change": trunc, "monitor_c": s1.monitor_constant,
            "n_points": 2 * HALF_CELLS + 1,
        }
    return _timed(6, "shock-cauchy-run", worker)


def criterion_rarefaction_run(ctx: AcceptanceContext) -> CriterionResult:
    """Fan convergence and the smooth-background derivative envelopes."""
    def worker():
        n_plus = solve_fan_density(1.0, 0.0, 0.2, TEMPERATURE)
        c = sound_speed(TEMPERATURE)
        du = c * math.log(n_plus)
        ep = rarefaction_connect(EndState(1.0, -c - 0.5 * du), n_plus,
                                 TEMPERATURE)
        smooth = SmoothRarefaction(ep, 0.1)
        n_per = 32
        h = PERIOD / n_per
        t_end = 100.0
        times = np.round(np.arange(0, 1001) * 0.1, 10)
        hm = evolve_periodic(ep.left, spec_with_nu(
            eigenmode_spec(ep.left, PERIOD, 1, NU, TEMPERATURE, phase=0.7),
            NU, n_points_per_period=n_per), TEMPERATURE, t_end,
            output_times=times, n_points_per_period=n_per)
        hp = evolve_periodic(ep.right, spec_with_nu(
            eigenmode_spec(ep.right, PERIOD, 1, NU, TEMPERATURE, phase=-0.3),
            NU, n_points_per_period=n_per), TEMPERATURE, t_end,
            output_times=times, n_points_per_period=n_per)
        sc = RarefactionScenario(smooth=smooth, hist_minus=hm, hist_plus=hp)
        half = 2730
        cfg = SolverConfig(L=half * h, n_points=2 * half + 1, t_end=t_end,
                           output_times=tuple(np.round(np.arange(0, 51) * 2.0, 10)),
                           scenario="rarefaction", diagnostic_halfwidth=120.0)
        series, _, _ = run(cfg, sc)
        d10 = float(series.dist_linf[series.times == 10.0][0])
        d100 = float(series.dist_linf[-1])
        ratio = d100 / d10
        contraction_ok = ratio <= 0.25

        env_times = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)
        consts = {}
        env_ok = True
        for p, label in ((1, "C_1"), (2, "C_2"), (np.inf, "C_inf")):
            env = derivative_norm_envelope(smooth, env_times, p)
            consts[label] = env["constant"]
            env_ok = env_ok and env["constant"] <= 10.0

        details = {"dist_t10": d10, "dist_t100": d100, "contraction": ratio,
                   "contraction_ok": contraction_ok, "envelopes_ok": env_ok}
        details.update(consts)
        return contraction_ok and env_ok, details
    return _timed(7, "rarefaction-cauchy-run", worker)


def criterion_remainders(ctx: AcceptanceContext) -> CriterionResult:
    """Blending-calculus remainders decay; growth allowance stays bounded."""
    def worker():
        hm, hp = ctx.histories
        times = np.round(np.arange(0, 20) * 1.0 + 1.0, 10)
        out = lemma_error_checks(ctx.profile, hm, hp, ctx.line_grid, times)
        alpha = ctx.alpha_hat()
        worst_rate = np.inf
        ok = True
        for label, series in out["checks"].items():
            vals = series["linf"]
            top = float(np.max(vals))
            if top < 1e-12:
                continue  # telescopes exactly; nothing left to fit
            fit = log_linear_fit(times, vals, floor=max(top * 1e-9, 3.0 * vals.min()))
            worst_rate = min(worst_rate, fit.rate)
            ok = ok and fit.rate >= 0.5 * alpha
        sp_max = max(float(np.max(v)) for v in out["sp_allowance"].values())
        ok = ok and sp_max <= 10.0
        return ok, {"worst_rate": worst_rate, "rate_floor": 0.5 * alpha,
                    "sp_allowance_max": sp_max}
    return _timed(8, "remainder-calculus", worker)


def criterion_oracles(ctx: AcceptanceContext) -> CriterionResult:
    """Independent-route checks of the low-level numerics."""
    def worker():
        rng = np.random.default_rng(1789)
        tri_dev = 0.0
        for cyclic in (False, True):
            n = 50
            k = n if cyclic else n - 1
            sys_ = TridiagonalSystem(
                lower=rng.uniform(-1, 1, k), diag=rng.uniform(3, 4, n),
                upper=rng.uniform(-1, 1, k), cyclic=cyclic)
            dense = np.zeros((n, n))
            for i in range(n):
                dense[i, i] = sys_.diag[i]
            if cyclic:
                for i in range(n):
                    dense[i, (i - 1) % n] += sys_.lower[i] if i > 0 else 0.0
                dense[0, n - 1] += sys_.lower[0]
                for i in range(n - 1):
                    dense[i, i + 1] += sys_.upper[i]
                dense[n - 1, 0] += sys_.upper[n - 1]
            else:
                for i in range(n - 1):
                    dense[i + 1, i] = sys_.lower[i]
                    dense[i, i + 1] = sys_.upper[i]
            rhs = rng.uniform(-1, 1, n)
            x = solve_tridiagonal(sys_, rhs)
            tri_dev = max(tri_dev, float(np.max(np.abs(x - np.linalg.solve(dense, rhs)))))
        tri_ok = tri_dev <= 1e-10

        ep = rarefaction_connect(EndState(1.0, -1.5), 1.084839, TEMPERATURE)
        xi = np.linspace(-50.0, 50.0, 401)
        c = sound_speed(TEMPERATURE)
        wm, wp = ep.left.u_bar + c, ep.right.u_bar + c
        mu, half = 0.5 * (wp + wm), 0.5 * (wp - wm)
        t = 7.3
        w0 = mu + half * np.tanh(0.1 * xi)
        x_traced = xi + t * w0
        bur_dev = float(np.max(np.abs(burgers_smooth(x_traced, t, ep, 0.1) - w0)))
        bur_ok = bur_dev <= 1e-8

        pb_devs = {}
        for m in (128, 256):
            g = Grid1D(0.0, PERIOD, m + 1)
            h = g.spacing
            a, kmode = 1e-4, 3.0
            nv = 1.0 + a * np.cos(kmode * g.x[:-1])
            phi, _, _ = pb_newton_arr(nv, h, True, np.zeros(m), tol=1e-13)
            s_k = (2.0 - 2.0 * math.cos(kmode * h)) / h ** 2
            pred = -a * np.cos(kmode * g.x[:-1]) / (1.0 + s_k)
            lin_dev = float(np.max(np.abs(phi - pred)))

            phi_star = 0.3 * np.sin(2.0 * g.x[:-1]) + 0.1 * np.cos(5.0 * g.x[:-1])
            n_star = (-1.2 * np.sin(2.0 * g.x[:-1]) - 2.5 * np.cos(5.0 * g.x[:-1])
                      + np.exp(-phi_star))
            sol, _, _ = pb_newton_arr(n_star, h, True, np.zeros(m), tol=1e-11)
            pb_devs[m] = (lin_dev, float(np.max(np.abs(sol - phi_star))))
        lin_ok = pb_devs[128][0] <= 10.0 * a * a
        conv_ratio = pb_devs[128][1] / pb_devs[256][1]
        manu_ok = 2.8 <= conv_ratio <= 5.5

        rh = rh_residuals(ctx.connection)
        rh_dev = max(abs(rh[0]), abs(rh[1]))
        rh_ok = rh_dev <= 1e-12

        return tri_ok and bur_ok and lin_ok and manu_ok and rh_ok, {
            "tridiag_dev": tri_dev, "burgers_dev": bur_dev,
            "pb_linear_dev": pb_devs[128][0], "pb_conv_ratio": conv_ratio,
            "rh_dev": rh_dev,
        }
    return _timed(9, "oracle-suite", worker)


ALL_CRITERIA = (
    criterion_profile,
    criterion_periodic,
    criterion_shifts,
    criterion_zero_mass,
    criterion_residuals,
    criterion_shock_run,
    criterion_rarefaction_run,
    criterion_remainders,
    criterion_oracles,
)


def run_all(ctx: AcceptanceContext | None = None):
    ctx = ctx or AcceptanceContext()
    return [fn(ctx) for fn in ALL_CRITERIA]
