"""Command-line front end: runs, reports and the verification campaign.

Every command reads one flat config file, writes delimited data (and figures
for the curves worth looking at) into the output directory, prints a short
deterministic report to stdout and finishes with a machine-parsable summary
file.  Exit status is 0 only when everything the command checks has passed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .acceptance import AcceptanceContext, run_all
from .ansatz import SmoothRarefaction, derivative_norm_envelope
from .cauchy import RarefactionScenario, ShockScenario, SolverConfig, run
from .config import ConfigError, ExperimentConfig, parse_config
from .periodic import (
    evolve_periodic,
    eigenmode_spec,
    fit_alpha,
    spec_with_nu,
    zero_perturbation,
)
from .profile import (
    compute_profile,
    fit_profile_decay,
    unintegrated_residuals,
    verify_profile_structure,
)
from .report import (
    diagnostics_csv,
    emit_plot_data,
    periodic_csv,
    profile_csv,
    shift_csv,
    snapshot_csv,
    write_summary,
)
from .shifts import (
    LocalizedBump,
    ShockInitialData,
    asymptotic_shifts,
    enforce_zero_mass,
    initial_shifts,
    integrate_shifts,
    mass_ledger,
)

HISTORY_FLOOR_T = 40.0  # asymptotic-shift integrals need a decayed tail


def _load(args) -> ExperimentConfig:
    cfg = parse_config(args.config)
    if args.refine != 1:
        cfg = cfg.refined(args.refine)
    if args.out is not None:
        from dataclasses import replace

        cfg = replace(cfg, out_dir=args.out)
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg


def _side_spec(cfg: ExperimentConfig, side: str):
    nu = cfg.nu_minus if side == "minus" else cfg.nu_plus
    k = cfg.mode_k_minus if side == "minus" else cfg.mode_k_plus
    phase = cfg.phase_minus if side == "minus" else cfg.phase_plus
    if nu == 0.0:
        return zero_perturbation(cfg.period)
    seed = eigenmode_spec(_bases(cfg)[side], cfg.period, k, nu,
                          cfg.temperature, phase=phase)
    return spec_with_nu(seed, nu, n_points_per_period=cfg.n_points_per_period)


def _bases(cfg: ExperimentConfig) -> dict:
    if cfg.scenario == "shock":
        conn = cfg.shock_connection()
        return {"minus": conn.left, "plus": conn.right}
    ep = cfg.rarefaction_endpoints()
    return {"minus": ep.left, "plus": ep.right}


def _histories(cfg: ExperimentConfig, t_end: float):
    count = int(round(t_end / cfg.history_spacing))
    times = cfg.history_spacing * np.arange(count + 1)
    bases = _bases(cfg)
    out = {}
    for side in ("minus", "plus"):
        out[side] = evolve_periodic(
            bases[side], _side_spec(cfg, side), cfg.temperature, float(times[-1]),
            output_times=times, n_points_per_period=cfg.n_points_per_period,
            poisson_tol=min(cfg.poisson_tol, 1e-12))
    return out["minus"], out["plus"]


def _bumps(cfg: ExperimentConfig):
    return (LocalizedBump(cfg.bump_amplitude_n, cfg.bump_center, cfg.bump_width),
            LocalizedBump(cfg.bump_amplitude_m, cfg.bump_center, cfg.bump_width))


def _solver_config(cfg: ExperimentConfig, scenario: str) -> SolverConfig:
    return SolverConfig(
        L=cfg.domain_halfwidth, n_points=cfg.n_points, t_end=cfg.t_end,
        output_times=cfg.output_times(), scenario=scenario,
        cfl_hyperbolic=cfg.cfl_hyperbolic, cfl_parabolic=cfg.cfl_parabolic,
        diagnostic_halfwidth=cfg.diagnostic_halfwidth,
        poisson_tol=cfg.poisson_tol, epsilon0=cfg.epsilon0,
        snapshot_times=cfg.snapshot_times)


def cmd_profile(args) -> int:
    cfg = _load(args)
    conn = cfg.shock_connection()
    prof = compute_profile(conn)
    profile_csv(cfg.out_dir, prof)
    res = unintegrated_residuals(prof)
    decay = fit_profile_decay(prof)
    structure = verify_profile_structure(prof)
    emit_plot_data(cfg.out_dir, "profile", prof.xi_grid.x,
                   {"n": prof.n_s.values, "u": prof.u_s.values,
                    "phi": prof.phi_s.values}, xlabel="xi",
                   title="traveling-wave profile")
    structure_ok = (structure["dn_negative_everywhere"]
                    and structure["dphi_positive_everywhere"]
                    and structure["identity_ok"]
                    and structure["sigma_strictly_increasing"])
    ok = structure_ok and decay["r2_left"] >= 0.99 and decay["r2_right"] >= 0.99
    summary = {
        "speed": conn.speed, "mass_flux": conn.mass_flux,
        "strength": conn.strength,
        "momentum_residual_sup": res["momentum_sup"],
        "poisson_residual_sup": res["poisson_sup"],
        "decay_rate_left": decay["theta_left"],
        "decay_rate_right": decay["theta_right"],
        "tail_fit_r2_left": decay["r2_left"],
        "tail_fit_r2_right": decay["r2_right"],
        "identity_rel_error": structure["identity_rel_error"],
        "comparison_constant": structure["comparison_constant"],
        "sigma_at_zero": structure["sigma_at_zero"],
        "structure_ok": structure_ok,
        "passed": ok,
    }
    write_summary(os.path.join(cfg.out_dir, "summary.txt"), summary)
    print("profile: speed=%.6f flux=%.6f momentum_res=%.3e structure=%s"
          % (conn.speed, conn.mass_flux, res["momentum_sup"],
             "ok" if structure_ok else "BAD"))
    return 0 if ok else 1


def cmd_periodic(args) -> int:
    cfg = _load(args)
    times = np.asarray(cfg.output_times())
    bases = _bases(cfg)
    summary = {}
    curves = {}
    ok = True
    for side in ("minus", "plus"):
        hist = evolve_periodic(
            bases[side], _side_spec(cfg, side), cfg.temperature, cfg.t_end,
            output_times=times, n_points_per_period=cfg.n_points_per_period,
            poisson_tol=min(cfg.poisson_tol, 1e-12))
        periodic_csv(cfg.out_dir, side, hist)
        t, _, _, h1 = hist.perturbation_series()
        curves["h1_" + side] = h1
        summary["nu_" + side] = hist.nu
        if hist.nu == 0.0:
            summary["alpha_" + side] = 0.0
            continue
        fit = fit_alpha(hist)
        summary["alpha_" + side] = fit.alpha
        summary["fit_r2_" + side] = fit.r_squared
        summary["envelope_c_" + side] = fit.envelope_c
        ok = ok and fit.r_squared >= 0.99 and fit.envelope_c <= 10.0
        print("periodic %s: nu=%.3e alpha=%.6f r2=%.5f envelope_c=%.3f"
              % (side, hist.nu, fit.alpha, fit.r_squared, fit.envelope_c))
    emit_plot_data(cfg.out_dir, "cell_decay", times, curves, log=True,
                   title="periodic cell H1 decay")
    summary["passed"] = ok
    write_summary(os.path.join(cfg.out_dir, "summary.txt"), summary)
    return 0 if ok else 1


def cmd_shifts(args) -> int:
    cfg = _load(args)
    conn = cfg.shock_connection()
    prof = compute_profile(conn)
    hm, hp = _histories(cfg, max(cfg.t_end, HISTORY_FLOOR_T))
    bump_n, bump_m = _bumps(cfg)
    data = ShockInitialData(spec_minus=_side_spec(cfg, "minus"),
                            spec_plus=_side_spec(cfg, "plus"),
                            bump_n=bump_n, bump_m=bump_m)
    ledger = mass_ledger(data, prof)
    x0, y0 = initial_shifts(ledger, data.spec_minus, data.spec_plus, prof)
    traj = integrate_shifts(x0, y0, hm, hp, prof, cfg.t_end,
                            dt=2.0 * cfg.history_spacing)
    asym = asymptotic_shifts(x0, y0, data.spec_minus, data.spec_plus,
                             hm, hp, prof)
    shift_csv(cfg.out_dir, traj)
    emit_plot_data(cfg.out_dir, "shift_trajectory", traj.times,
                   {"X": traj.X, "Y": traj.Y}, title="shift trajectories")
    dx = abs(traj.X[-1] - asym.X_inf)
    dy = abs(traj.Y[-1] - asym.Y_inf)
    tol = 1e-3 * max(1.0, abs(asym.X_inf))
    ok = dx <= tol and dy <= tol
    summary = {
        "x0": x0, "y0": y0, "x_inf": asym.X_inf, "y_inf": asym.Y_inf,
        "x_terminal": float(traj.X[-1]), "y_terminal": float(traj.Y[-1]),
        "terminal_gap_x": dx, "terminal_gap_y": dy, "tolerance": tol,
        "zero_mass_residual": asym.zero_mass_residual, "passed": ok,
    }
    write_summary(os.path.join(cfg.out_dir, "summary.txt"), summary)
    print("shifts: X_inf=%.6f Y_inf=%.6f terminal gaps (%.2e, %.2e) tol %.2e"
          % (asym.X_inf, asym.Y_inf, dx, dy, tol))
    return 0 if ok else 1


def cmd_simulate_shock(args) -> int:
    cfg = _load(args)
    conn = cfg.shock_connection()
    prof = compute_profile(conn)
    hm, hp = _histories(cfg, max(cfg.t_end, HISTORY_FLOOR_T))
    bump_n, bump_m = _bumps(cfg)
    draft = ShockInitialData(spec_minus=_side_spec(cfg, "minus"),
                             spec_plus=_side_spec(cfg, "plus"),
                             bump_n=bump_n, bump_m=bump_m)
    data, (x0, y0), asym = enforce_zero_mass(draft, prof, hm, hp)
    scenario = ShockScenario(profile=prof, hist_minus=hm, hist_plus=hp,
                             data=data, x0=x0, y0=y0, asym=asym)
    series, final, snaps = run(_solver_config(cfg, "shock"), scenario)
    diagnostics_csv(cfg.out_dir, series)
    snapshot_csv(cfg.out_dir, "final", final)
    for t_snap, state in sorted(snaps.items()):
        snapshot_csv(cfg.out_dir, "t%g" % t_snap, state)
    emit_plot_data(cfg.out_dir, "decay", series.times,
                   {"dist_linf": series.dist_linf,
                    "h1_pert": series.h1_pert_norm}, log=True,
                   title="distance to the shifted ansatz")
    emit_plot_data(cfg.out_dir, "shift_observed", series.times,
                   {"shift_obs": series.shift_obs}, title="observed shift")
    post = series.times >= 1.0
    peak = float(np.max(series.dist_linf[post])) if np.any(post) \
        else float(series.dist_linf[0])
    final_dist = float(series.dist_linf[-1])
    ratio = peak / final_dist if final_dist > 0.0 else np.inf
    shift_gap = abs(float(series.shift_obs[-1]) - asym.X_inf)
    ok = final_dist <= peak and shift_gap <= 2.0 * cfg.cell_spacing
    summary = {
        "x_inf": asym.X_inf, "zero_mass_residual": asym.zero_mass_residual,
        "enforced_bump_m": data.bump_m.amplitude,
        "dist_initial": float(series.dist_linf[0]),
        "dist_peak_post_transient": peak, "dist_final": final_dist,
        "contraction_ratio": ratio, "shift_observed": float(series.shift_obs[-1]),
        "shift_gap": shift_gap, "shift_tol": 2.0 * cfg.cell_spacing,
        "monitor_constant": series.monitor_constant, "passed": ok,
    }
    write_summary(os.path.join(cfg.out_dir, "summary.txt"), summary)
    print("simulate-shock: dist %.3e -> %.3e (ratio %.1f), shift gap %.3e"
          % (peak, final_dist, ratio, shift_gap))
    return 0 if ok else 1


def cmd_simulate_rarefaction(args) -> int:
    cfg = _load(args)
    ep = cfg.rarefaction_endpoints()
    smooth = SmoothRarefaction(ep, cfg.smoothing)
    hm, hp = _histories(cfg, cfg.t_end)
    scenario = RarefactionScenario(smooth=smooth, hist_minus=hm, hist_plus=hp)
    series, final, snaps = run(_solver_config(cfg, "rarefaction"), scenario)
    diagnostics_csv(cfg.out_dir, series)
    snapshot_csv(cfg.out_dir, "final", final)
    for t_snap, state in sorted(snaps.items()):
        snapshot_csv(cfg.out_dir, "t%g" % t_snap, state)
    emit_plot_data(cfg.out_dir, "fan_distance", series.times,
                   {"dist_linf": series.dist_linf}, log=True,
                   title="sup distance to the exact fan")
    env = {p: derivative_norm_envelope(smooth, series.times[series.times > 0.0], p)
           for p in (1, 2, np.inf)}
    first = series.dist_linf[series.times >= min(10.0, cfg.t_end)]
    d_ref = float(first[0]) if first.size else float(series.dist_linf[0])
    d_final = float(series.dist_linf[-1])
    env_ok = all(env[p]["constant"] <= 10.0 for p in env)
    ok = env_ok and d_final <= d_ref
    summary = {
        "strength": ep.strength, "dist_reference": d_ref,
        "dist_final": d_final,
        "fan_ratio": d_final / d_ref if d_ref > 0.0 else np.inf,
        "envelope_c_l1": env[1]["constant"],
        "envelope_c_l2": env[2]["constant"],
        "envelope_c_linf": env[np.inf]["constant"],
        "monitor_constant": series.monitor_constant, "passed": ok,
    }
    write_summary(os.path.join(cfg.out_dir, "summary.txt"), summary)
    print("simulate-rarefaction: fan distance %.3e -> %.3e, envelopes %s"
          % (d_ref, d_final, "ok" if env_ok else "EXCEEDED"))
    return 0 if ok else 1


def cmd_verify_all(args) -> int:
    out_dir = args.out or "out"
    os.makedirs(out_dir, exist_ok=True)
    results = run_all(AcceptanceContext())
    summary = {}
    for r in results:
        print(r.line())
        summary["criterion_%d_%s" % (r.index, r.name)] = r.passed
    all_pass = all(r.passed for r in results)
    summary["all_pass"] = all_pass
    write_summary(os.path.join(out_dir, "verify_summary.txt"), summary)
    print("verify-all: %d/%d criteria passed" %
          (sum(r.passed for r in results), len(results)))
    return 0 if all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsp-waves",
        description="viscous shock and rarefaction experiments for the "
                    "isentropic Navier-Stokes-Poisson system")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, helptext, needs_config=True):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=needs_config,
                       help="path to the experiment config file")
        p.add_argument("--out", default=None,
                       help="output directory (default: out_dir from config)")
        p.add_argument("--refine", type=int, default=1, metavar="FACTOR",
                       help="refine all spatial grids by an integer factor")
        p.set_defaults(func=func)
        return p

    add("profile", cmd_profile, "solve and check the traveling-wave profile")
    add("periodic", cmd_periodic, "evolve the end-state periodic cells")
    add("shifts", cmd_shifts, "integrate the shift ODEs and compare limits")
    add("simulate-shock", cmd_simulate_shock,
        "full perturbed-shock Cauchy run")
    add("simulate-rarefaction", cmd_simulate_rarefaction,
        "full smoothed-fan Cauchy run")
    add("verify-all", cmd_verify_all,
        "run the complete desk-scale verification campaign",
        needs_config=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI reports, tests raise
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
