"""Delimited artifacts and figures for experiment runs.

All data files are plain text with 17 significant digits and no timestamps,
so identical inputs produce byte-identical outputs.  Figures (SVG via the
Agg-family backends) sit alongside the delimited files; they carry no clock
metadata either, but only the delimited outputs are contractually
reproducible byte for byte.
"""

from __future__ import annotations

import os

import numpy as np

from .ansatz import RESIDUAL_KEYS


class ReportError(RuntimeError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path, header, columns) -> str:
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ReportError("header/column count mismatch")
    if not cols or cols[0].size == 0:
        raise ReportError("refusing to write empty table %s" % path)
    n = cols[0].size
    for name, c in zip(header, cols):
        if c.size != n:
            raise ReportError("column %s has %d rows, expected %d"
                              % (name, c.size, n))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i]) for c in cols) + "\n")
    return path


def write_dat(path, x, y) -> str:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or x.size != y.size:
        raise ReportError("plot data needs matching nonempty columns")
    with open(path, "w", encoding="utf-8") as fh:
        for xi, yi in zip(x, y):
            fh.write("%.17g %.17g\n" % (xi, yi))
    return path


def write_summary(path, entries) -> str:
    """key = value lines; booleans render as true/false for pass/fail flags."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in entries.items():
            fh.write("%s = %s\n" % (key, _fmt(value)))
    return path


def read_summary(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition("=")
            raw = raw.strip()
            if raw in ("true", "false"):
                out[key.strip()] = raw == "true"
            else:
                try:
                    out[key.strip()] = float(raw)
                except ValueError:
                    out[key.strip()] = raw
    return out


def diagnostics_csv(out_dir, series, name="diagnostics.csv") -> str:
    cols = [series.times] + [getattr(series, c) for c in series.COLUMNS[1:]]
    return write_csv(os.path.join(out_dir, name), list(series.COLUMNS), cols)


def snapshot_csv(out_dir, tag, state) -> str:
    path = os.path.join(out_dir, "snapshot_%s.csv" % tag)
    return write_csv(path, ["x", "n", "m", "u", "phi"],
                     [state.grid.x, state.n.values, state.m.values,
                      state.u.values, state.phi.values])


def profile_csv(out_dir, profile) -> str:
    path = os.path.join(out_dir, "profile.csv")
    return write_csv(
        path,
        ["xi", "n", "m", "u", "phi", "dn", "dm", "du", "dphi"],
        [profile.xi_grid.x, profile.n_s.values, profile.m_s.values,
         profile.u_s.values, profile.phi_s.values, profile.dn_s.values,
         profile.dm_s.values, profile.du_s.values, profile.dphi_s.values])


def periodic_csv(out_dir, side, history) -> str:
    t, l2n, l2m, h1 = history.perturbation_series()
    path = os.path.join(out_dir, "periodic_%s.csv" % side)
    return write_csv(path, ["t", "l2_n", "l2_m", "h1_total"], [t, l2n, l2m, h1])


def shift_csv(out_dir, traj) -> str:
    path = os.path.join(out_dir, "shifts.csv")
    return write_csv(path, ["t", "X", "Y", "Xprime", "Yprime"],
                     [traj.times, traj.X, traj.Y, traj.Xprime, traj.Yprime])


def residuals_csv(out_dir, res) -> str:
    """Controlled/raw/floor residual norms from residual_series."""
    header = ["t"]
    cols = [np.asarray(res["times"])]
    for group in ("controlled", "raw", "floor"):
        for key in RESIDUAL_KEYS:
            header.append("%s_%s" % (group, key))
            cols.append(np.asarray(res[group][key]))
    return write_csv(os.path.join(out_dir, "residuals.csv"), header, cols)


def _render_figure(path, times, curves, log, xlabel, title):
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "nsp-waves"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, values in curves.items():
        vals = np.asarray(values, dtype=float)
        if log:
            mask = vals > 0.0
            ax.semilogy(np.asarray(times)[mask], vals[mask], label=label)
        else:
            ax.plot(times, vals, label=label)
    ax.set_xlabel(xlabel)
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if path.endswith(".svg") else None)
    plt.close(fig)
    return path


def emit_plot_data(out_dir, name, times, curves, log=False, svg=True,
                   xlabel="t", title="") -> list:
    """Two-column .dat per curve plus one figure overlaying them all.

    curves maps a label to a value array; empty input is an error.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0 or not curves:
        raise ReportError("nothing to plot for %r" % name)
    paths = []
    for label, values in curves.items():
        safe = label.replace(" ", "_").replace("/", "-")
        paths.append(write_dat(os.path.join(out_dir, "%s.%s.dat" % (name, safe)),
                               times, values))
    if svg:
        paths.append(_render_figure(os.path.join(out_dir, "%s.svg" % name),
                                    times, curves, log, xlabel, title))
    return paths
