"""Least-squares fits for decay rates, envelopes, and scalar minimization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class LogLinearFit:
    """Fit of log y = intercept + slope * t over a window of samples."""

    slope: float
    intercept: float
    r_squared: float
    t_start: float
    t_end: float
    n_samples: int
    decades: float

    @property
    def rate(self) -> float:
        """Decay rate (positive when y decays)."""
        return -self.slope


def log_linear_fit(times, values, t_start=None, t_end=None, floor=0.0):
    """Least-squares line through (t, log y) for samples inside the window.

    Samples with y <= floor are discarded (noise floor of the measurement).
    Raises FitError when fewer than 5 usable samples remain or when the
    retained samples span less than one decade of decay.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = values > floor
    if t_start is not None:
        mask &= times >= t_start
    if t_end is not None:
        mask &= times <= t_end
    t = times[mask]
    y = values[mask]
    if t.size < 5:
        raise FitError("only %d usable samples in the fit window" % t.size)
    logy = np.log(y)
    decades = (logy.max() - logy.min()) / np.log(10.0)
    if decades < 1.0:
        raise FitError("samples span %.2f decades, need at least 1" % decades)
    slope, intercept = np.polyfit(t, logy, 1)
    pred = intercept + slope * t
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    return LogLinearFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        t_start=float(t[0]),
        t_end=float(t[-1]),
        n_samples=int(t.size),
        decades=float(decades),
    )


def envelope_constant(times, values, rate, scale, t_start=0.0):
    """Smallest C with y(t) <= C * scale * exp(-rate*t) on t >= t_start."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = times >= t_start
    if not np.any(mask):
        raise FitError("no samples at or beyond t=%g" % t_start)
    ratio = values[mask] / (scale * np.exp(-rate * times[mask]))
    return float(np.max(ratio))


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, a, b, tol=1e-8):
    """Golden-section minimum of a unimodal scalar function on [a, b]."""
    if not b > a:
        raise ValueError("need a < b")
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
