"""Flat key = value experiment configuration.

The config format is deliberately primitive: one scalar per line, ``#``
comments, optional ``[section]`` headers that are cosmetic only (the key
namespace is flat).  Every key has a default, so an empty file is a valid
shock experiment; validation errors always name the offending key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .riemann import (
    EndState,
    RarefactionEndpoints,
    ShockConnection,
    hugoniot_connect,
    rarefaction_connect,
    sound_speed,
)


class ConfigError(ValueError):
    pass


_TWO_PI = 2.0 * math.pi


def _as_float(raw: str) -> float:
    return float(raw)


def _as_int(raw: str) -> int:
    v = float(raw)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _as_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError("not a boolean")


def _as_str(raw: str) -> str:
    return raw.strip()


def _as_float_list(raw: str) -> tuple:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(float(p) for p in raw.split(","))


# key -> (default, parser).  This table is also the registry of known keys.
_SCHEMA = {
    "scenario": ("shock", _as_str),
    "temperature": (1.0, _as_float),
    "n_left": (1.1, _as_float),
    "u_left": (0.0, _as_float),
    "n_right": (1.0, _as_float),
    "delta_r": (0.2, _as_float),
    "smoothing": (0.1, _as_float),
    "boost_frame": (True, _as_bool),
    "period": (_TWO_PI, _as_float),
    "nu_minus": (1e-3, _as_float),
    "nu_plus": (1e-3, _as_float),
    "mode_k_minus": (1, _as_int),
    "mode_k_plus": (1, _as_int),
    "phase_minus": (0.7, _as_float),
    "phase_plus": (-0.3, _as_float),
    "bump_amplitude_n": (0.0, _as_float),
    "bump_amplitude_m": (0.0, _as_float),
    "bump_center": (0.0, _as_float),
    "bump_width": (1.0, _as_float),
    "gamma0": (0.01, _as_float),
    "n_points_per_period": (64, _as_int),
    "domain_halfwidth": (1920 * _TWO_PI / 64, _as_float),
    "n_points": (3841, _as_int),
    "t_end": (30.0, _as_float),
    "output_spacing": (0.5, _as_float),
    "history_spacing": (0.05, _as_float),
    "diagnostic_halfwidth": (25.0, _as_float),
    "snapshot_times": ((), _as_float_list),
    "cfl_hyperbolic": (0.4, _as_float),
    "cfl_parabolic": (0.25, _as_float),
    "poisson_tol": (1e-10, _as_float),
    "epsilon0": (0.1, _as_float),
    "out_dir": ("out", _as_str),
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    temperature: float
    n_left: float
    u_left: float
    n_right: float
    delta_r: float
    smoothing: float
    boost_frame: bool
    period: float
    nu_minus: float
    nu_plus: float
    mode_k_minus: int
    mode_k_plus: int
    phase_minus: float
    phase_plus: float
    bump_amplitude_n: float
    bump_amplitude_m: float
    bump_center: float
    bump_width: float
    gamma0: float
    n_points_per_period: int
    domain_halfwidth: float
    n_points: int
    t_end: float
    output_spacing: float
    history_spacing: float
    diagnostic_halfwidth: float
    snapshot_times: tuple
    cfl_hyperbolic: float
    cfl_parabolic: float
    poisson_tol: float
    epsilon0: float
    out_dir: str

    @property
    def cell_spacing(self) -> float:
        return self.period / self.n_points_per_period

    @property
    def nu(self) -> float:
        return max(self.nu_minus, self.nu_plus,
                   abs(self.bump_amplitude_n), abs(self.bump_amplitude_m))

    def output_times(self) -> tuple:
        count = int(round(self.t_end / self.output_spacing))
        return tuple(self.output_spacing * k for k in range(count + 1))

    def history_times(self) -> np.ndarray:
        count = int(round(self.t_end / self.history_spacing))
        return self.history_spacing * np.arange(count + 1)

    def shock_connection(self) -> ShockConnection:
        return hugoniot_connect(EndState(self.n_left, self.u_left),
                                self.n_right, self.temperature)

    def rarefaction_endpoints(self) -> RarefactionEndpoints:
        c = sound_speed(self.temperature)
        u_left = self.u_left
        if self.boost_frame:
            # put the fan center at rest: the mean of w = u + c over the end
            # states becomes zero, so the diagnostic window never moves
            u_left = -c - 0.5 * c * math.log(self.n_right / self.n_left)
        return rarefaction_connect(EndState(self.n_left, u_left),
                                   self.n_right, self.temperature)

    def refined(self, factor: int) -> "ExperimentConfig":
        """Same experiment with the spatial grid refined by an integer factor."""
        if factor < 1 or factor != int(factor):
            raise ConfigError("refine factor must be a positive integer")
        f = int(factor)
        return replace(
            self,
            n_points_per_period=self.n_points_per_period * f,
            n_points=(self.n_points - 1) * f + 1,
        )


def _strength(cfg: ExperimentConfig) -> float:
    if cfg.scenario == "shock":
        return abs(cfg.n_right - cfg.n_left)
    return cfg.delta_r


def solve_fan_density(n_left: float, u_left: float, delta_r: float,
                      temperature: float) -> float:
    """Right density of the 2-rarefaction with prescribed strength.

    Solves |n+ - n-| + |u+ - u-| = delta_r along the integral curve
    u+ = u- + c ln(n+/n-); strictly increasing in n+, so bisection on a
    bracket is enough.
    """
    if delta_r <= 0.0:
        raise ConfigError("delta_r: rarefaction strength must be positive")
    c = sound_speed(temperature)

    def gap(n_plus):
        return (n_plus - n_left) + c * math.log(n_plus / n_left) - delta_r

    lo, hi = n_left, n_left + delta_r
    while gap(hi) < 0.0:
        hi += delta_r
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.scenario not in ("shock", "rarefaction"):
        raise ConfigError("scenario: expected 'shock' or 'rarefaction', got %r"
                          % cfg.scenario)
    if not cfg.temperature > 0.0:
        raise ConfigError("temperature: must be positive")
    for key in ("n_left", "n_right"):
        if not getattr(cfg, key) > 0.0:
            raise ConfigError("%s: density must be positive" % key)
    if cfg.scenario == "shock" and not cfg.n_right < cfg.n_left:
        raise ConfigError("n_right: a Lax 2-shock needs n_right < n_left")
    if cfg.scenario == "rarefaction":
        if not cfg.smoothing > 0.0:
            raise ConfigError("smoothing: must be positive")
        derived = solve_fan_density(cfg.n_left, cfg.u_left, cfg.delta_r,
                                    cfg.temperature)
        if abs(cfg.n_right - _SCHEMA["n_right"][0]) < 1e-300:
            cfg = replace(cfg, n_right=derived)
        elif abs(cfg.n_right - derived) > 1e-8 * (1.0 + derived):
            raise ConfigError(
                "n_right: inconsistent with delta_r; strength %.2e needs "
                "n_right = %.12g" % (cfg.delta_r, derived))

    for key in ("nu_minus", "nu_plus"):
        if getattr(cfg, key) < 0.0:
            raise ConfigError("%s: amplitude must be nonnegative" % key)
    if not cfg.gamma0 > 0.0:
        raise ConfigError("gamma0: must be positive")
    delta = _strength(cfg)
    nu_per = max(cfg.nu_minus, cfg.nu_plus)
    if nu_per > cfg.gamma0 * delta:
        raise ConfigError(
            "nu_minus/nu_plus: periodic amplitude %.3e exceeds the smallness "
            "bound gamma0*delta = %.3e; shrink the perturbation or the "
            "gamma0 margin" % (nu_per, cfg.gamma0 * delta))
    for key in ("mode_k_minus", "mode_k_plus"):
        if getattr(cfg, key) < 1:
            raise ConfigError("%s: wavenumber must be >= 1" % key)
    if (cfg.bump_amplitude_n != 0.0 or cfg.bump_amplitude_m != 0.0) \
            and not cfg.bump_width > 0.0:
        raise ConfigError("bump_width: must be positive when a bump is set")

    if not cfg.period > 0.0:
        raise ConfigError("period: must be positive")
    if cfg.n_points_per_period < 8:
        raise ConfigError("n_points_per_period: need at least 8")
    if cfg.n_points < 16:
        raise ConfigError("n_points: need at least 16")
    h = cfg.cell_spacing
    half_cells = cfg.domain_halfwidth / h
    spacing_ok = abs(half_cells - round(half_cells)) < 1e-9 * max(1.0, half_cells)
    count_ok = cfg.n_points == 2 * int(round(half_cells)) + 1
    if not (spacing_ok and count_ok):
        snapped = max(1, int(round(half_cells)))
        raise ConfigError(
            "n_points: line grid is not commensurate with the cell period; "
            "with domain_halfwidth = %.12g (= %d cells of %.12g) use "
            "n_points = %d" % (snapped * h, snapped, h, 2 * snapped + 1))

    if not cfg.t_end > 0.0:
        raise ConfigError("t_end: must be positive")
    for key in ("output_spacing", "history_spacing"):
        v = getattr(cfg, key)
        if not v > 0.0:
            raise ConfigError("%s: must be positive" % key)
        ratio = cfg.t_end / v
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError("%s: must divide t_end evenly" % key)
    if not cfg.diagnostic_halfwidth > 0.0:
        raise ConfigError("diagnostic_halfwidth: must be positive")
    for t in cfg.snapshot_times:
        if t < 0.0 or t > cfg.t_end:
            raise ConfigError("snapshot_times: %g outside [0, t_end]" % t)
        k = t / cfg.output_spacing
        if abs(k - round(k)) > 1e-9 * max(1.0, k):
            raise ConfigError(
                "snapshot_times: %g is not a multiple of output_spacing" % t)
    if not 0.0 < cfg.cfl_hyperbolic <= 1.0:
        raise ConfigError("cfl_hyperbolic: must lie in (0, 1]")
    if not 0.0 < cfg.cfl_parabolic <= 0.5:
        raise ConfigError("cfl_parabolic: must lie in (0, 0.5]")
    if not 0.0 < cfg.poisson_tol <= 1e-6:
        raise ConfigError("poisson_tol: must lie in (0, 1e-6]")
    if not cfg.epsilon0 > 0.0:
        raise ConfigError("epsilon0: must be positive")
    return cfg


def parse_text(text: str) -> ExperimentConfig:
    values = {key: default for key, (default, _) in _SCHEMA.items()}
    seen = set()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected 'key = value', got %r"
                              % (lineno, raw_line.strip()))
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA:
            raise ConfigError("line %d: unknown key %r" % (lineno, key))
        if key in seen:
            raise ConfigError("line %d: duplicate key %r" % (lineno, key))
        seen.add(key)
        try:
            values[key] = _SCHEMA[key][1](raw.strip())
        except ValueError as exc:
            raise ConfigError("%s: cannot parse %r (%s)" % (key, raw.strip(), exc))
    return _validate(ExperimentConfig(**values))


def parse_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_text(fh.read())


def format_config(cfg: ExperimentConfig) -> str:
    """Round-trippable dump of every key, one per line."""
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            rendered = ",".join("%.17g" % x for x in v)
        elif isinstance(v, bool):
            rendered = "true" if v else "false"
        elif isinstance(v, float):
            rendered = "%.17g" % v
        else:
            rendered = str(v)
        lines.append("%s = %s" % (f.name, rendered))
    return "\n".join(lines) + "\n"
