"""Viscous wave patterns for the 1-D isentropic Navier-Stokes-Poisson system.

The package solves the traveling shock profile, evolves the periodic end
states it connects, integrates the shift dynamics that locate the wave, and
runs full Cauchy experiments against composite and smoothed-fan ansatzes.
"""

from .config import ConfigError, ExperimentConfig, parse_config, parse_text
from .grid import Grid1D, SpatialField
from .periodic import PeriodicHistory, PerturbationSpec, evolve_periodic, fit_alpha
from .profile import ShockProfile, compute_profile
from .riemann import (
    EndState,
    RarefactionEndpoints,
    ShockConnection,
    hugoniot_connect,
    rarefaction_connect,
    sound_speed,
)
from .shifts import LocalizedBump, ShockInitialData, enforce_zero_mass

__all__ = [
    "ConfigError",
    "EndState",
    "ExperimentConfig",
    "Grid1D",
    "LocalizedBump",
    "PeriodicHistory",
    "PerturbationSpec",
    "RarefactionEndpoints",
    "ShockConnection",
    "ShockInitialData",
    "ShockProfile",
    "SpatialField",
    "compute_profile",
    "enforce_zero_mass",
    "evolve_periodic",
    "fit_alpha",
    "hugoniot_connect",
    "parse_config",
    "parse_text",
    "rarefaction_connect",
    "sound_speed",
    "__version__",
]

__version__ = "0.1.0"
