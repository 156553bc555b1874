"""Uniform 1-D grids, discrete fields, difference operators, quadrature and norms.

Everything downstream (profile residuals, cell evolution, shift quadratures,
ansatz residual calculus) is built on the second-order operators defined here,
so that residual bounds and the norms they are measured in are mutually
consistent.

Conventions
-----------
* Grids are uniform with both endpoints stored: ``spacing = (x_max - x_min) /
  (n_points - 1)``.
* A periodic field stores the duplicated sample at ``x_max`` (identified with
  ``x_min``); the duplicate is consistent with trapezoid quadrature over one
  full period and is kept equal to ``values[0]`` by all evolution code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PERIODIC = "periodic"
LINE = "line"


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [x_min, x_max] with n_points including both endpoints."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError("Grid1D needs n_points >= 3, got %d" % self.n_points)
        if not self.x_max > self.x_min:
            raise ValueError("Grid1D needs x_max > x_min")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_points)

    def index_of(self, pos: float, tol: float = 1e-9) -> int:
        """Index of the grid point at ``pos``; ``pos`` must be grid aligned."""
        h = self.spacing
        i = int(round((pos - self.x_min) / h))
        if i < 0 or i >= self.n_points or abs(self.x_min + i * h - pos) > tol * max(1.0, abs(pos)) + tol * h:
            raise ValueError("position %r is not aligned with the grid" % (pos,))
        return i


@dataclass
class SpatialField:
    """Real-valued samples of a function on a Grid1D.

    boundary_kind selects the stencil closure: 'periodic' wraps (the stored
    duplicate endpoint is treated as an alias of the first point), 'line' uses
    one-sided second-order stencils at the ends.
    """

    grid: Grid1D
    values: np.ndarray
    boundary_kind: str = LINE

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(
                "field has %d values but the grid has %d points"
                % (self.values.size, self.grid.n_points)
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")
        if self.boundary_kind not in (PERIODIC, LINE):
            raise ValueError("boundary_kind must be 'periodic' or 'line'")
        if self.boundary_kind == PERIODIC:
            scale = 1.0 + np.max(np.abs(self.values))
            if abs(self.values[0] - self.values[-1]) > 1e-8 * scale:
                raise ValueError(
                    "periodic field endpoints differ: %r vs %r"
                    % (self.values[0], self.values[-1])
                )

    def like(self, values: np.ndarray) -> "SpatialField":
        return SpatialField(self.grid, np.asarray(values, dtype=float), self.boundary_kind)


# ----------------------------------------------------------------------------
# array-level kernels (reused directly by the time steppers for speed)
# ----------------------------------------------------------------------------

def cyc_next(u: np.ndarray) -> np.ndarray:
    """out[i] = u[i+1 mod M]; cheaper than np.roll in tight loops."""
    out = np.empty_like(u)
    out[:-1] = u[1:]
    out[-1] = u[0]
    return out


def cyc_prev(u: np.ndarray) -> np.ndarray:
    """out[i] = u[i-1 mod M]."""
    out = np.empty_like(u)
    out[1:] = u[:-1]
    out[0] = u[-1]
    return out


def diff1_periodic_arr(u: np.ndarray, h: float) -> np.ndarray:
    """Central first derivative of one period worth of samples (no duplicate)."""
    return (cyc_next(u) - cyc_prev(u)) / (2.0 * h)


def diff2_periodic_arr(u: np.ndarray, h: float) -> np.ndarray:
    return (cyc_next(u) - 2.0 * u + cyc_prev(u)) / (h * h)


def diff1_line_arr(u: np.ndarray, h: float) -> np.ndarray:
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
    d[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
    return d


def diff2_line_arr(u: np.ndarray, h: float) -> np.ndarray:
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    if u.size >= 4:
        d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h)
        d[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / (h * h)
    else:
        # three-point fallback, still exact on quadratics
        d[0] = (u[0] - 2.0 * u[1] + u[2]) / (h * h)
        d[-1] = d[0]
    return d


# ----------------------------------------------------------------------------
# field-level operators
# ----------------------------------------------------------------------------

def diff1(f: SpatialField) -> SpatialField:
    """Second-order discrete d/dx. Exact on affine functions."""
    h = f.grid.spacing
    if f.boundary_kind == PERIODIC:
        d = diff1_periodic_arr(f.values[:-1], h)
        return f.like(np.append(d, d[0]))
    return f.like(diff1_line_arr(f.values, h))


def diff2(f: SpatialField) -> SpatialField:
    """Second-order discrete d^2/dx^2. Exact on quadratics."""
    h = f.grid.spacing
    if f.boundary_kind == PERIODIC:
        d = diff2_periodic_arr(f.values[:-1], h)
        return f.like(np.append(d, d[0]))
    return f.like(diff2_line_arr(f.values, h))


def integrate(f: SpatialField, a: float | None = None, b: float | None = None) -> float:
    """Composite trapezoid integral of f over [a, b] (grid-aligned bounds).

    Defaults to the full grid span. Exact on affine integrands; linear in f;
    additive over adjacent grid-aligned intervals.
    """
    g = f.grid
    ia = 0 if a is None else g.index_of(a)
    ib = g.n_points - 1 if b is None else g.index_of(b)
    if ib < ia:
        raise ValueError("integrate needs a <= b")
    if ib == ia:
        return 0.0
    v = f.values[ia : ib + 1]
    return float(g.spacing * (np.sum(v) - 0.5 * (v[0] + v[-1])))


def cumulative_integral(f: SpatialField) -> SpatialField:
    """Running trapezoid antiderivative from the left end (value 0 there)."""
    h = f.grid.spacing
    v = f.values
    out = np.concatenate(([0.0], np.cumsum(0.5 * h * (v[1:] + v[:-1]))))
    return SpatialField(f.grid, out, LINE)


def lp_norm(f: SpatialField, p: float) -> float:
    if p == np.inf:
        return sup_norm(f)
    val = integrate(f.like(np.abs(f.values) ** p))
    return float(val ** (1.0 / p))


def sup_norm(f: SpatialField) -> float:
    return float(np.max(np.abs(f.values)))


def sobolev_norm(f: SpatialField, k: int) -> float:
    """Discrete H^k norm: L2 of f and of its first k discrete derivatives.

    Derivatives are taken with the same diff1/diff2 operators used everywhere
    else (order 3 = diff1 of diff2), so residual estimates and the norms they
    are compared against share one discretization.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    total = lp_norm(f, 2) ** 2
    if k >= 1:
        total += lp_norm(diff1(f), 2) ** 2
    if k >= 2:
        d2 = diff2(f)
        total += lp_norm(d2, 2) ** 2
        if k >= 3:
            total += lp_norm(diff1(d2), 2) ** 2
        if k > 3:
            raise ValueError("H^k implemented for k <= 3")
    return float(np.sqrt(total))


def discrete_norms(f: SpatialField) -> dict:
    """Bundle of the norms used in reports: L1, L2, Linf, H1, H2."""
    return {
        "l1": lp_norm(f, 1),
        "l2": lp_norm(f, 2),
        "linf": sup_norm(f),
        "h1": sobolev_norm(f, 1),
        "h2": sobolev_norm(f, 2),
    }
