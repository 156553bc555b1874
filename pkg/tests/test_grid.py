from __future__ import annotations

import numpy as np
import pytest

from nsp_waves.grid import (
    LINE,
    PERIODIC,
    Grid1D,
    SpatialField,
    cumulative_integral,
    diff1,
    diff2,
    discrete_norms,
    integrate,
    lp_norm,
    sobolev_norm,
    sup_norm,
)


def _trig_field(kind, n=129):
    grid = Grid1D(0.0, 2.0 * np.pi, n)
    return grid, SpatialField(grid, np.sin(grid.x), kind)


def test_diff1_periodic_second_order():
    errs = []
    for n in (65, 129):
        grid, f = _trig_field(PERIODIC, n)
        err = np.max(np.abs(diff1(f).values - np.cos(grid.x)))
        errs.append(err)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_diff2_line_second_order():
    errs = []
    for n in (65, 129):
        grid, f = _trig_field(LINE, n)
        err = np.max(np.abs(diff2(f).values + np.sin(grid.x)))
        errs.append(err)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.25)


def test_periodic_quadrature_exact_for_modes():
    grid = Grid1D(0.0, 2.0 * np.pi, 65)
    f = SpatialField(grid, 0.3 + np.cos(3.0 * grid.x), PERIODIC)
    # trapezoid over a full period integrates trigonometric modes exactly
    assert integrate(f) == pytest.approx(0.3 * 2.0 * np.pi, abs=1e-13)


def test_cumulative_integral_matches_antiderivative():
    grid = Grid1D(-4.0, 4.0, 801)
    f = SpatialField(grid, np.exp(-grid.x ** 2))
    prim = cumulative_integral(f)
    from scipy.special import erf

    exact = 0.5 * np.sqrt(np.pi) * (erf(grid.x) - erf(grid.x[0]))
    assert np.max(np.abs(prim.values - exact)) < 5e-6


def test_norms_against_closed_forms():
    grid = Grid1D(0.0, 2.0 * np.pi, 257)
    f = SpatialField(grid, np.sin(grid.x), PERIODIC)
    assert lp_norm(f, 2) == pytest.approx(np.sqrt(np.pi), rel=1e-10)
    assert sup_norm(f) == pytest.approx(1.0, rel=1e-3)
    # |sin|_H1^2 = pi + pi up to the second-order derivative error
    assert sobolev_norm(f, 1) == pytest.approx(np.sqrt(2.0 * np.pi), rel=1e-4)
    norms = discrete_norms(f)
    assert norms["l2"] == pytest.approx(lp_norm(f, 2), rel=1e-14)


def test_grid_index_of_rejects_offgrid():
    grid = Grid1D(0.0, 1.0, 11)
    assert grid.index_of(0.3) == 3
    with pytest.raises(ValueError):
        grid.index_of(0.349)


def test_periodic_field_requires_matching_endpoints():
    grid = Grid1D(0.0, 1.0, 11)
    vals = np.ones(11)
    vals[-1] = 1.1
    with pytest.raises(ValueError):
        SpatialField(grid, vals, PERIODIC)
