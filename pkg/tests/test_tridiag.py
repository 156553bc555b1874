from __future__ import annotations

import numpy as np
import pytest

from nsp_waves.tridiag import TridiagonalSystem, solve_tridiagonal


def _dense(sys_):
    n = sys_.diag.size
    a = np.zeros((n, n))
    for i in range(n):
        a[i, i] = sys_.diag[i]
    if sys_.cyclic:
        for i in range(1, n):
            a[i, i - 1] = sys_.lower[i]
        a[0, n - 1] = sys_.lower[0]
        for i in range(n - 1):
            a[i, i + 1] = sys_.upper[i]
        a[n - 1, 0] = sys_.upper[n - 1]
    else:
        for i in range(n - 1):
            a[i + 1, i] = sys_.lower[i]
            a[i, i + 1] = sys_.upper[i]
    return a


@pytest.mark.parametrize("cyclic", [False, True])
def test_random_diagonally_dominant_vs_dense(cyclic):
    rng = np.random.default_rng(20240617)
    for n in (4, 17, 80):
        k = n if cyclic else n - 1
        sys_ = TridiagonalSystem(
            lower=rng.uniform(-1.0, 1.0, k),
            diag=rng.uniform(3.0, 4.0, n),
            upper=rng.uniform(-1.0, 1.0, k),
            cyclic=cyclic,
        )
        rhs = rng.uniform(-1.0, 1.0, n)
        x = solve_tridiagonal(sys_, rhs)
        x_ref = np.linalg.solve(_dense(sys_), rhs)
        assert np.max(np.abs(x - x_ref)) < 1e-12


@pytest.mark.parametrize("cyclic", [False, True])
def test_matvec_roundtrip(cyclic):
    rng = np.random.default_rng(7)
    n = 31
    k = n if cyclic else n - 1
    sys_ = TridiagonalSystem(
        lower=rng.uniform(-1.0, 1.0, k),
        diag=rng.uniform(2.5, 3.5, n),
        upper=rng.uniform(-1.0, 1.0, k),
        cyclic=cyclic,
    )
    x = rng.uniform(-2.0, 2.0, n)
    back = solve_tridiagonal(sys_, sys_.matvec(x))
    assert np.max(np.abs(back - x)) < 1e-12


def test_shape_validation():
    with pytest.raises(ValueError):
        TridiagonalSystem(lower=np.ones(3), diag=np.ones(3), upper=np.ones(2))
