"""Tridiagonal and cyclic-tridiagonal linear solves.

Plain systems go straight to LAPACK ``dgtsv``. Cyclic systems (periodic
second-difference matrices and friends) are reduced to a plain system plus a
rank-one Sherman-Morrison correction, which costs one extra solve against a
second right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack


@dataclass
class TridiagonalSystem:
    """Banded system A x = rhs.

    ``lower``/``upper`` have length n-1 for a plain system. For ``cyclic=True``
    they have length n, with ``lower[0]`` the (0, n-1) corner entry and
    ``upper[-1]`` the (n-1, 0) corner entry.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    cyclic: bool = False

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        n = self.diag.size
        want = n if self.cyclic else n - 1
        if self.lower.size != want or self.upper.size != want:
            raise ValueError(
                "band lengths (%d, %d) inconsistent with n=%d, cyclic=%s"
                % (self.lower.size, self.upper.size, n, self.cyclic)
            )

    def matvec(self, x: np.ndarray) -> np.ndarray:
        n = self.diag.size
        y = self.diag * x
        if self.cyclic:
            y += self.lower * np.roll(x, 1)
            y += self.upper * np.roll(x, -1)
        else:
            y[1:] += self.lower * x[:-1]
            y[:-1] += self.upper * x[1:]
        return y


class TridiagonalSolveError(RuntimeError):
    pass


def _gtsv(lower, diag, upper, rhs):
    du2, d, du, b, info = lapack.dgtsv(lower, diag, upper, rhs)
    if info != 0:
        raise TridiagonalSolveError(
            "dgtsv hit a zero pivot at row %d (singular tridiagonal factor)" % (info - 1)
        )
    return b


def solve_tridiagonal(system: TridiagonalSystem, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = rhs; verifies the residual against the assembled bands.

    Raises TridiagonalSolveError on singular pivots or when the verified
    residual exceeds 1e-10 relative to ||rhs||_inf (scaled by the solution
    magnitude for badly conditioned systems).
    """
    rhs = np.asarray(rhs, dtype=float)
    n = system.diag.size
    if rhs.shape[0] != n:
        raise ValueError("rhs length %d does not match system size %d" % (rhs.size, n))

    if not system.cyclic:
        x = _gtsv(system.lower.copy(), system.diag.copy(), system.upper.copy(), rhs.copy())
    else:
        # Sherman-Morrison: write A = T + u v^T with u = (gamma, 0, .., beta')
        # choices folding the two corner entries into the last/first diagonal.
        alpha = system.lower[0]   # A[0, n-1]
        beta = system.upper[-1]   # A[n-1, 0]
        gamma = -system.diag[0]
        u = np.zeros(n)
        v = np.zeros(n)
        u[0] = gamma
        u[-1] = beta
        v[0] = 1.0
        v[-1] = alpha / gamma
        d = system.diag.copy()
        d[0] -= gamma
        d[-1] -= alpha * beta / gamma
        two = np.column_stack([rhs, u])
        sol = _gtsv(system.lower[1:].copy(), d, system.upper[:-1].copy(), two)
        y, q = sol[:, 0], sol[:, 1]
        denom = 1.0 + v @ q
        if denom == 0.0:
            raise TridiagonalSolveError("cyclic reduction produced a singular correction")
        x = y - q * ((v @ y) / denom)

    res = np.max(np.abs(system.matvec(x) - rhs))
    scale = max(np.max(np.abs(rhs)), np.max(np.abs(x)) * np.max(np.abs(system.diag)), 1e-300)
    if res > 1e-10 * scale:
        raise TridiagonalSolveError(
            "verified residual %.3e exceeds tolerance %.3e" % (res, 1e-10 * scale)
        )
    return x
