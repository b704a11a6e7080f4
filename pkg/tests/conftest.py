"""Shared fixtures and independent oracle helpers for the test suite.

The oracles here deliberately avoid the library's own code paths: prox maps
are checked against brute-force 1-D grid minimization, gradients against
central finite differences, and spectral norms against a dense SVD.
"""

import numpy as np
import pytest

from extraprox.problems import L1LeastSquares


def grid_prox_scalar(x, a, lo=None, hi=None, step=1e-6):
    """Brute-force argmin_v { a|v| + 0.5 (v - x)^2 } on a 1-D grid."""
    if lo is None:
        lo = min(0.0, x) - 1.0
    if hi is None:
        hi = max(0.0, x) + 1.0
    grid = np.arange(lo, hi + step, step)
    vals = a * np.abs(grid) + 0.5 * (grid - x) ** 2
    return grid[np.argmin(vals)]


def central_diff_gradient(fun, x, h=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return out


def svd_lipschitz(A):
    """Dense SVD oracle for the gradient Lipschitz constant of 0.5||Ax-b||^2."""
    return float(np.linalg.svd(np.asarray(A, float), compute_uv=False)[0] ** 2)


@pytest.fixture
def lasso_1d():
    """The analytic workhorse: 0.5 (x - 1)^2 + 0.1 |x|, optimum (0.9, 0.095)."""
    return L1LeastSquares(A=np.array([[1.0]]), b=np.array([1.0]), lam=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
