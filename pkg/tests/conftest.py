"""Shared test fixtures and independent oracles.

The oracles here (dense grid minimization, closed-form Huber envelope,
central finite differences) deliberately avoid the solver code paths
they are used to check.
"""

from __future__ import annotations

import numpy as np
import pytest

from highprox import (
    ProxConfig,
    make_abs_shift,
    make_ncr1,
    make_ncr2,
    make_negexp,
    make_notcalm,
    make_quartic,
)


def grid_min_reg(phi, x: float, p: float, gamma: float, lo: float, hi: float,
                 step: float = 1e-4):
    """Dense 1-D grid minimization of the regularized objective.

    Independent oracle: evaluates phi(y) + |x - y|^p / (p gamma) on a
    uniform grid and returns (argmin, min).
    """
    ys = np.arange(lo, hi + step, step)
    vals = np.array([phi.value(np.array([y])) + abs(x - y) ** p / (p * gamma)
                     for y in ys])
    i = int(np.argmin(vals))
    return float(ys[i]), float(vals[i])


def huber_envelope(x: float, gamma: float, center: float = 2.0) -> float:
    """Closed-form envelope of |x - center| with quadratic regularization."""
    d = abs(x - center)
    if d <= gamma:
        return d * d / (2.0 * gamma)
    return d - gamma / 2.0


def central_diff(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        hi_ = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = hi_
        g[i] = (f(x + e) - f(x - e)) / (2.0 * hi_)
    return g


@pytest.fixture(scope="session")
def ncr1():
    return make_ncr1()


@pytest.fixture(scope="session")
def ncr2():
    return make_ncr2()


@pytest.fixture(scope="session")
def quartic():
    return make_quartic()


@pytest.fixture(scope="session")
def abs_shift():
    return make_abs_shift()


@pytest.fixture(scope="session")
def notcalm():
    return make_notcalm()


@pytest.fixture(scope="session")
def negexp():
    return make_negexp()


@pytest.fixture
def cfg_1d():
    """Light inner-solver settings for quick 1-D envelope checks."""
    return ProxConfig(p=2.0, gamma=1.0, n_starts=3, inner_tol=1e-12,
                      inner_budget=900, seed=0)
