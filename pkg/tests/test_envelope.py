import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from highprox import ProxConfig, eval_home, eval_hope, multiplicity
from highprox.envelope import home_gradient, power_map, prox_from_gradient, reg_objective

from conftest import grid_min_reg, huber_envelope

QUARTIC_PROX_ROOT = (-1.0 + math.sqrt(33.0)) / 8.0  # positive root of 4y^2 + y - 2


def test_reg_objective_values(abs_shift, quartic):
    cfg = ProxConfig(p=2.0, gamma=1.0)
    assert reg_objective(abs_shift, 2.0, 2.0, cfg) == 0.0
    assert reg_objective(abs_shift, 4.0, 3.0, cfg) == 1.5
    cfg3 = ProxConfig(p=3.0, gamma=1.0)
    expected = (0.5 ** 4 - 0.25) + 0.125 / 3.0
    assert reg_objective(quartic, 0.0, 0.5, cfg3) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(-0.14583333333333334, abs=1e-12)


def test_reg_objective_dim_mismatch(ncr1):
    cfg = ProxConfig()
    with pytest.raises(ValueError):
        reg_objective(ncr1, (1.0,), (1.0, 1.0), cfg)


def test_reg_objective_propagates_inf():
    from highprox import Objective

    ind = Objective("wall", 1, lambda x: 0.0 if x[0] >= 0 else math.inf)
    cfg = ProxConfig()
    assert reg_objective(ind, 0.0, -1.0, cfg) == math.inf


def test_hope_at_minimizer(abs_shift, cfg_1d):
    sol = eval_hope(abs_shift, 2.0, cfg_1d)
    assert sol.y[0] == 2.0
    assert sol.env_value == 0.0
    assert sol.residual == 0.0
    assert sol.status == "converged"


def test_hope_soft_threshold(abs_shift, cfg_1d):
    sol = eval_hope(abs_shift, 4.0, cfg_1d)
    y_star, v_star = grid_min_reg(abs_shift, 4.0, 2.0, 1.0, 0.0, 6.0)
    assert abs(y_star - 3.0) <= 1e-4
    assert abs(sol.y[0] - 3.0) <= 1e-6
    assert abs(sol.env_value - 1.5) <= 1e-10
    assert abs(sol.env_value - v_star) <= 1e-8


def test_hope_env_value_consistent(abs_shift, cfg_1d):
    sol = eval_hope(abs_shift, 3.3, cfg_1d)
    recomputed = reg_objective(abs_shift, 3.3, sol.y, cfg_1d)
    assert sol.env_value == pytest.approx(recomputed, rel=1e-12)
    # best candidate comes first
    assert all(sol.env_value <= c.reg_value + 1e-15 for c in sol.candidates)


def test_quartic_two_prox_solutions(quartic):
    cfg = ProxConfig(p=3.0, gamma=1.0, n_starts=8, inner_tol=1e-11,
                     inner_budget=2400, seed=0)
    sol = eval_hope(quartic, 0.0, cfg)
    assert multiplicity(sol) >= 2
    tied = [c for c in sol.candidates if c.reg_value <= sol.env_value + 1e-8]
    ys = sorted(c.y[0] for c in tied)
    assert ys[0] == pytest.approx(-QUARTIC_PROX_ROOT, abs=1e-4)
    assert ys[-1] == pytest.approx(QUARTIC_PROX_ROOT, abs=1e-4)
    # grid oracle confirms the positive root location
    y_star, _ = grid_min_reg(quartic, 0.0, 3.0, 1.0, 0.0, 1.5)
    assert abs(y_star - QUARTIC_PROX_ROOT) <= 1e-4


def test_home_values_match_huber(abs_shift, cfg_1d):
    assert eval_home(abs_shift, 2.0, cfg_1d) == 0.0
    assert eval_home(abs_shift, 2.5, cfg_1d) == pytest.approx(0.125, abs=1e-9)
    for x in (0.0, 1.3, 2.2, 3.7):
        assert eval_home(abs_shift, x, cfg_1d) == pytest.approx(
            huber_envelope(x, 1.0), abs=1e-8
        )


def test_home_majorization_and_gamma_monotonicity(abs_shift):
    cfg1 = ProxConfig(p=2.0, gamma=1.0, n_starts=3, inner_tol=1e-12, inner_budget=900)
    cfg04 = ProxConfig(p=2.0, gamma=0.4, n_starts=3, inner_tol=1e-12, inner_budget=900)
    for x in np.linspace(-1.0, 5.0, 25):
        e1 = eval_home(abs_shift, x, cfg1)
        e04 = eval_home(abs_shift, x, cfg04)
        fx = abs_shift.value(np.array([x]))
        assert e1 <= fx + 1e-12
        assert e04 <= fx + 1e-12
        assert e04 >= e1 - 1e-8  # smaller gamma, tighter envelope


def test_home_gradient_formula():
    cfg = ProxConfig(p=2.0, gamma=1.0)
    assert np.allclose(home_gradient(4.0, 3.0, cfg), [1.0])
    cfg32 = ProxConfig(p=3.0, gamma=2.0)
    g = home_gradient((2.0, 0.0), (0.0, 0.0), cfg32)
    assert np.allclose(g, [2.0, 0.0])
    for p in (1.5, 2.0, 3.0):
        cfgp = ProxConfig(p=p, gamma=1.0)
        assert np.array_equal(home_gradient((1.0, 2.0), (1.0, 2.0), cfgp), [0.0, 0.0])


def test_power_map_zero_convention():
    assert np.array_equal(power_map(np.zeros(3), 1.5), np.zeros(3))
    assert np.allclose(power_map(np.array([2.0, 0.0]), 3.0), [4.0, 0.0])


def test_prox_from_gradient_basics():
    cfg = ProxConfig(p=2.0, gamma=0.7)
    x = np.array([1.0, -2.0])
    assert np.array_equal(prox_from_gradient(x, np.zeros(2), cfg), x)
    g = np.array([0.5, 0.25])
    assert np.allclose(prox_from_gradient(x, g, cfg), x - 0.7 * g)


@settings(max_examples=150, deadline=None)
@given(
    p=st.floats(1.1, 4.0),
    gamma=st.floats(0.05, 20.0),
    x=st.lists(st.floats(-50, 50), min_size=2, max_size=2),
    y=st.lists(st.floats(-50, 50), min_size=2, max_size=2),
)
def test_round_trip_prox_gradient(p, gamma, x, y):
    cfg = ProxConfig(p=p, gamma=gamma)
    x = np.asarray(x)
    y = np.asarray(y)
    g = home_gradient(x, y, cfg)
    back = prox_from_gradient(x, g, cfg)
    assert np.linalg.norm(back - y) <= 1e-10 * (1.0 + np.linalg.norm(y))


def test_gradient_matches_finite_differences_single_cluster(abs_shift):
    cfg = ProxConfig(p=2.0, gamma=1.0, n_starts=3, inner_tol=1e-12, inner_budget=900)
    for x in (1.4, 2.3, 2.9):
        sol = eval_hope(abs_shift, x, cfg)
        assert multiplicity(sol) == 1
        h = 1e-5
        fd = (eval_home(abs_shift, x + h, cfg) - eval_home(abs_shift, x - h, cfg)) / (2 * h)
        assert abs(sol.grad[0] - fd) <= max(1e-4, 10 * cfg.inner_tol)


def test_unbounded_sentinel(negexp):
    for gamma in (0.1, 1.0, 10.0):
        cfg = ProxConfig(p=2.0, gamma=gamma, n_starts=3, inner_budget=600,
                         inner_tol=1e-8)
        sol = eval_hope(negexp, 0.0, cfg)
        assert sol.env_value == -math.inf
        assert sol.status == "unbounded"


def test_deterministic_given_seed(ncr1):
    cfg = ProxConfig(p=2.5, gamma=50.0, n_starts=5, seed=42, inner_budget=2000)
    s1 = eval_hope(ncr1, (-1.0, 1.0), cfg)
    s2 = eval_hope(ncr1, (-1.0, 1.0), cfg)
    assert np.array_equal(s1.y, s2.y)
    assert s1.env_value == s2.env_value
    assert s1.evals == s2.evals
