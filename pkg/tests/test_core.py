import math

import numpy as np
import pytest

from highprox import Objective, ProxConfig, Trace, get_objective
from highprox.core import OBJECTIVES, as_point, sign

from conftest import central_diff


def test_ncr1_values(ncr1):
    assert ncr1((1.0, 1.0)) == 0.0
    assert ncr1((-1.0, 1.0)) == 1.0
    assert ncr1((0.0, 0.0)) == 1.25


def test_ncr2_values(ncr2):
    assert ncr2((1.0, 1.0)) == 0.0
    assert ncr2((0.0, -1.0)) == 0.25
    assert ncr2((-1.0, 1.0)) == 0.5
    assert ncr2.metadata["clarke_critical"] == (0.0, -1.0)


def test_quartic_values(quartic):
    assert quartic(0.0) == 0.0
    assert quartic(1.0) == 0.0
    assert quartic(1.0 / math.sqrt(2.0)) == pytest.approx(-0.25, abs=1e-15)


def test_small_fixture_values(abs_shift, notcalm, negexp):
    assert abs_shift(2.0) == 0.0
    assert notcalm(0.0) == 0.0
    assert notcalm(0.5) == -0.5
    assert notcalm(1.5) == -0.5
    assert negexp(0.0) == -1.0


def test_negexp_overflow_is_neg_inf(negexp):
    assert negexp(40.0) == -math.inf


def test_known_minimizer_consistency():
    for name in OBJECTIVES:
        phi = get_objective(name)
        if phi.xstar is not None and phi.fmin is not None:
            assert abs(phi.value(phi.xstar) - phi.fmin) <= 1e-12


def test_evaluations_are_pure():
    rng = np.random.default_rng(3)
    for name in OBJECTIVES:
        phi = get_objective(name)
        for _ in range(20):
            x = rng.uniform(-3, 3, phi.dim)
            assert phi.value(x) == phi.value(x.copy())


KINK_CLEARANCE = 1e-3


def _away_from_kinks(name: str, x: np.ndarray) -> bool:
    if name == "ncr1":
        return abs(x[1] - 2 * x[0] ** 2 + 1) > KINK_CLEARANCE
    if name == "ncr2":
        return (abs(x[1] - 2 * abs(x[0]) + 1) > KINK_CLEARANCE
                and abs(x[0]) > KINK_CLEARANCE
                and abs(x[0] - 1) > KINK_CLEARANCE)
    if name == "abs_shift":
        return abs(x[0] - 2) > KINK_CLEARANCE
    if name == "notcalm":
        return abs(x[0]) > KINK_CLEARANCE and abs(abs(x[0]) - 1) > KINK_CLEARANCE
    return True


@pytest.mark.parametrize("name", sorted(OBJECTIVES))
def test_subgrad_matches_finite_differences(name):
    phi = get_objective(name)
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 1000:
        x = rng.uniform(-2.5, 2.5, phi.dim)
        if not _away_from_kinks(name, x):
            continue
        fd = central_diff(phi.value, x)
        sg = phi.subgrad(x)
        assert np.linalg.norm(fd - sg) <= 1e-6 * max(1.0, np.linalg.norm(sg)), (
            f"{name} at {x}: fd={fd} sg={sg}"
        )
        checked += 1


def test_sign_convention():
    assert sign(0.0) == 0.0
    assert sign(3.0) == 1.0
    assert sign(-0.5) == -1.0


def test_as_point_coercion():
    assert as_point(2.0).shape == (1,)
    assert as_point([1, 2]).dtype == float
    with pytest.raises(ValueError):
        as_point([[1, 2], [3, 4]])


def test_objective_validation():
    with pytest.raises(ValueError):
        Objective("bad", 0, lambda x: 0.0)
    with pytest.raises(ValueError):
        Objective("bad", 1, lambda x: 1.0, fmin=0.0, xstar=(0.0,))


def test_prox_config_validation():
    with pytest.raises(ValueError):
        ProxConfig(p=1.0)
    with pytest.raises(ValueError):
        ProxConfig(gamma=0.0)
    with pytest.raises(ValueError):
        ProxConfig(inner_budget=0)
    with pytest.raises(ValueError):
        ProxConfig(n_starts=0)
    with pytest.raises(ValueError):
        ProxConfig(cluster_radius=0.0)


def test_trace_validation():
    tr = Trace(iterates=[np.zeros(1), np.ones(1)], f_values=[1.0, 0.5],
               env_values=[0.8], step_norms=[1.0], eval_counts=[1, 5])
    tr.validate()
    bad = Trace(iterates=[np.zeros(1)], f_values=[1.0], env_values=None,
                step_norms=[1.0], eval_counts=[1])
    with pytest.raises(ValueError):
        bad.validate()


def test_unknown_objective_id():
    with pytest.raises(KeyError):
        get_objective("nope")
