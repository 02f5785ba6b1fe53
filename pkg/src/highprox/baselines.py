"""Comparison solvers: subgradient methods and direct Nelder-Mead.

All baselines share the same oracle accounting as the prox-point runs so
evaluation-budgeted comparisons are fair: every value and subgradient
call counts one unit.
"""

from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from .core import Objective, Trace, as_point
from .nelder_mead import nelder_mead


def _require_subgrad(phi: Objective) -> None:
    if phi.subgrad is None:
        raise ValueError(f"objective {phi.name!r} has no subgradient oracle")


def run_sg_dss(
    phi: Objective,
    x0,
    alpha: float,
    max_iter: int,
    max_evals: Optional[int] = None,
    deadline: Optional[float] = None,
) -> Trace:
    """Subgradient method with diminishing steps alpha / sqrt(k), k = 1, 2, ...

    Unnormalized steps; stops early if a zero subgradient is met.
    """
    _require_subgrad(phi)
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    x = as_point(x0)
    t0 = time.perf_counter()
    evals = 1
    iterates = [x.copy()]
    f_values = [phi.value(x)]
    step_norms: list[float] = []
    eval_counts = [evals]
    status = "budget_exhausted"

    for k in range(1, max_iter + 1):
        if max_evals is not None and evals + 2 > max_evals:
            break
        if deadline is not None and time.perf_counter() - t0 > deadline:
            break
        z = phi.subgrad(x)
        evals += 1
        if float(np.linalg.norm(z)) == 0.0:
            status = "converged"
            break
        x = x - (alpha / math.sqrt(k)) * z
        evals += 1
        iterates.append(x.copy())
        f_values.append(phi.value(x))
        step_norms.append(float(np.linalg.norm(iterates[-1] - iterates[-2])))
        eval_counts.append(evals)

    return Trace(iterates, f_values, None, step_norms, eval_counts,
                 elapsed=time.perf_counter() - t0, status=status)


def run_sg_gss(
    phi: Objective,
    x0,
    rho: float,
    max_iter: int,
    max_evals: Optional[int] = None,
    deadline: Optional[float] = None,
) -> Trace:
    """Normalized subgradient method with geometric steps rho^k, k = 0, 1, ...

    Steps have norm exactly rho^k whenever the subgradient is nonzero;
    the total path length is bounded by 1 / (1 - rho).
    """
    _require_subgrad(phi)
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must be in (0, 1)")
    x = as_point(x0)
    t0 = time.perf_counter()
    evals = 1
    iterates = [x.copy()]
    f_values = [phi.value(x)]
    step_norms: list[float] = []
    eval_counts = [evals]
    status = "budget_exhausted"

    for k in range(max_iter):
        if max_evals is not None and evals + 2 > max_evals:
            break
        if deadline is not None and time.perf_counter() - t0 > deadline:
            break
        z = phi.subgrad(x)
        evals += 1
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            status = "converged"
            break
        x = x - (rho ** k / nz) * z
        evals += 1
        iterates.append(x.copy())
        f_values.append(phi.value(x))
        step_norms.append(float(np.linalg.norm(iterates[-1] - iterates[-2])))
        eval_counts.append(evals)

    return Trace(iterates, f_values, None, step_norms, eval_counts,
                 elapsed=time.perf_counter() - t0, status=status)


def run_nm_direct(
    phi: Objective, x0, tol: float, budget: int, deadline: Optional[float] = None
) -> Trace:
    """Nelder-Mead applied to phi itself, tracing the best-vertex history."""
    x0 = as_point(x0)
    t0 = time.perf_counter()
    iterates: list[np.ndarray] = []
    f_values: list[float] = []
    eval_counts: list[int] = []

    def record(state) -> None:
        best_x, best_f = state.vertices[0], float(state.values[0])
        if not iterates or not np.array_equal(best_x, iterates[-1]):
            iterates.append(best_x.copy())
            f_values.append(best_f)
            eval_counts.append(state.evals)

    res = nelder_mead(phi.value, x0, tol=tol, budget=budget, callback=record,
                      deadline=deadline)
    if not iterates or not np.array_equal(res.x, iterates[-1]):
        iterates.append(res.x.copy())
        f_values.append(res.fx)
        eval_counts.append(res.evals)
    step_norms = [
        float(np.linalg.norm(iterates[i + 1] - iterates[i]))
        for i in range(len(iterates) - 1)
    ]
    return Trace(iterates, f_values, None, step_norms, eval_counts,
                 elapsed=time.perf_counter() - t0, status=res.status)
