"""High-order proximal-point iteration with stopping rule and certificates.

Each step maps x to the best prox candidate at x.  The run keeps phi and
envelope values nonincreasing (the inner solve always keeps y = x as a
fallback), stops when the step norm falls below eps, and reports an
a-priori iteration bound plus a criticality certificate for the returned
point.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import Array, Objective, ProxConfig, Trace, as_point
from .envelope import UnboundedEnvelopeError, eval_hope, reg_objective


@dataclass(frozen=True)
class HippaResult:
    """Outcome of a proximal-point run.

    stop_reason is one of "step_tol", "budget", "wallclock".  iter_bound
    is the a-priori iteration bound (None when the minimal value is
    unknown).  criticality is (1/gamma) * ||last step||^(p-1), an upper
    bound on the distance from 0 to the subdifferential at x_final.
    """

    trace: Trace
    x_final: Array
    stop_reason: str
    iter_bound: Optional[float]
    criticality: float


def iteration_bound(p: float, gamma: float, f0: float, fstar: float, eps: float) -> float:
    """A-priori bound p * gamma * (f0 - fstar) / eps^p on the iteration count."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if f0 < fstar:
        raise ValueError("f0 must be >= fstar")
    return p * gamma * (f0 - fstar) / eps ** p


def criticality_bound(eps: float, cfg: ProxConfig) -> float:
    """Guaranteed bound eps^(p-1) / gamma on the final subgradient norm."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    return eps ** (cfg.p - 1.0) / cfg.gamma


def run_hippa(
    phi: Objective,
    x0,
    cfg: ProxConfig,
    eps: float,
    max_iter: int,
    max_evals: Optional[int] = None,
    wallclock: Optional[float] = None,
) -> HippaResult:
    """Iterate x <- prox(x) until the step norm is <= eps or a budget ends.

    Records a full trace (envelope estimates are aligned with the
    iterates at which a prox solve ran).  Raises UnboundedEnvelopeError
    if an inner solve certifies the envelope is -inf at the current
    gamma.  max_evals bounds total oracle calls; wallclock (seconds)
    optionally bounds elapsed time.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    x = as_point(x0)
    t_start = time.perf_counter()
    fx = phi.value(x)
    if not math.isfinite(fx):
        raise ValueError("phi(x0) must be finite")
    evals = 1

    iterates = [x.copy()]
    f_values = [fx]
    env_values: list[float] = []
    step_norms: list[float] = []
    eval_counts = [evals]

    stop_reason = "budget"
    retried = False
    for _ in range(max_iter):
        if wallclock is not None and time.perf_counter() - t_start > wallclock:
            stop_reason = "wallclock"
            break
        step_cfg = cfg
        if max_evals is not None:
            remaining = max_evals - evals - 1  # reserve the f(x_next) refetch
            if remaining < cfg.n_starts * (phi.dim + 2) + 1:
                stop_reason = "budget"
                break
            step_cfg = replace(cfg, inner_budget=min(cfg.inner_budget, remaining))

        sol = eval_hope(phi, x, step_cfg)
        evals += sol.evals
        if sol.env_value == -math.inf:
            raise UnboundedEnvelopeError(
                f"envelope of {phi.name} is -inf at gamma={cfg.gamma}: "
                "function is not prox-bounded at this parameter"
            )
        # inexact-prox safeguard: never accept an ascent step
        if sol.env_value > fx and not retried:
            retried = True
            wide = replace(step_cfg, n_starts=2 * cfg.n_starts)
            sol = eval_hope(phi, x, wide)
            evals += sol.evals
        if sol.env_value > fx:
            stop_reason = "budget"
            break

        x_next = sol.y
        step = float(np.linalg.norm(x - x_next))
        f_next = phi.value(x_next)
        evals += 1

        env_values.append(sol.env_value)
        step_norms.append(step)
        iterates.append(x_next.copy())
        f_values.append(f_next)
        eval_counts.append(evals)

        x, fx = x_next, f_next
        if step <= eps:
            stop_reason = "step_tol"
            break

    trace = Trace(
        iterates=iterates,
        f_values=f_values,
        env_values=env_values,
        step_norms=step_norms,
        eval_counts=eval_counts,
        elapsed=time.perf_counter() - t_start,
        status=stop_reason,
    )
    criticality = (
        step_norms[-1] ** (cfg.p - 1.0) / cfg.gamma if step_norms else math.inf
    )
    bound = None
    if phi.fmin is not None:
        bound = iteration_bound(cfg.p, cfg.gamma, f_values[0], phi.fmin, eps)
    return HippaResult(
        trace=trace,
        x_final=x.copy(),
        stop_reason=stop_reason,
        iter_bound=bound,
        criticality=criticality,
    )
