"""High-order Moreau envelope and proximal operator evaluation.

The envelope of phi at x with order p and parameter gamma is
inf_y phi(y) + ||x - y||^p / (p * gamma); the prox is the argmin set.
Both are estimated by multi-start Nelder-Mead on the regularized
objective, with the query point itself always included as a start so the
envelope estimate never exceeds phi(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Array, Candidate, Objective, ProxConfig, ProxSolution, as_point
from .nelder_mead import nelder_mead

#: Candidates whose regularized value is within this of the best count as
#: alternative global solutions (multiplicity detection).
VALUE_TOL = 1e-8


class UnboundedEnvelopeError(RuntimeError):
    """Raised when the envelope is -inf (not prox-bounded at this gamma)."""


@dataclass(frozen=True)
class RegularizedPoint:
    """A trial point y for the prox subproblem at base point x."""

    x: Array
    y: Array
    p: float
    gamma: float
    reg_value: float


def reg_objective(phi: Objective, x, y, cfg: ProxConfig) -> float:
    """phi(y) + ||x - y||^p / (p * gamma); +inf propagates."""
    x = as_point(x)
    y = as_point(y)
    if x.size != phi.dim or y.size != phi.dim:
        raise ValueError(f"dimension mismatch: expected {phi.dim}")
    d = float(np.linalg.norm(x - y))
    return phi.value(y) + d ** cfg.p / (cfg.p * cfg.gamma)


def power_map(v: Array, p: float) -> Array:
    """Gradient of ||.||^p / p: ||v||^(p-2) v, with 0/0 = 0 at v = 0."""
    n = float(np.linalg.norm(v))
    if n == 0.0:
        return np.zeros_like(v)
    return n ** (p - 2.0) * v


def home_gradient(x, y, cfg: ProxConfig) -> Array:
    """Envelope gradient (1/gamma) ||x - y||^(p-2) (x - y) for y = prox(x)."""
    x = as_point(x)
    y = as_point(y)
    return power_map(x - y, cfg.p) / cfg.gamma


def prox_from_gradient(x, g, cfg: ProxConfig) -> Array:
    """Invert the gradient formula: recover prox(x) from the envelope gradient.

    x - gamma^(1/(p-1)) ||g||^((2-p)/(p-1)) g; returns x when g = 0.
    """
    x = as_point(x)
    g = as_point(g)
    gn = float(np.linalg.norm(g))
    if gn == 0.0:
        return x.copy()
    p = cfg.p
    return x - cfg.gamma ** (1.0 / (p - 1.0)) * gn ** ((2.0 - p) / (p - 1.0)) * g


def _perturbed_starts(x: Array, cfg: ProxConfig) -> list[Array]:
    """x itself plus antithetic random offsets x +/- r*u.

    Radii are log-uniform in [1e-3, 1] scaled by 1 + ||x||; antithetic
    pairs guarantee symmetric coverage around x.
    """
    starts = [x]
    n_extra = cfg.n_starts - 1
    if n_extra <= 0:
        return starts
    rng = np.random.default_rng(cfg.seed)
    scale = 1.0 + float(np.linalg.norm(x))
    n_pairs = (n_extra + 1) // 2
    for _ in range(n_pairs):
        u = rng.standard_normal(x.size)
        nu = float(np.linalg.norm(u))
        u = u / nu if nu > 0 else np.ones_like(u) / math.sqrt(x.size)
        r = 10.0 ** rng.uniform(-3.0, 0.0) * scale
        starts.append(x + r * u)
        starts.append(x - r * u)
    return starts[: cfg.n_starts]


def _escape_probe(f, x: Array, floor: float) -> Optional[Array]:
    """Cheap unboundedness scan along coordinate rays.

    Evaluates the regularized objective on a geometric radius ladder; a
    value at or below the floor certifies unboundedness (None is never
    returned in that case, the caller sees the floor through f's
    bookkeeping).  Otherwise returns the best ladder point when it
    undercuts the value at x, as an extra descent start; local
    multi-starts alone cannot see a cliff hidden behind a ridge.
    """
    dim = x.size
    scale = 1.0 + float(np.linalg.norm(x))
    best_val = math.inf
    best_pt = None
    for j in range(12):
        r = 2.0 ** j * scale
        for i in range(dim):
            for s in (1.0, -1.0):
                pt = x.copy()
                pt[i] += s * r
                v = f(pt)
                if v < best_val:
                    best_val, best_pt = v, pt
                if v <= floor:
                    return pt
    return best_pt


def _cluster(points: list[Array], values: list[float], radius: float) -> list[Candidate]:
    """Single-linkage clustering; representatives sorted by (value, lex)."""
    n = len(points)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(points[i] - points[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    reps = []
    for members in groups.values():
        best = min(members, key=lambda i: (values[i], tuple(points[i])))
        reps.append(Candidate(points[best].copy(), values[best]))
    reps.sort(key=lambda c: (c.reg_value, tuple(c.y)))
    return reps


def eval_hope(phi: Objective, x, cfg: ProxConfig) -> ProxSolution:
    """Estimate the prox set of phi at x.

    Runs cfg.n_starts inner solves of the regularized objective from
    perturbed starts, clusters the results by cfg.cluster_radius, and
    returns the best candidate plus the full multiplicity report.  The
    raw point y = x is always kept as a fallback candidate, so
    env_value <= phi(x).  If any inner iterate drives the regularized
    objective below cfg.value_floor, the envelope is reported as -inf
    with status "unbounded".
    """
    x = as_point(x)
    if x.size != phi.dim:
        raise ValueError(f"dimension mismatch: expected {phi.dim}")

    evals = 0

    def f(y: Array) -> float:
        nonlocal evals
        evals += 1
        d = float(np.linalg.norm(x - y))
        return phi.value(y) + d ** cfg.p / (cfg.p * cfg.gamma)

    fx = f(x)
    points = [x.copy()]
    values = [fx]

    starts = _perturbed_starts(x, cfg)
    escape = _escape_probe(f, x, cfg.value_floor)
    if escape is not None:
        esc_val = reg_objective(phi, x, escape, cfg)
        if esc_val <= cfg.value_floor:
            return ProxSolution(
                y=escape, env_value=-math.inf,
                residual=float(np.linalg.norm(x - escape)),
                grad=np.full(phi.dim, np.nan), candidates=(), status="unbounded",
                evals=evals,
            )
        if esc_val < fx:
            starts.append(escape)
    per_start = max(phi.dim + 2, cfg.inner_budget // len(starts))
    any_converged = False
    for s in starts:
        res = nelder_mead(
            f, s, tol=cfg.inner_tol, budget=per_start,
            scale=cfg.start_scale, floor=cfg.value_floor,
        )
        if res.status == "floor":
            return ProxSolution(
                y=res.x, env_value=-math.inf, residual=float(np.linalg.norm(x - res.x)),
                grad=np.full(phi.dim, np.nan), candidates=(), status="unbounded",
                evals=evals,
            )
        if res.status == "converged":
            any_converged = True
        points.append(res.x)
        values.append(res.fx)

    reps = _cluster(points, values, cfg.cluster_radius)
    best = reps[0]
    y = best.y
    if any_converged or bool(np.array_equal(y, x)):
        status = "converged"
    else:
        status = "budget_exhausted"
    return ProxSolution(
        y=y,
        env_value=best.reg_value,
        residual=float(np.linalg.norm(x - y)),
        grad=home_gradient(x, y, cfg),
        candidates=tuple(reps),
        status=status,
        evals=evals,
    )


def eval_home(phi: Objective, x, cfg: ProxConfig) -> float:
    """Envelope value at x (convenience wrapper around eval_hope)."""
    return eval_hope(phi, x, cfg).env_value


def multiplicity(sol: ProxSolution, value_tol: float = VALUE_TOL) -> int:
    """Number of distinct clusters tied (within value_tol) for the minimum."""
    if not sol.candidates:
        return 0
    best = sol.candidates[0].reg_value
    return sum(1 for c in sol.candidates if c.reg_value <= best + value_tol)
