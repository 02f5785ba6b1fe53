"""Nelder-Mead simplex minimizer with strict evaluation accounting.

Coefficients are the standard reflection/expansion/contraction/shrink
values 1, 2, 0.5, 0.5.  Vertex ordering breaks value ties
lexicographically on coordinates so runs are reproducible across
platforms.  Every oracle call is counted exactly once and the reported
count never exceeds the budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Array, as_point

REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5


@dataclass
class SimplexState:
    """Current simplex: dim+1 vertices with values sorted ascending."""

    vertices: Array  # (dim+1, dim)
    values: Array  # (dim+1,)
    diameter: float
    evals: int


@dataclass(frozen=True)
class NMResult:
    x: Array
    fx: float
    status: str  # converged | budget_exhausted | floor
    evals: int


def initial_simplex(x0, scale: float) -> SimplexState:
    """Axis-aligned start simplex: vertex i offsets x0 along e_i.

    Edge lengths are scale * max(1, |x0_i|) so the simplex does not
    degenerate at the origin.  Values are not yet evaluated (NaN).
    """
    if not scale > 0:
        raise ValueError("scale must be > 0")
    x0 = as_point(x0)
    dim = x0.size
    vertices = np.tile(x0, (dim + 1, 1))
    for i in range(dim):
        vertices[i + 1, i] += scale * max(1.0, abs(x0[i]))
    values = np.full(dim + 1, np.nan)
    return SimplexState(vertices, values, _diameter(vertices), 0)


def _diameter(vertices: Array) -> float:
    diff = vertices[:, None, :] - vertices[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2)).max())


def _order(state: SimplexState) -> None:
    # primary key: value; ties: lexicographic on coordinates
    dim = state.vertices.shape[1]
    keys = tuple(state.vertices[:, j] for j in reversed(range(dim))) + (state.values,)
    idx = np.lexsort(keys)
    state.vertices = state.vertices[idx]
    state.values = state.values[idx]


def nelder_mead(
    f: Callable[[Array], float],
    x0,
    tol: float,
    budget: int,
    scale: float = 0.05,
    floor: Optional[float] = None,
    callback: Optional[Callable[[SimplexState], None]] = None,
    deadline: Optional[float] = None,
) -> NMResult:
    """Minimize f from x0; stop on simplex collapse, exhausted budget, or
    (optionally) a value at or below floor.

    Termination: diameter <= tol and value spread <= tol * (1 + |best|)
    (both, so exact value ties across a wide simplex do not end the run),
    or the evaluation budget is reached.  deadline, when given, is a
    wall-clock limit in seconds.  Returns the best vertex.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    x0 = as_point(x0)
    dim = x0.size
    if budget < dim + 2:
        raise ValueError(f"budget must be >= dim + 2 = {dim + 2}")

    t0 = time.monotonic()
    state = initial_simplex(x0, scale)
    evals = 0

    def spend(x: Array) -> float:
        nonlocal evals
        evals += 1
        return f(x)

    for i in range(dim + 1):
        state.values[i] = spend(state.vertices[i])
    _order(state)

    status = "budget_exhausted"
    while True:
        state.diameter = _diameter(state.vertices)
        state.evals = evals
        if callback is not None:
            callback(state)
        best = state.values[0]
        if floor is not None and best <= floor:
            status = "floor"
            break
        spread = state.values[-1] - best
        if state.diameter <= tol and spread <= tol * (1.0 + abs(best)):
            status = "converged"
            break
        if evals + 1 > budget:
            break
        if deadline is not None and time.monotonic() - t0 > deadline:
            break

        centroid = state.vertices[:-1].mean(axis=0)
        worst = state.vertices[-1]
        xr = centroid + REFLECT * (centroid - worst)
        fr = spend(xr)

        if state.values[0] <= fr < state.values[-2]:
            state.vertices[-1], state.values[-1] = xr, fr
        elif fr < state.values[0]:
            if evals + 1 <= budget:
                xe = centroid + EXPAND * (xr - centroid)
                fe = spend(xe)
                if fe < fr:
                    state.vertices[-1], state.values[-1] = xe, fe
                else:
                    state.vertices[-1], state.values[-1] = xr, fr
            else:
                state.vertices[-1], state.values[-1] = xr, fr
        else:
            # contraction; fall back to shrink if it fails
            if evals + 1 > budget:
                break
            if fr < state.values[-1]:
                xc = centroid + CONTRACT * (xr - centroid)
                fc = spend(xc)
                accept = fc <= fr
            else:
                xc = centroid - CONTRACT * (centroid - worst)
                fc = spend(xc)
                accept = fc < state.values[-1]
            if accept:
                state.vertices[-1], state.values[-1] = xc, fc
            else:
                if evals + dim > budget:
                    break
                for i in range(1, dim + 1):
                    state.vertices[i] = state.vertices[0] + SHRINK * (
                        state.vertices[i] - state.vertices[0]
                    )
                    state.values[i] = spend(state.vertices[i])
        _order(state)

    _order(state)
    return NMResult(state.vertices[0].copy(), float(state.values[0]), status, evals)
