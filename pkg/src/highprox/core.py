"""Domain types and the built-in catalog of nonsmooth test objectives.

All objectives are plain value oracles over R^n (float64 vectors) with an
optional subgradient-element oracle.  Where the function has kinks, the
subgradient selection uses the sign(0) = 0 convention, so repeated calls
are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

#: Extended-real sentinel used for indicator-style objectives.
INF = math.inf


def as_point(x) -> Array:
    """Coerce a scalar or sequence to a 1-D float64 vector."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"point must be 1-D, got shape {arr.shape}")
    return arr


def sign(t: float) -> float:
    """Sign with sign(0) = 0, the kink-point selection used throughout."""
    if t > 0.0:
        return 1.0
    if t < 0.0:
        return -1.0
    return 0.0


@dataclass(frozen=True)
class Objective:
    """Black-box objective: value oracle plus optional metadata.

    value must be deterministic (same x, same result).  subgrad, when
    given, returns one element of the limiting subdifferential and equals
    the classical gradient wherever the function is differentiable.
    fmin/xstar record a known minimal value and minimizer when available.
    """

    name: str
    dim: int
    value: Callable[[Array], float]
    subgrad: Optional[Callable[[Array], Array]] = None
    fmin: Optional[float] = None
    xstar: Optional[Array] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.xstar is not None:
            object.__setattr__(self, "xstar", as_point(self.xstar))
            if self.xstar.size != self.dim:
                raise ValueError("xstar dimension mismatch")
            if self.fmin is not None and abs(self.value(self.xstar) - self.fmin) > 1e-12:
                raise ValueError(f"{self.name}: value(xstar) != fmin beyond 1e-12")

    def __call__(self, x) -> float:
        return self.value(as_point(x))


@dataclass(frozen=True)
class ProxConfig:
    """Parameters for one high-order prox solve.

    p is the regularization order (> 1), gamma the envelope parameter.
    The remaining knobs control the derivative-free inner solver: total
    evaluation budget per prox solve, simplex tolerance, number of
    multi-starts (the query point itself is always one of them), the
    clustering radius for distinct-minimizer detection, the RNG seed for
    start perturbations, the initial simplex scale, and the value floor
    below which the regularized objective is declared unbounded.
    """

    p: float = 2.0
    gamma: float = 1.0
    inner_budget: int = 4000
    inner_tol: float = 1e-10
    n_starts: int = 8
    cluster_radius: float = 1e-3
    seed: int = 0
    start_scale: float = 0.05
    value_floor: float = -1e12

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must be > 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if self.inner_budget < 1:
            raise ValueError("inner_budget must be >= 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if not self.cluster_radius > 0:
            raise ValueError("cluster_radius must be > 0")
        if not self.inner_tol > 0:
            raise ValueError("inner_tol must be > 0")
        if not self.start_scale > 0:
            raise ValueError("start_scale must be > 0")


@dataclass(frozen=True)
class Candidate:
    """One clustered local solution of the regularized subproblem."""

    y: Array
    reg_value: float


@dataclass(frozen=True)
class ProxSolution:
    """Result of one prox solve at a base point x.

    y is the best candidate; env_value its regularized objective (the
    envelope estimate at x); residual = ||x - y||; grad the envelope
    gradient induced by y; candidates the distinct local solutions found
    by the multi-start (best first).  status is one of "converged",
    "budget_exhausted", or "unbounded" (regularized objective dove below
    the configured floor, envelope value is -inf).
    """

    y: Array
    env_value: float
    residual: float
    grad: Array
    candidates: tuple[Candidate, ...]
    status: str
    evals: int


@dataclass
class Trace:
    """Per-iteration record of a solver run.

    step_norms has one entry fewer than iterates.  env_values is None for
    solvers that never evaluate the envelope; for prox-point runs it is
    aligned with iterates[:-1] (the points at which a prox solve was
    performed).  eval_counts is the cumulative oracle-call count.
    """

    iterates: list
    f_values: list
    env_values: Optional[list]
    step_norms: list
    eval_counts: list
    elapsed: float = 0.0
    status: Optional[str] = None

    def validate(self) -> None:
        n = len(self.iterates)
        if len(self.f_values) != n:
            raise ValueError("f_values length mismatch")
        if len(self.step_norms) != n - 1:
            raise ValueError("step_norms must have one fewer entry than iterates")
        if len(self.eval_counts) != n:
            raise ValueError("eval_counts length mismatch")
        if self.env_values is not None and len(self.env_values) not in (n, n - 1):
            raise ValueError("env_values length mismatch")


# ---------------------------------------------------------------------------
# objective catalog
# ---------------------------------------------------------------------------


def make_ncr1() -> Objective:
    """First Nesterov-Chebyshev-Rosenbrock function on R^2.

    f(x) = (1/4)(x1 - 1)^2 + |x2 - 2 x1^2 + 1|, unique global minimizer
    (1, 1) with value 0; nonsmooth along the parabola x2 = 2 x1^2 - 1.
    """

    def value(x: Array) -> float:
        x1, x2 = float(x[0]), float(x[1])
        return 0.25 * (x1 - 1.0) ** 2 + abs(x2 - 2.0 * x1 * x1 + 1.0)

    def subgrad(x: Array) -> Array:
        x1, x2 = float(x[0]), float(x[1])
        s = sign(x2 - 2.0 * x1 * x1 + 1.0)
        return np.array([0.5 * (x1 - 1.0) - 4.0 * x1 * s, s])

    return Objective("ncr1", 2, value, subgrad, fmin=0.0, xstar=(1.0, 1.0))


def make_ncr2() -> Objective:
    """Second Nesterov-Chebyshev-Rosenbrock function on R^2.

    f(x) = (1/4)|x1 - 1| + |x2 - 2|x1| + 1|, unique global minimizer
    (1, 1).  (0, -1) is a nonoptimal Clarke critical point that traps
    some subgradient methods; it is recorded in metadata.
    """

    def value(x: Array) -> float:
        x1, x2 = float(x[0]), float(x[1])
        return 0.25 * abs(x1 - 1.0) + abs(x2 - 2.0 * abs(x1) + 1.0)

    def subgrad(x: Array) -> Array:
        x1, x2 = float(x[0]), float(x[1])
        s = sign(x2 - 2.0 * abs(x1) + 1.0)
        return np.array([0.25 * sign(x1 - 1.0) - 2.0 * sign(x1) * s, s])

    return Objective(
        "ncr2",
        2,
        value,
        subgrad,
        fmin=0.0,
        xstar=(1.0, 1.0),
        metadata={"clarke_critical": (0.0, -1.0)},
    )


def make_quartic() -> Objective:
    """1-D double well f(x) = x^4 - x^2 with analytic gradient."""

    def value(x: Array) -> float:
        t = float(x[0])
        return t ** 4 - t * t

    def subgrad(x: Array) -> Array:
        t = float(x[0])
        return np.array([4.0 * t ** 3 - 2.0 * t])

    root = 1.0 / math.sqrt(2.0)
    return Objective(
        "quartic",
        1,
        value,
        subgrad,
        fmin=-0.25,
        xstar=(root,),
        metadata={"minimizers": (-root, root)},
    )


def make_abs_shift() -> Objective:
    """f(x) = |x - 2| on R."""

    def value(x: Array) -> float:
        return abs(float(x[0]) - 2.0)

    def subgrad(x: Array) -> Array:
        return np.array([sign(float(x[0]) - 2.0)])

    return Objective("abs_shift", 1, value, subgrad, fmin=0.0, xstar=(2.0,))


def make_notcalm() -> Objective:
    """Piecewise 1-D function -|x| on [-1, 1], |x| - 2 outside.

    Lower bounded (hence prox-bounded of every order) but 0 is not a
    calm point of any order: -|x| + M|x|^p < 0 for small x != 0.
    """

    def value(x: Array) -> float:
        t = float(x[0])
        return -abs(t) if abs(t) <= 1.0 else abs(t) - 2.0

    def subgrad(x: Array) -> Array:
        t = float(x[0])
        if abs(t) <= 1.0:
            return np.array([-sign(t)])
        return np.array([sign(t)])

    return Objective(
        "notcalm", 1, value, subgrad, fmin=-1.0, xstar=(1.0,),
        metadata={"noncalm_point": (0.0,)},
    )


def make_negexp() -> Objective:
    """f(x) = -exp(x^2), smooth but not prox-bounded of any order.

    Overflow is mapped to -inf so downhill escapes read as unbounded.
    """

    def value(x: Array) -> float:
        t = float(x[0])
        try:
            return -math.exp(t * t)
        except OverflowError:
            return -INF

    def subgrad(x: Array) -> Array:
        t = float(x[0])
        try:
            return np.array([-2.0 * t * math.exp(t * t)])
        except OverflowError:
            return np.array([-INF if t > 0 else INF])

    return Objective("negexp", 1, value, subgrad)


#: Registry used by the benchmark runner and CLI.
OBJECTIVES: dict[str, Callable[[], Objective]] = {
    "ncr1": make_ncr1,
    "ncr2": make_ncr2,
    "quartic": make_quartic,
    "abs_shift": make_abs_shift,
    "notcalm": make_notcalm,
    "negexp": make_negexp,
}


def get_objective(name: str) -> Objective:
    """Instantiate a catalog objective by id."""
    try:
        factory = OBJECTIVES[name]
    except KeyError:
        raise KeyError(f"unknown objective id {name!r}; known: {sorted(OBJECTIVES)}")
    return factory()
