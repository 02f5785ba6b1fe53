"""Numeric verification probes for the smoothing theory's constants,
inequalities, and regularity claims.

All probes are falsification-style: they certify "violation found" with
an explicit witness, and otherwise only report "no violation in N
samples".  Reports merge deterministically by sample index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import Array, Objective, ProxConfig, as_point
from .envelope import eval_hope, multiplicity, power_map

SQRT3 = math.sqrt(3.0)


# ---------------------------------------------------------------------------
# the modulus constant kappa and its branch-switch root
# ---------------------------------------------------------------------------


def _h1(t: float) -> float:
    return t * (t - 1.0) / 2.0


def _h3(t: float) -> float:
    return 1.0 - (1.0 + (2.0 - SQRT3) * t / (t - 1.0)) ** (1.0 - t)


@lru_cache(maxsize=1)
def branch_switch_root(tol: float = 1e-12) -> float:
    """Root of h1(t) = h3(t) on (1, 2), found by bisection to tol.

    h1(t) = t(t-1)/2 and h3(t) = 1 - (1 + (2 - sqrt(3)) t / (t-1))^(1-t)
    are the two curves whose pointwise minimum defines which kappa branch
    is active; their crossing is the switch point (approx 1.3214).
    """
    lo, hi = 1.01, 1.99
    flo = _h1(lo) - _h3(lo)
    if flo >= 0:
        raise RuntimeError("bisection bracket invalid at lower end")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _h1(mid) - _h3(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class KappaEval:
    """Value of the modulus constant kappa at t, with branch bookkeeping."""

    t: float
    kappa: float
    branch: str  # linear | exponential | unit
    t_hat: float


def kappa(t: float) -> KappaEval:
    """Piecewise modulus constant kappa(t) on (1, 2].

    Linear branch (2 + sqrt(3)) (t - 1) / 16 up to the switch root,
    then (2 + sqrt(3)) / 16 * (1 - (3 - sqrt(3))^(1-t)), and exactly 1
    at t = 2.  Both non-unit branches are valid lower bounds for the
    underlying modulus; the exponential one is the coarser of the two.
    """
    if not (1.0 < t <= 2.0):
        raise ValueError(f"kappa domain is (1, 2], got {t}")
    t_hat = branch_switch_root()
    if t == 2.0:
        return KappaEval(t, 1.0, "unit", t_hat)
    if t <= t_hat:
        return KappaEval(t, (2.0 + SQRT3) * (t - 1.0) / 16.0, "linear", t_hat)
    val = (2.0 + SQRT3) / 16.0 * (1.0 - (3.0 - SQRT3) ** (1.0 - t))
    return KappaEval(t, val, "exponential", t_hat)


# ---------------------------------------------------------------------------
# probe reports
# ---------------------------------------------------------------------------


@dataclass
class ProbeReport:
    """Outcome of one falsification probe.

    violations holds witness records (empty iff the probe passed);
    margins carries summary statistics of the observed slack.
    """

    claim: str
    samples: int
    violations: list = field(default_factory=list)
    margins: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_record(self) -> dict:
        return {
            "claim": self.claim,
            "samples": self.samples,
            "passed": self.passed,
            "n_violations": len(self.violations),
            "violations": self.violations[:10],
            "margins": self.margins,
            "details": self.details,
        }


def _margin_stats(margins: list[float]) -> dict:
    if not margins:
        return {}
    arr = np.asarray(margins)
    return {"min": float(arr.min()), "mean": float(arr.mean()), "max": float(arr.max())}


def _power_rows(a: Array, p: float) -> Array:
    """Row-wise ||v||^(p-2) v with the 0/0 = 0 convention."""
    n = np.linalg.norm(a, axis=1, keepdims=True)
    factor = np.zeros_like(n)
    mask = n[:, 0] > 0
    factor[mask, 0] = n[mask, 0] ** (p - 2.0)
    return factor * a


# ---------------------------------------------------------------------------
# inequality suites
# ---------------------------------------------------------------------------

REL_SLACK = 1e-12


def verify_basic_ineq(p: float, samples: int = 10_000, seed: int = 0) -> ProbeReport:
    """Check the three power-norm inequalities on random (a, b, lambda).

    (a) ||a+b||^p >= lam^(p-1) ||a||^p - (lam/(1-lam))^(p-1) ||b||^p for
        lam in (0,1), p >= 1;
    (b) ||a-b||^p <= 2^(p-1) (||a||^p + ||b||^p) for p >= 1;
    (c) <||a||^(p-2) a - ||b||^(p-2) b, a-b> >= (1/2)^(p-2) ||a-b||^p
        for p >= 2.
    Samples are spread over dimensions 1..8 with relative slack 1e-12.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    rng = np.random.default_rng(seed)
    report = ProbeReport(claim=f"basic-ineq(p={p})", samples=samples)
    margins: list[float] = []
    remaining = samples
    for dim in range(1, 9):
        n = samples // 8 if dim < 8 else remaining
        remaining -= n
        if n <= 0:
            continue
        scale = 10.0 ** rng.uniform(-1.0, 1.0, size=(n, 1))
        a = rng.standard_normal((n, dim)) * scale
        b = rng.standard_normal((n, dim)) * scale
        lam = rng.uniform(0.02, 0.98, size=n)
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        nab = np.linalg.norm(a + b, axis=1)
        namb = np.linalg.norm(a - b, axis=1)

        checks = []
        lhs_a = nab ** p
        rhs_a = lam ** (p - 1.0) * na ** p - (lam / (1.0 - lam)) ** (p - 1.0) * nb ** p
        checks.append(("a", lhs_a, rhs_a))
        lhs_b = 2.0 ** (p - 1.0) * (na ** p + nb ** p)
        rhs_b = namb ** p
        checks.append(("b", lhs_b, rhs_b))
        if p >= 2:
            inner = np.einsum("ij,ij->i", _power_rows(a, p) - _power_rows(b, p), a - b)
            checks.append(("c", inner, 0.5 ** (p - 2.0) * namb ** p))

        for part, lhs, rhs in checks:
            scale_ = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
            slack = (lhs - rhs) / scale_
            margins.extend(slack.tolist())
            bad = np.nonzero(slack < -REL_SLACK)[0]
            for i in bad:
                report.violations.append(
                    {"part": part, "dim": dim, "a": a[i].tolist(), "b": b[i].tolist(),
                     "lambda": float(lam[i]), "slack": float(slack[i])}
                )
    report.margins = _margin_stats(margins)
    return report


def verify_lemma22(p: float, r: float, samples: int = 10_000, seed: int = 0) -> ProbeReport:
    """Check the ball-restricted monotonicity/Lipschitz bounds of the
    power map on B(0; r).

    For p in (1, 2]:  <J_p(a) - J_p(b), a-b> >= kappa_p r^(p-2) ||a-b||^2.
    For p >= 2:       ||J_p(a) - J_p(b)|| <= (2 r^(p-2) / kappa_s) ||a-b||
    with s = p / (p-1), where J_p(v) = ||v||^(p-2) v.
    """
    if p <= 1:
        raise ValueError("p must be > 1")
    if r <= 0:
        raise ValueError("r must be > 0")
    rng = np.random.default_rng(seed)
    report = ProbeReport(claim=f"lemma22(p={p}, r={r})", samples=samples)
    margins: list[float] = []
    remaining = samples
    for dim in range(1, 9):
        n = samples // 8 if dim < 8 else remaining
        remaining -= n
        if n <= 0:
            continue
        # uniform in the ball of radius r
        def ball(k: int) -> Array:
            u = rng.standard_normal((k, dim))
            u /= np.maximum(np.linalg.norm(u, axis=1, keepdims=True), 1e-300)
            radii = r * rng.uniform(0.0, 1.0, size=(k, 1)) ** (1.0 / dim)
            return u * radii

        a, b = ball(n), ball(n)
        diff = a - b
        nd = np.linalg.norm(diff, axis=1)
        jdiff = _power_rows(a, p) - _power_rows(b, p)

        if p <= 2.0:
            lhs = np.einsum("ij,ij->i", jdiff, diff)
            rhs = kappa(p).kappa * r ** (p - 2.0) * nd ** 2
            scale_ = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
            slack = (lhs - rhs) / scale_
            margins.extend(slack.tolist())
            for i in np.nonzero(slack < -REL_SLACK)[0]:
                report.violations.append(
                    {"part": "lower", "dim": dim, "a": a[i].tolist(),
                     "b": b[i].tolist(), "slack": float(slack[i])}
                )
        if p >= 2.0:
            s = p / (p - 1.0)
            lhs = 2.0 * r ** (p - 2.0) / kappa(s).kappa * nd
            rhs = np.linalg.norm(jdiff, axis=1)
            scale_ = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
            slack = (lhs - rhs) / scale_
            margins.extend(slack.tolist())
            for i in np.nonzero(slack < -REL_SLACK)[0]:
                report.violations.append(
                    {"part": "upper", "dim": dim, "a": a[i].tolist(),
                     "b": b[i].tolist(), "slack": float(slack[i])}
                )
    report.margins = _margin_stats(margins)
    return report


# ---------------------------------------------------------------------------
# calmness / prox-boundedness probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalmSearchSpec:
    """Sampling plan for the calm-point probe: a dense local grid around
    the candidate point plus uniform global samples."""

    local_radius: float = 1.0
    local_step: float = 1e-3
    local_n_2d: int = 201
    global_samples: int = 2000
    global_halfwidth: float = 10.0
    seed: int = 0
    atol: float = 1e-9


def check_p_calm(
    phi: Objective,
    xbar,
    M: float,
    p: float,
    spec: Optional[CalmSearchSpec] = None,
) -> ProbeReport:
    """Search for x != xbar with phi(x) + M ||x - xbar||^p <= phi(xbar).

    A small absolute tolerance keeps numerically exact ties (and the
    inexactness of computed fixed points) from producing spurious
    witnesses.
    """
    spec = spec or CalmSearchSpec()
    xbar = as_point(xbar)
    fbar = phi.value(xbar)
    rng = np.random.default_rng(spec.seed)

    points: list[Array] = []
    if phi.dim == 1:
        offs = np.arange(spec.local_step, spec.local_radius + spec.local_step, spec.local_step)
        for o in offs:
            points.append(xbar + o)
            points.append(xbar - o)
    else:
        axis = np.linspace(-spec.local_radius, spec.local_radius, spec.local_n_2d)
        for dx in axis:
            for dy in axis:
                if dx == 0.0 and dy == 0.0:
                    continue
                points.append(xbar + np.array([dx, dy]))
    for _ in range(spec.global_samples):
        points.append(xbar + rng.uniform(-spec.global_halfwidth, spec.global_halfwidth, phi.dim))

    report = ProbeReport(claim=f"p-calm({phi.name}, M={M}, p={p})", samples=len(points))
    margins: list[float] = []
    for x in points:
        d = float(np.linalg.norm(x - xbar))
        if d == 0.0:
            continue
        margin = phi.value(x) + M * d ** p - fbar
        margins.append(margin)
        if margin <= -spec.atol:
            report.violations.append({"x": x.tolist(), "margin": float(margin)})
    report.margins = _margin_stats(margins)
    return report


def check_prox_bounded(
    phi: Objective,
    p: float,
    radii: Optional[list[float]] = None,
    directions: int = 32,
    seed: int = 0,
) -> ProbeReport:
    """Estimate min phi(x) / ||x||^p over spheres of growing radius.

    Flags "suspected-unbounded" when the estimates keep decreasing and
    end far below zero, which indicates liminf phi / ||.||^p = -inf.
    """
    radii = radii or [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    rng = np.random.default_rng(seed)
    if phi.dim == 1:
        dirs = [np.array([1.0]), np.array([-1.0])]
    else:
        dirs = []
        for i in range(phi.dim):
            e = np.zeros(phi.dim)
            e[i] = 1.0
            dirs.extend([e, -e])
        while len(dirs) < directions:
            u = rng.standard_normal(phi.dim)
            dirs.append(u / np.linalg.norm(u))

    ratios: list[float] = []
    worst_points: list[Array] = []
    for R in radii:
        vals = [(phi.value(R * u), R * u) for u in dirs]
        val, pt = min(vals, key=lambda t: t[0])
        ratios.append(val / R ** p)
        worst_points.append(pt)

    tail = ratios[-3:]
    decreasing = all(tail[i + 1] < tail[i] for i in range(len(tail) - 1))
    suspected = decreasing and ratios[-1] < -1e3

    report = ProbeReport(
        claim=f"prox-bounded({phi.name}, p={p})",
        samples=len(radii) * len(dirs),
        details={
            "radii": radii,
            "ratios": ratios,
            "verdict": "suspected-unbounded" if suspected else "bounded",
        },
    )
    if suspected:
        report.violations.append(
            {"x": worst_points[-1].tolist(), "ratio": ratios[-1]}
        )
    report.margins = _margin_stats(ratios)
    return report


# ---------------------------------------------------------------------------
# envelope-based probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SublevelGrid:
    """Test points just outside the ball B(center; r): offsets in
    (0, width] and, in 2-D, a fan of directions."""

    n_offsets: int = 201
    width: float = 1.0
    n_angles: int = 32
    min_offset: float = 1e-6


def sublevel_containment(
    phi: Objective,
    lam: float,
    r: float,
    cfg: ProxConfig,
    grid: Optional[SublevelGrid] = None,
    center=None,
) -> ProbeReport:
    """Verify that the envelope's lam-sublevel set stays inside B(center; r).

    Evaluates the envelope on a grid just outside the ball; any value at
    or below lam is a containment violation witness.  center defaults to
    the objective's known minimizer.
    """
    grid = grid or SublevelGrid()
    if center is None:
        if phi.xstar is None:
            raise ValueError("no center given and objective has no known minimizer")
        center = phi.xstar
    center = as_point(center)
    offsets = np.linspace(grid.min_offset, grid.width, grid.n_offsets)

    points: list[Array] = []
    if phi.dim == 1:
        for o in offsets:
            points.append(center + (r + o))
            points.append(center - (r + o))
    else:
        angles = np.linspace(0.0, 2.0 * math.pi, grid.n_angles, endpoint=False)
        for o in offsets:
            for th in angles:
                points.append(center + (r + o) * np.array([math.cos(th), math.sin(th)]))

    report = ProbeReport(
        claim=f"sublevel({phi.name}, lambda={lam}, r={r}, p={cfg.p}, gamma={cfg.gamma})",
        samples=len(points),
    )
    margins = []
    env_min = math.inf
    for x in points:
        env = eval_hope(phi, x, cfg).env_value
        env_min = min(env_min, env)
        margins.append(env - lam)
        if env <= lam:
            report.violations.append({"x": x.tolist(), "env": float(env)})
    report.margins = _margin_stats(margins)
    report.details = {"min_env_outside": env_min}
    return report


def single_valuedness_probe(
    phi: Objective,
    region,
    cfg: ProxConfig,
    n_points: int = 41,
) -> ProbeReport:
    """Map prox multiplicity over a compact box region.

    region is (lo, hi) per coordinate.  Points where the prox has more
    than one tied cluster are violation witnesses.  Details carry the
    per-point cluster lists, the largest contiguous single-valued
    segment (1-D), and the largest envelope-gradient jump between
    adjacent single-valued probes.
    """
    lo = as_point(region[0])
    hi = as_point(region[1])
    if phi.dim == 1:
        grid = [np.array([t]) for t in np.linspace(lo[0], hi[0], n_points)]
    else:
        side = max(2, int(round(math.sqrt(n_points))))
        xs = np.linspace(lo[0], hi[0], side)
        ys = np.linspace(lo[1], hi[1], side)
        grid = [np.array([a, b]) for a in xs for b in ys]

    report = ProbeReport(
        claim=f"single-valued({phi.name}, p={cfg.p}, gamma={cfg.gamma})",
        samples=len(grid),
    )
    records = []
    grads = []
    for x in grid:
        sol = eval_hope(phi, x, cfg)
        m = multiplicity(sol)
        best = sol.candidates[0].reg_value if sol.candidates else math.nan
        clusters = [
            {"y": c.y.tolist(), "reg_value": c.reg_value}
            for c in sol.candidates
            if c.reg_value <= best + 1e-8
        ]
        records.append({"x": x.tolist(), "multiplicity": m, "clusters": clusters})
        grads.append(sol.grad if m == 1 else None)
        if m > 1:
            report.violations.append(records[-1])

    max_jump = 0.0
    for g1, g2 in zip(grads, grads[1:]):
        if g1 is not None and g2 is not None:
            max_jump = max(max_jump, float(np.linalg.norm(g2 - g1)))

    single_run: tuple[int, int] | None = None
    run_start = None
    best_len = 0
    for i, rec in enumerate(records + [{"multiplicity": 0}]):
        if rec["multiplicity"] == 1:
            if run_start is None:
                run_start = i
        else:
            if run_start is not None and i - run_start > best_len:
                best_len = i - run_start
                single_run = (run_start, i - 1)
            run_start = None

    report.details = {
        "points": records,
        "max_grad_jump": max_jump,
        "single_valued_run": single_run,
    }
    return report


def holder_fit(
    phi: Objective,
    xbar,
    cfg: ProxConfig,
    samples: int = 60,
    radius: float = 0.3,
    seed: int = 0,
) -> tuple[float, float]:
    """Estimate the Holder exponent of the envelope gradient near xbar.

    Samples point pairs with log-spaced separations, computes envelope
    gradients through the prox, and fits log ||grad difference|| against
    log ||point difference|| by least squares.  Returns (nu_hat, L_hat).
    Raises ValueError if too many probes are not single-valued.
    """
    xbar = as_point(xbar)
    rng = np.random.default_rng(seed)
    log_h: list[float] = []
    log_g: list[float] = []
    multivalued = 0
    for _ in range(samples):
        u1 = rng.standard_normal(phi.dim)
        u1 /= np.linalg.norm(u1)
        x1 = xbar + rng.uniform(0.0, radius) * u1
        u2 = rng.standard_normal(phi.dim)
        u2 /= np.linalg.norm(u2)
        h = 10.0 ** rng.uniform(math.log10(1e-3 * radius), math.log10(0.3 * radius))
        x2 = x1 + h * u2

        s1 = eval_hope(phi, x1, cfg)
        s2 = eval_hope(phi, x2, cfg)
        if multiplicity(s1) > 1 or multiplicity(s2) > 1:
            multivalued += 1
            continue
        dg = float(np.linalg.norm(s2.grad - s1.grad))
        dx = float(np.linalg.norm(x2 - x1))
        if dg <= 1e-14 or dx <= 0.0:
            continue
        log_h.append(math.log(dx))
        log_g.append(math.log(dg))

    if multivalued > samples // 10 or len(log_h) < max(8, samples // 4):
        raise ValueError("insufficient single-valued region for the fit")
    slope, intercept = np.polyfit(log_h, log_g, 1)
    return float(slope), float(math.exp(intercept))
