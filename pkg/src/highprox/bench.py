"""Experiment runner: config ingestion, solver dispatch, relative errors,
report persistence, and plot-ready trace export.

Reports are plain JSON with a schema-version field.  In evaluation-budget
mode a report is byte-identical across runs with the same config and
seed (wall-clock times are omitted); trace files use fixed 17-significant
-digit formatting so parsing them back reproduces every number exactly.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import run_nm_direct, run_sg_dss, run_sg_gss
from .core import OBJECTIVES, Objective, ProxConfig, Trace, as_point, get_objective
from .hippa import criticality_bound, run_hippa

SCHEMA_VERSION = 1
SOLVERS = ("hippa", "nm", "sg_dss", "sg_gss")

#: Environment variable controlling the worker-pool size.
WORKERS_ENV = "HIGHPROX_WORKERS"


def normalize_solver(name: str) -> str:
    return name.strip().lower().replace("-", "_")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: an objective, a solver with its parameters, and a
    set of initial points (explicit, or seeded uniform draws from a box).
    budget is an oracle-call count in "evals" mode and seconds in
    "wallclock" mode.
    """

    objective: str
    solver: str
    p: float = 2.0
    gamma: float = 1.0
    eps: float = 1e-8
    alpha: float = 0.98
    rho: float = 0.98
    budget: float = 50_000
    budget_mode: str = "evals"
    max_iter: int = 1_000_000
    inits: Optional[tuple] = None
    n_random: int = 0
    box: tuple = (-4.0, 4.0)
    seed: int = 0
    n_starts: int = 4
    inner_tol: float = 1e-13
    inner_budget: int = 3000
    cluster_radius: float = 1e-3
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "solver", normalize_solver(self.solver))
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective id {self.objective!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver id {self.solver!r}")
        if self.budget_mode not in ("evals", "wallclock"):
            raise ValueError("budget_mode must be 'evals' or 'wallclock'")
        if self.inits is not None:
            object.__setattr__(
                self, "inits", tuple(tuple(float(v) for v in x) for x in self.inits)
            )
        elif self.n_random < 1:
            raise ValueError("either inits or n_random >= 1 is required")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["inits"] = [list(x) for x in self.inits] if self.inits is not None else None
        d["box"] = list(self.box)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if d.get("inits") is not None:
            d["inits"] = tuple(tuple(x) for x in d["inits"])
        if "box" in d:
            d["box"] = tuple(d["box"])
        return cls(**d)


def resolve_inits(cfg: ExperimentConfig, phi: Objective) -> list[np.ndarray]:
    """Initial points: the explicit list, or n_random seeded box draws."""
    if cfg.inits is not None:
        pts = [as_point(x) for x in cfg.inits]
        for x in pts:
            if x.size != phi.dim:
                raise ValueError("initial point dimension mismatch")
        return pts
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.box
    return [rng.uniform(lo, hi, phi.dim) for _ in range(cfg.n_random)]


def relative_error(x, phi: Objective) -> float:
    """||x - xstar|| / max(1, ||xstar||); requires a known minimizer."""
    if phi.xstar is None:
        raise ValueError(f"objective {phi.name!r} has no known minimizer")
    x = as_point(x)
    return float(np.linalg.norm(x - phi.xstar) / max(1.0, np.linalg.norm(phi.xstar)))


@dataclass
class Report:
    """Serialized experiment result: one record per (init, solver) run
    plus the in-memory traces (persisted separately by export_traces)."""

    schema_version: int
    config: dict
    records: list = field(default_factory=list)
    traces: list = field(default_factory=list)


def _monotone_within(values, tol: float) -> bool:
    return all(b <= a + tol for a, b in zip(values, values[1:]))


def _run_one(cfg: ExperimentConfig, phi: Objective, x0: np.ndarray, idx: int):
    """Dispatch one solver run; returns (record, trace)."""
    evals_budget = int(cfg.budget) if cfg.budget_mode == "evals" else None
    deadline = float(cfg.budget) if cfg.budget_mode == "wallclock" else None

    bounds: dict = {}
    flags: dict = {}
    if cfg.solver == "hippa":
        pcfg = ProxConfig(
            p=cfg.p, gamma=cfg.gamma, inner_budget=cfg.inner_budget,
            inner_tol=cfg.inner_tol, n_starts=cfg.n_starts,
            cluster_radius=cfg.cluster_radius, seed=cfg.seed + 7919 * idx,
        )
        res = run_hippa(
            phi, x0, pcfg, eps=cfg.eps, max_iter=cfg.max_iter,
            max_evals=evals_budget, wallclock=deadline,
        )
        trace = res.trace
        x_final = res.x_final
        bounds["iteration_bound"] = res.iter_bound
        bounds["criticality_bound"] = criticality_bound(cfg.eps, pcfg)
        bounds["criticality"] = res.criticality if math.isfinite(res.criticality) else None
        chain_ok = _monotone_within(trace.f_values, 1e-9)
        env = trace.env_values or []
        for k, e in enumerate(env):
            chain_ok &= trace.f_values[k + 1] <= e + 1e-9 <= trace.f_values[k] + 2e-9
        flags["monotone_ok"] = bool(chain_ok)
        if res.stop_reason == "step_tol":
            flags["certificate_ok"] = bool(res.criticality <= bounds["criticality_bound"])
        status = res.stop_reason
    elif cfg.solver == "nm":
        budget = evals_budget if evals_budget is not None else 10 ** 9
        trace = run_nm_direct(phi, x0, tol=cfg.inner_tol, budget=budget,
                              deadline=deadline)
        x_final = trace.iterates[-1]
        status = trace.status
    elif cfg.solver == "sg_dss":
        trace = run_sg_dss(phi, x0, alpha=cfg.alpha, max_iter=cfg.max_iter,
                           max_evals=evals_budget, deadline=deadline)
        x_final = trace.iterates[-1]
        status = trace.status
    else:  # sg_gss
        trace = run_sg_gss(phi, x0, rho=cfg.rho, max_iter=cfg.max_iter,
                           max_evals=evals_budget, deadline=deadline)
        x_final = trace.iterates[-1]
        status = trace.status

    evals = int(trace.eval_counts[-1])
    if cfg.budget_mode == "evals":
        flags["budget_ok"] = bool(evals <= int(cfg.budget))
    relerr = relative_error(x_final, phi) if phi.xstar is not None else None

    record = {
        "objective": cfg.objective,
        "solver": cfg.solver,
        "label": cfg.label or cfg.solver,
        "init_index": idx,
        "init": [float(v) for v in x0],
        "final_point": [float(v) for v in x_final],
        "final_value": float(trace.f_values[-1]),
        "relative_error": relerr,
        "iterations": len(trace.step_norms),
        "evals": evals,
        "elapsed": None if cfg.budget_mode == "evals" else float(trace.elapsed),
        "status": status,
        "bounds": bounds,
        "pass_flags": flags,
        "passed": bool(all(flags.values())) if flags else True,
        "trace_ref": None,
    }
    return record, trace


def _run_task(args):
    cfg_dict, idx = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    phi = get_objective(cfg.objective)
    x0 = resolve_inits(cfg, phi)[idx]
    return idx, _run_one(cfg, phi, x0, idx)


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Run the configured solver over all initial points.

    Deterministic under a fixed seed: workers (HIGHPROX_WORKERS) only
    parallelize independent runs and results are merged in init order.
    """
    phi = get_objective(cfg.objective)
    inits = resolve_inits(cfg, phi)
    n_workers = int(os.environ.get(WORKERS_ENV, "1"))

    results = []
    if n_workers > 1 and len(inits) > 1:
        tasks = [(cfg.to_dict(), i) for i in range(len(inits))]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_task, tasks))
        results.sort(key=lambda t: t[0])
        results = [r for _, r in results]
    else:
        for i, x0 in enumerate(inits):
            results.append(_run_one(cfg, phi, x0, i))

    report = Report(schema_version=SCHEMA_VERSION, config={"runs": [cfg.to_dict()]})
    for i, (record, trace) in enumerate(results):
        record["trace_ref"] = f"trace_{len(report.records):03d}.csv"
        report.records.append(record)
        report.traces.append(trace)
    return report


def merge_reports(reports: list[Report], config: dict) -> Report:
    merged = Report(schema_version=SCHEMA_VERSION, config=config)
    for rep in reports:
        for record, trace in zip(rep.records, rep.traces):
            record = dict(record)
            record["trace_ref"] = f"trace_{len(merged.records):03d}.csv"
            merged.records.append(record)
            merged.traces.append(trace)
    merged.config["runs"] = [r for rep in reports for r in rep.config["runs"]]
    return merged


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def report_to_json(report: Report) -> str:
    payload = {
        "schema_version": report.schema_version,
        "config": report.config,
        "records": report.records,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def save_report(report: Report, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_to_json(report))
    return path


def load_report(path) -> dict:
    """Parse a report file; rejects unknown schema versions."""
    payload = json.loads(Path(path).read_text())
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema version: {version!r}")
    return payload


def _fmt(v: Optional[float]) -> str:
    if v is None:
        return ""
    return f"{float(v):.17g}"


def export_traces(report: Report, fmt: str = "csv", outdir=".") -> list[Path]:
    """Write per-iteration trace files (CSV or JSON records).

    Columns: k, coordinates, objective value, envelope estimate, step
    norm, relative error.  Formatting is fixed at 17 significant digits,
    so identical inputs give bit-identical files and parsing recovers
    every float exactly.
    """
    if fmt not in ("csv", "records"):
        raise ValueError("format must be 'csv' or 'records'")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for record, trace in zip(report.records, report.traces):
        phi = get_objective(record["objective"])
        dim = phi.dim
        ref = record["trace_ref"] or f"trace_{len(paths):03d}.csv"
        if fmt == "records":
            ref = ref.replace(".csv", ".jsonl")
        path = outdir / ref
        env = trace.env_values if trace.env_values is not None else []
        rows = []
        for k, x in enumerate(trace.iterates):
            rows.append({
                "k": k,
                "x": [float(v) for v in x],
                "f": float(trace.f_values[k]),
                "env": float(env[k]) if k < len(env) else None,
                "step_norm": float(trace.step_norms[k - 1]) if k > 0 else None,
                "relerr": relative_error(x, phi) if phi.xstar is not None else None,
            })
        if fmt == "csv":
            header = ["k"] + [f"x{i}" for i in range(dim)] + ["f", "env", "step_norm", "relerr"]
            lines = [",".join(header)]
            for row in rows:
                cells = [str(row["k"])]
                cells += [_fmt(v) for v in row["x"]]
                cells += [_fmt(row["f"]), _fmt(row["env"]),
                          _fmt(row["step_norm"]), _fmt(row["relerr"])]
                lines.append(",".join(cells))
            path.write_text("\n".join(lines) + "\n")
        else:
            lines = []
            for row in rows:
                out = {
                    "k": row["k"],
                    "x": [_fmt(v) for v in row["x"]],
                    "f": _fmt(row["f"]),
                    "env": _fmt(row["env"]),
                    "step_norm": _fmt(row["step_norm"]),
                    "relerr": _fmt(row["relerr"]),
                }
                lines.append(json.dumps(out, sort_keys=True))
            path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def parse_trace_csv(path) -> dict:
    """Read back a CSV trace into columns of floats (None for blanks)."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    cols: dict[str, list] = {h: [] for h in header}
    for line in lines[1:]:
        for h, cell in zip(header, line.split(",")):
            cols[h].append(float(cell) if cell != "" else None)
    return cols


# ---------------------------------------------------------------------------
# canned presets
# ---------------------------------------------------------------------------

#: The five fixed initializations for the first benchmark function.
TABLE1_INITS = (
    (3.57, 2.76),
    (-1.34, 3.03),
    (0.72, -0.06),
    (-1.21, -1.11),
    (-1.09, 0.03),
)

TRAP_INIT = (-2.48, 0.58)


def preset_configs(name: str, seed: int = 0) -> list[ExperimentConfig]:
    """Configs for the canned experiments: 'table1', 'fig4', 'trap'."""
    if name == "table1":
        common = dict(objective="ncr1", inits=TABLE1_INITS,
                      budget=50_000, budget_mode="evals", seed=seed)
        return [
            ExperimentConfig(solver="nm", inner_tol=1e-13, label="nm", **common),
            ExperimentConfig(solver="hippa", p=2.0, gamma=50.0, eps=1e-7,
                             n_starts=4, inner_tol=1e-15, inner_budget=3000,
                             label="hippa_p2", **common),
            ExperimentConfig(solver="sg_dss", alpha=0.98, label="sg_dss", **common),
        ]
    if name == "fig4":
        configs = []
        for p in (1.5, 2.0, 2.5, 3.0, 10.0, 100.0):
            configs.append(ExperimentConfig(
                objective="ncr1", solver="hippa", p=p, gamma=50.0, eps=1e-7,
                inits=((-1.0, 1.0),), budget=20_000, budget_mode="evals",
                n_starts=4, inner_tol=1e-13, inner_budget=3000,
                seed=seed, label=f"hippa_p{p:g}",
            ))
        return configs
    if name == "trap":
        common = dict(objective="ncr2", inits=(TRAP_INIT,),
                      budget=50_000, budget_mode="evals", seed=seed)
        return [
            ExperimentConfig(solver="hippa", p=1.25, gamma=9.1, eps=1e-6,
                             n_starts=4, inner_tol=1e-13, inner_budget=3000,
                             label="hippa_p1.25", **common),
            ExperimentConfig(solver="sg_gss", rho=0.98, max_iter=3000,
                             label="sg_gss", **common),
        ]
    raise ValueError(f"unknown preset {name!r}")


def run_preset(name: str, seed: int = 0) -> Report:
    configs = preset_configs(name, seed)
    reports = [run_experiment(cfg) for cfg in configs]
    return merge_reports(reports, config={"preset": name, "seed": seed})
