"""Command-line front end.

Subcommands: run (one experiment from a JSON config and/or flags),
verify (analysis probes by claim id), table1 / fig4 / trap (canned
presets), export (re-emit trace files from a saved report).  Exit code 0
means every pass flag was true, 1 means some check failed, 2 is a usage
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .bench import (
    ExperimentConfig,
    Report,
    export_traces,
    get_objective,
    load_report,
    preset_configs,
    relative_error,
    run_experiment,
    run_preset,
    save_report,
)
from .core import ProxConfig, get_objective as _get_objective
from .envelope import eval_home, eval_hope, multiplicity


def _parse_point(text: str):
    return tuple(float(v) for v in text.replace("(", "").replace(")", "").split(","))


def _write_outputs(report: Report, out: str, fmt: str) -> int:
    outdir = Path(out)
    try:
        save_report(report, outdir / "report.json")
        export_traces(report, fmt=fmt, outdir=outdir)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {outdir / 'report.json'} and {len(report.records)} trace files")
    return 0


def _report_exit(report: Report) -> int:
    failed = [r for r in report.records if not r["passed"]]
    for r in report.records:
        relerr = r["relative_error"]
        relerr_s = f"{relerr:.3e}" if relerr is not None else "n/a"
        print(
            f"  {r['label']:>12s} init#{r['init_index']} -> "
            f"f={r['final_value']:.6e} relerr={relerr_s} "
            f"evals={r['evals']} [{'ok' if r['passed'] else 'FAIL'}]"
        )
    return 1 if failed else 0


def _cmd_run(args) -> int:
    cfg_dict = {}
    if args.config:
        cfg_dict = json.loads(Path(args.config).read_text())
    overrides = {
        "objective": args.objective,
        "solver": args.solver,
        "p": args.p,
        "gamma": args.gamma,
        "eps": args.eps,
        "alpha": args.alpha,
        "rho": args.rho,
        "budget": args.budget,
        "budget_mode": args.budget_mode,
        "seed": args.seed,
        "n_random": args.n_random,
    }
    for key, val in overrides.items():
        if val is not None:
            cfg_dict[key] = val
    if args.init:
        cfg_dict["inits"] = [_parse_point(t) for t in args.init]
    if args.box:
        cfg_dict["box"] = tuple(args.box)
    try:
        cfg = ExperimentConfig.from_dict(cfg_dict)
    except (ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    report = run_experiment(cfg)
    rc = _write_outputs(report, args.out, args.format)
    if rc:
        return rc
    return _report_exit(report)


def _cmd_preset(name: str, args) -> int:
    report = run_preset(name, seed=args.seed)
    rc = _write_outputs(report, args.out, args.format)
    if rc:
        return rc
    return _report_exit(report)


def _cmd_export(args) -> int:
    try:
        payload = load_report(args.report)
    except (OSError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    # re-run is not needed for export: rebuild traces from stored files is
    # not possible, so export works on fresh Report objects only; for a
    # saved report we re-emit its records as a flat CSV summary instead.
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = ["objective,solver,label,init_index,final_value,relative_error,iterations,evals"]
    for r in payload["records"]:
        relerr = "" if r["relative_error"] is None else f"{r['relative_error']:.17g}"
        rows.append(
            f"{r['objective']},{r['solver']},{r['label']},{r['init_index']},"
            f"{r['final_value']:.17g},{relerr},{r['iterations']},{r['evals']}"
        )
    path = outdir / "records.csv"
    try:
        path.write_text("\n".join(rows) + "\n")
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# verify claims
# ---------------------------------------------------------------------------


def _claim_kappa(samples: int, seed: int):
    checks = []
    k2 = analysis.kappa(2.0)
    checks.append(("kappa(2) == 1", k2.kappa == 1.0))
    t_hat = analysis.branch_switch_root()
    checks.append(("t_hat in [1.3209, 1.3219]", 1.3209 <= t_hat <= 1.3219))
    gap = abs(analysis._h1(t_hat) - analysis._h3(t_hat))
    checks.append(("branch-defining curves agree at t_hat (<= 1e-9)", gap <= 1e-9))
    grid = np.linspace(1.0 + 1e-6, 2.0, 10_000)
    vals = [analysis.kappa(float(t)) for t in grid]
    lin = [v.kappa for v in vals if v.branch == "linear"]
    exp = [v.kappa for v in vals if v.branch == "exponential"]
    mono = all(b >= a for a, b in zip(lin, lin[1:]))
    mono &= all(b >= a for a, b in zip(exp, exp[1:]))
    checks.append(("kappa nondecreasing within each branch", mono))
    checks.append(("kappa positive on grid", all(v.kappa > 0 for v in vals)))
    return checks


def _claim_basic_ineq(samples: int, seed: int):
    checks = []
    for p in (1.0, 1.5, 2.0, 3.0, 10.0):
        rep = analysis.verify_basic_ineq(p, samples=samples, seed=seed)
        checks.append((f"basic inequalities, p={p}: 0 violations", rep.passed))
    return checks


def _claim_lemma22(samples: int, seed: int):
    checks = []
    for p in (1.2, 1.5, 2.0, 3.0, 4.0):
        for r in (0.5, 1.0, 10.0):
            rep = analysis.verify_lemma22(p, r, samples=samples, seed=seed)
            checks.append((f"ball bounds, p={p}, r={r}: 0 violations", rep.passed))
    return checks


def _claim_sublevel(samples: int, seed: int):
    phi = _get_objective("abs_shift")
    grid = analysis.SublevelGrid(n_offsets=101, width=0.5)
    cfg1 = ProxConfig(p=2.0, gamma=1.0, n_starts=3, inner_tol=1e-11, inner_budget=600)
    cfg2 = ProxConfig(p=2.0, gamma=0.4, n_starts=3, inner_tol=1e-11, inner_budget=600)
    rep1 = analysis.sublevel_containment(phi, 1.0, 1.35, cfg1, grid)
    rep2 = analysis.sublevel_containment(phi, 1.0, 1.35, cfg2, grid)
    return [
        ("containment fails for gamma=1", not rep1.passed),
        ("containment holds for gamma=0.4", rep2.passed),
    ]


def _claim_single_valued(samples: int, seed: int):
    phi = _get_objective("quartic")
    cfg = ProxConfig(p=3.0, gamma=1.0, n_starts=8, inner_tol=1e-11,
                     inner_budget=2400, seed=seed)
    rep = analysis.single_valuedness_probe(phi, ((-0.1,), (0.1,)), cfg, n_points=21)
    at0 = [r for r in rep.details["points"] if abs(r["x"][0]) < 1e-12]
    ok = bool(at0) and at0[0]["multiplicity"] == 2
    root = (-1.0 + math.sqrt(33.0)) / 8.0
    if ok:
        ys = sorted(c["y"][0] for c in at0[0]["clusters"])
        ok &= abs(ys[0] + root) <= 1e-4 and abs(ys[1] - root) <= 1e-4
    convex = _get_objective("abs_shift")
    ccfg = ProxConfig(p=2.0, gamma=1.0, n_starts=4, inner_tol=1e-11, inner_budget=800)
    rep2 = analysis.single_valuedness_probe(convex, ((1.0,), (3.0,)), ccfg, n_points=11)
    return [
        ("double-well prox doubles at the symmetry point", ok),
        ("convex case single-valued everywhere", rep2.passed),
    ]


def _claim_prox_bounded(samples: int, seed: int):
    phi = _get_objective("negexp")
    checks = []
    rep = analysis.check_prox_bounded(phi, p=2.0)
    checks.append(("negexp suspected-unbounded",
                   rep.details["verdict"] == "suspected-unbounded"))
    for gamma in (0.1, 1.0, 10.0):
        cfg = ProxConfig(p=2.0, gamma=gamma, n_starts=3, inner_budget=600,
                         inner_tol=1e-8)
        env = eval_home(phi, 0.0, cfg)
        checks.append((f"negexp envelope -inf at gamma={gamma}", env == -math.inf))
    rep2 = analysis.check_prox_bounded(_get_objective("ncr1"), p=2.0)
    checks.append(("ncr1 bounded", rep2.details["verdict"] == "bounded"))
    rep3 = analysis.check_prox_bounded(_get_objective("quartic"), p=4.0)
    checks.append(("quartic bounded at order 4", rep3.details["verdict"] == "bounded"))
    return checks


def _claim_calm(samples: int, seed: int):
    checks = []
    spec = analysis.CalmSearchSpec(global_samples=500, seed=seed)
    rep = analysis.check_p_calm(_get_objective("notcalm"), 0.0, M=1.0, p=2.0, spec=spec)
    checks.append(("lower-bounded-but-not-calm fixture: witness found", not rep.passed))
    for M in (0.01, 1.0, 100.0):
        rep = analysis.check_p_calm(_get_objective("abs_shift"), 2.0, M=M, p=2.0, spec=spec)
        checks.append((f"global minimizer calm for M={M}", rep.passed))
    rep = analysis.check_p_calm(
        _get_objective("quartic"), 1.0 / math.sqrt(2.0), M=0.5, p=2.0, spec=spec)
    checks.append(("double-well minimizer calm", rep.passed))
    return checks


def _claim_holder(samples: int, seed: int):
    checks = []
    cfg = ProxConfig(p=2.0, gamma=1.0, n_starts=3, inner_tol=1e-12, inner_budget=900)
    nu, _ = analysis.holder_fit(_get_objective("abs_shift"), 2.0, cfg,
                                samples=max(30, samples // 300), seed=seed)
    checks.append((f"piecewise-linear envelope gradient: nu_hat={nu:.3f} >= 0.4",
                   nu >= 0.4))
    cfg2 = ProxConfig(p=2.0, gamma=0.1, n_starts=3, inner_tol=1e-12, inner_budget=900)
    nu2, _ = analysis.holder_fit(_get_objective("quartic"), 1.0 / math.sqrt(2.0),
                                 cfg2, samples=max(30, samples // 300), seed=seed)
    checks.append((f"smooth well envelope gradient: nu_hat={nu2:.3f} >= 0.4",
                   nu2 >= 0.4))
    return checks


CLAIMS = {
    "kappa": _claim_kappa,
    "basic-ineq": _claim_basic_ineq,
    "lemma22": _claim_lemma22,
    "sublevel": _claim_sublevel,
    "single-valued": _claim_single_valued,
    "prox-bounded": _claim_prox_bounded,
    "calm": _claim_calm,
    "holder": _claim_holder,
}


def _cmd_verify(args) -> int:
    names = args.claims or sorted(CLAIMS)
    unknown = [n for n in names if n not in CLAIMS]
    if unknown:
        print(f"usage error: unknown claims {unknown}; known: {sorted(CLAIMS)}",
              file=sys.stderr)
        return 2
    all_ok = True
    for name in names:
        for desc, ok in CLAIMS[name](args.samples, args.seed):
            all_ok &= ok
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {desc}")
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="highprox",
        description="High-order Moreau envelope smoothing and proximal-point toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", help="JSON config file (flags override keys)")
    run.add_argument("--solver")
    run.add_argument("--objective")
    run.add_argument("--p", type=float)
    run.add_argument("--gamma", type=float)
    run.add_argument("--eps", type=float)
    run.add_argument("--alpha", type=float)
    run.add_argument("--rho", type=float)
    run.add_argument("--budget", type=float)
    run.add_argument("--budget-mode", choices=["evals", "wallclock"], dest="budget_mode")
    run.add_argument("--seed", type=int)
    run.add_argument("--init", action="append", help="initial point 'a,b' (repeatable)")
    run.add_argument("--n-random", type=int, dest="n_random")
    run.add_argument("--box", type=float, nargs=2, metavar=("LO", "HI"))
    run.add_argument("--out", default="out")
    run.add_argument("--format", choices=["csv", "records"], default="csv")

    verify = sub.add_parser("verify", help="run analysis probes by claim id")
    verify.add_argument("claims", nargs="*", help=f"claim ids (default: all of {sorted(CLAIMS)})")
    verify.add_argument("--samples", type=int, default=10_000)
    verify.add_argument("--seed", type=int, default=0)

    for name in ("table1", "fig4", "trap"):
        ps = sub.add_parser(name, help=f"canned preset '{name}'")
        ps.add_argument("--seed", type=int, default=0)
        ps.add_argument("--out", default=f"out_{name}")
        ps.add_argument("--format", choices=["csv", "records"], default="csv")

    exp = sub.add_parser("export", help="re-emit records from a saved report")
    exp.add_argument("report")
    exp.add_argument("--format", choices=["csv", "records"], default="csv")
    exp.add_argument("--out", default="out_export")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command in ("table1", "fig4", "trap"):
        return _cmd_preset(args.command, args)
    if args.command == "export":
        return _cmd_export(args)
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
