import json
import math
import os

import numpy as np
import pytest

from highprox import (
    ExperimentConfig,
    export_traces,
    load_report,
    relative_error,
    run_experiment,
    save_report,
)
from highprox.bench import (
    SCHEMA_VERSION,
    parse_trace_csv,
    preset_configs,
    report_to_json,
    resolve_inits,
    run_preset,
)
from highprox.core import get_objective


def test_relative_error_values(ncr1, ncr2):
    assert relative_error((1.0, 1.0), ncr1) == 0.0
    assert relative_error((1.0 + 1e-6, 1.0), ncr1) == pytest.approx(
        1e-6 / math.sqrt(2.0), rel=1e-9
    )
    assert relative_error((0.0, -1.0), ncr2) == pytest.approx(
        math.sqrt(5.0) / math.sqrt(2.0), rel=1e-12
    )


def test_relative_error_requires_minimizer(negexp):
    with pytest.raises(ValueError):
        relative_error((0.0,), negexp)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(objective="nope", solver="nm", inits=((0.0,),))
    with pytest.raises(ValueError):
        ExperimentConfig(objective="quartic", solver="nope", inits=((0.0,),))
    with pytest.raises(ValueError):
        ExperimentConfig(objective="quartic", solver="nm", inits=((0.0,),),
                         budget_mode="cpu")
    with pytest.raises(ValueError):
        ExperimentConfig(objective="quartic", solver="nm")  # no inits
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"objective": "quartic", "solver": "nm",
                                    "inits": [[0.0]], "bogus_key": 1})


def test_config_round_trip():
    cfg = ExperimentConfig(objective="ncr1", solver="SG-DSS", inits=((1.0, 2.0),),
                           budget=100, seed=3)
    assert cfg.solver == "sg_dss"
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg


def test_resolve_inits_seeded():
    cfg = ExperimentConfig(objective="ncr1", solver="nm", n_random=4,
                           box=(-4.0, 4.0), seed=9, budget=100)
    phi = get_objective("ncr1")
    a = resolve_inits(cfg, phi)
    b = resolve_inits(cfg, phi)
    assert len(a) == 4
    assert all(np.array_equal(p, q) for p, q in zip(a, b))
    assert all((-4 <= p).all() and (p <= 4).all() for p in a)


def _tiny_config(**kw):
    base = dict(objective="quartic", solver="sg_dss", alpha=0.3,
                inits=((2.0,),), budget=400, seed=1, max_iter=10_000)
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_experiment_budget_and_flags():
    rep = run_experiment(_tiny_config())
    assert len(rep.records) == 1
    rec = rep.records[0]
    assert rec["evals"] <= 400
    assert rec["pass_flags"]["budget_ok"]
    assert rec["elapsed"] is None  # evals mode omits wall-clock times
    # relative error is recomputable from the stored final point
    phi = get_objective("quartic")
    assert rec["relative_error"] == relative_error(rec["final_point"], phi)


def test_report_determinism_bytes():
    r1 = report_to_json(run_experiment(_tiny_config()))
    r2 = report_to_json(run_experiment(_tiny_config()))
    assert r1 == r2


def test_worker_pool_matches_sequential():
    cfg = _tiny_config(inits=((2.0,), (-1.5,), (0.3,)))
    seq = report_to_json(run_experiment(cfg))
    os.environ["HIGHPROX_WORKERS"] = "2"
    try:
        par = report_to_json(run_experiment(cfg))
    finally:
        del os.environ["HIGHPROX_WORKERS"]
    assert seq == par


def test_save_load_and_schema_rejection(tmp_path):
    rep = run_experiment(_tiny_config())
    path = save_report(rep, tmp_path / "report.json")
    payload = load_report(path)
    assert payload["schema_version"] == SCHEMA_VERSION
    assert len(payload["records"]) == 1

    bad = json.loads(path.read_text())
    bad["schema_version"] = 999
    p2 = tmp_path / "bad.json"
    p2.write_text(json.dumps(bad))
    with pytest.raises(ValueError):
        load_report(p2)


def test_export_traces_csv_round_trip(tmp_path):
    rep = run_experiment(_tiny_config())
    paths = export_traces(rep, fmt="csv", outdir=tmp_path)
    assert len(paths) == 1
    cols = parse_trace_csv(paths[0])
    rec = rep.records[0]
    assert len(cols["k"]) == rec["iterations"] + 1
    assert cols["relerr"][-1] == rec["relative_error"]  # exact round trip
    assert cols["step_norm"][0] is None


def test_export_traces_records_format(tmp_path):
    rep = run_experiment(_tiny_config())
    paths = export_traces(rep, fmt="records", outdir=tmp_path)
    lines = paths[0].read_text().strip().splitlines()
    rec = rep.records[0]
    assert len(lines) == rec["iterations"] + 1
    row = json.loads(lines[-1])
    assert float(row["relerr"]) == rec["relative_error"]


def test_export_empty_report(tmp_path):
    from highprox.bench import Report

    rep = Report(schema_version=SCHEMA_VERSION, config={})
    assert export_traces(rep, fmt="csv", outdir=tmp_path) == []


def test_export_rejects_unknown_format(tmp_path):
    rep = run_experiment(_tiny_config())
    with pytest.raises(ValueError):
        export_traces(rep, fmt="xml", outdir=tmp_path)


def test_hippa_record_carries_bounds():
    cfg = ExperimentConfig(objective="ncr1", solver="hippa", p=2.0, gamma=50.0,
                           eps=1e-5, inits=((0.5, 0.5),), budget=20_000,
                           seed=0, n_starts=3, inner_tol=1e-11, inner_budget=1500)
    rep = run_experiment(cfg)
    rec = rep.records[0]
    assert rec["bounds"]["iteration_bound"] > 0
    assert rec["bounds"]["criticality_bound"] == pytest.approx(1e-5 / 50.0)
    assert rec["pass_flags"]["monotone_ok"]
    if rec["status"] == "step_tol":
        assert rec["pass_flags"]["certificate_ok"]


def test_preset_configs_exist():
    for name in ("table1", "fig4", "trap"):
        cfgs = preset_configs(name, seed=0)
        assert cfgs
    with pytest.raises(ValueError):
        preset_configs("table9")


def test_trap_preset_outcome():
    rep = run_preset("trap", seed=0)
    by_label = {r["label"]: r for r in rep.records}
    hippa_final = np.asarray(by_label["hippa_p1.25"]["final_point"])
    gss_final = np.asarray(by_label["sg_gss"]["final_point"])
    assert np.linalg.norm(hippa_final - np.array([1.0, 1.0])) <= 1e-3
    assert np.linalg.norm(gss_final - np.array([0.0, -1.0])) <= 0.05
