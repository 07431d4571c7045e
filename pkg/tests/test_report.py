"""Tests for run persistence, payload builders, and CSV export."""

import dataclasses
import json

import numpy as np
import pytest

from gridshed.contingency import (
    ContingencyCase,
    ScreeningReport,
    classify_case,
    run_screening,
)
from gridshed.ga import GAConfig, GAResult, GenerationStat, run_ga
from gridshed.powerflow import evaluate_safety
from gridshed.report import (
    CaseStore,
    ChecksumError,
    ComparisonRow,
    RunNotFoundError,
    RunRecord,
    RunStore,
    canonical_json,
    classification_payload,
    comparison_row,
    config_payload,
    export_convergence,
    ga_result_from_payload,
    ga_result_payload,
    safety_payload,
    screening_payload,
    write_comparison_table,
    write_screening_csv,
)

from conftest import star_net


# -- canonical JSON ---------------------------------------------------------


def test_canonical_json_is_sorted_and_compact():
    text = canonical_json({"b": 1, "a": [1, 2], "c": {"y": 0, "x": 1}})
    assert text == '{"a":[1,2],"b":1,"c":{"x":1,"y":0}}'


def test_canonical_json_keeps_unicode_and_rejects_nan():
    assert canonical_json({"s": "naïve"}) == '{"s":"naïve"}'
    with pytest.raises(ValueError):
        canonical_json({"x": float("nan")})


# -- run records ------------------------------------------------------------


def test_run_id_depends_only_on_kind_and_config():
    a = RunRecord(kind="ga", config={"seed": 1}, payload={"x": 1}).with_id()
    b = RunRecord(kind="ga", config={"seed": 1}, payload={"y": 2}).with_id()
    c = RunRecord(kind="ga", config={"seed": 2}, payload={"x": 1}).with_id()
    assert a.run_id == b.run_id
    assert a.run_id != c.run_id
    assert len(a.run_id) == 32
    assert all(ch in "0123456789abcdef" for ch in a.run_id)


def test_with_id_preserves_existing_id():
    rec = RunRecord(kind="ga", config={}, payload={}, run_id="abc")
    assert rec.with_id().run_id == "abc"


def test_store_and_load_round_trip(tmp_path):
    store = RunStore(tmp_path)
    rec = store.store_run(
        RunRecord(kind="ga", config={"seed": 3}, payload={"shed_mw": 12.5})
    )
    assert rec.created_at is not None
    loaded = store.load_run(rec.run_id)
    assert loaded.kind == "ga"
    assert loaded.config == {"seed": 3}
    assert loaded.payload == {"shed_mw": 12.5}
    assert loaded.created_at == rec.created_at


def test_record_bytes_are_identical_across_re_runs(tmp_path):
    store = RunStore(tmp_path)
    rec1 = store.store_run(
        RunRecord(kind="screening", config={"seed": 0}, payload={"n": 3})
    )
    first = store.record_bytes(rec1.run_id)
    rec2 = store.store_run(
        RunRecord(
            kind="screening",
            config={"seed": 0},
            payload={"n": 3},
            runtime={"runtime_s": 99.0},
        )
    )
    assert rec2.run_id == rec1.run_id
    assert store.record_bytes(rec2.run_id) == first
    # wall-clock information lives only in the sidecar
    assert b"runtime" not in first
    assert b"created_at" not in first
    meta = json.loads(
        (store.runs_dir / f"{rec1.run_id}.meta.json").read_text()
    )
    assert meta["runtime"] == {"runtime_s": 99.0}


def test_index_lists_each_run_once(tmp_path):
    store = RunStore(tmp_path)
    rec = store.store_run(RunRecord(kind="ga", config={"s": 1}, payload={}))
    store.store_run(RunRecord(kind="ga", config={"s": 1}, payload={}))
    other = store.store_run(RunRecord(kind="ga", config={"s": 2}, payload={}))
    runs = store.list_runs()
    assert [r["run_id"] for r in runs] == [rec.run_id, other.run_id]
    assert all(set(r) == {"run_id", "kind", "created_at"} for r in runs)


def test_missing_run_raises(tmp_path):
    store = RunStore(tmp_path)
    with pytest.raises(RunNotFoundError):
        store.load_run("0" * 32)
    with pytest.raises(RunNotFoundError):
        store.record_bytes("0" * 32)


def test_tampered_record_fails_checksum(tmp_path):
    store = RunStore(tmp_path)
    rec = store.store_run(
        RunRecord(kind="ga", config={"seed": 5}, payload={"shed_mw": 10.0})
    )
    path = store.runs_dir / f"{rec.run_id}.json"
    path.write_text(path.read_text().replace("10.0", "11.0"))
    with pytest.raises(ChecksumError):
        store.load_run(rec.run_id)


def test_case_store_is_content_addressed(tmp_path):
    store = CaseStore(tmp_path)
    text = canonical_json({"base_mva": 100.0})
    cid = store.put(text)
    assert cid == store.put(text)
    assert cid in store
    assert store.get(cid) == text
    assert "f" * 32 not in store
    with pytest.raises(RunNotFoundError):
        store.get("f" * 32)


# -- payload builders -------------------------------------------------------


def test_safety_payload_shape(two_bus):
    rep = evaluate_safety(two_bus)
    doc = safety_payload(rep)
    assert doc["safe"] is True and doc["converged"] is True
    assert doc["iterations"] >= 1
    assert dict(doc["bus_voltage"])[0] == 1.0
    assert len(doc["line_loading_pct"]) == 1
    assert doc["line_violations"] == [] and doc["voltage_violations"] == []
    canonical_json(doc)  # must be JSON-clean


def _small_result() -> GAResult:
    net = star_net([20.0, 15.0, 10.0], trunk_rating=32.0)
    cfg = GAConfig(population_size=16, max_iterations=25, saturate=8, seed=7)
    return run_ga(net, cfg, pinned={2: 1.0})


def test_ga_result_payload_round_trip():
    res = _small_result()
    doc = ga_result_payload(res)
    back = ga_result_from_payload(json.loads(canonical_json(doc)))
    np.testing.assert_array_equal(back.best, res.best)
    assert not back.best.flags.writeable
    assert back.best_fitness == res.best_fitness
    assert back.feasible == res.feasible
    assert back.shed_mw == res.shed_mw
    assert back.shed_loads == res.shed_loads
    assert back.history == res.history
    assert back.generations_run == res.generations_run
    assert back.evaluations == res.evaluations
    assert back.pinned == ((2, 1.0),)


def test_ga_result_payload_trace_flag():
    res = _small_result()
    staged = dataclasses.replace(res, stage=1, stage_trace=(res,))
    with_trace = ga_result_payload(staged)
    assert len(with_trace["stage_trace"]) == 1
    assert "stage_trace" not in ga_result_payload(staged, include_trace=False)
    back = ga_result_from_payload(with_trace)
    assert back.stage == 1
    assert len(back.stage_trace) == 1
    assert back.stage_trace[0].shed_mw == res.shed_mw


def test_classification_and_screening_payloads():
    net = star_net([20.0, 15.0, 10.0], trunk_rating=32.0)
    cfg = GAConfig(population_size=16, max_iterations=25, saturate=8, seed=7)
    report = run_screening(net, cfg)
    doc = screening_payload(report)
    assert doc["approach"] == report.approach
    assert len(doc["cases"]) == len(report.cases)
    first = doc["cases"][0]
    assert set(first) == {
        "label", "out_lines", "kind", "forced_out_loads", "result",
        "base_safety", "residual",
    }
    canonical_json(doc)


def test_config_payload_includes_stages_and_extras():
    from gridshed.ga import StageConfig

    cfg = GAConfig(seed=11)
    doc = config_payload(
        cfg, stages=StageConfig(thresholds=(0.8,)), case_id="abc"
    )
    assert doc["seed"] == 11
    assert doc["stages"]["thresholds"] == [0.8]
    assert doc["case_id"] == "abc"
    canonical_json(doc)


# -- CSV writers ------------------------------------------------------------


def _report(approach, n_inf, n_sol, n_noinst, runtime) -> ScreeningReport:
    return ScreeningReport(
        cases=(),
        n_no_instability=n_noinst,
        n_solution=n_sol,
        n_infeasible=n_inf,
        runtime_s=runtime,
        per_case_s=(),
        approach=approach,
        config=GAConfig(),
        stages=None,
    )


def test_screening_csv_exact_text(tmp_path):
    path = tmp_path / "summary.csv"
    n = write_screening_csv(
        [
            _report("partial-sat25", 3, 16, 85, 142.66),
            _report("binary-sat25", 3, 16, 85, 131.4),
        ],
        path,
    )
    text = path.read_text()
    assert text == (
        "approach,n_infeasible,n_solution,n_no_instability,runtime_s\n"
        "partial-sat25,3,16,85,142.7\n"
        "binary-sat25,3,16,85,131.4\n"
    )
    assert n == len(text.encode())


def test_screening_csv_accepts_single_report(tmp_path):
    path = tmp_path / "one.csv"
    write_screening_csv(_report("binary-nocond", 0, 2, 1, 3.04), path)
    assert path.read_text().splitlines()[1] == "binary-nocond,0,2,1,3"


def test_comparison_table_exact_text(tmp_path):
    rows = [
        ComparisonRow(
            line_id=8,
            partial_shed_mw=390.85,
            partial_sheds=((6, 0.0), (23, 0.5)),
            binary_shed_mw=415.0,
            binary_sheds=(6, 23),
        ),
        ComparisonRow(
            line_id=41,
            partial_shed_mw=0.0,
            partial_sheds=(),
            binary_shed_mw=0.0,
            binary_sheds=(),
        ),
    ]
    path = tmp_path / "table.csv"
    write_comparison_table(rows, path)
    assert path.read_text() == (
        "line,partial_shed_mw,partial_sheds,binary_shed_mw,binary_sheds\n"
        "8,390.85,6(0)|23(0.5),415,6|23\n"
        "41,0,,0,\n"
    )


def test_comparison_row_from_results():
    res = _small_result()
    row = comparison_row(4, res, res)
    assert row.line_id == 4
    assert row.partial_shed_mw == res.shed_mw
    assert row.partial_sheds == res.shed_loads
    assert row.binary_sheds == tuple(i for i, _ in res.shed_loads)


def test_convergence_export_exact_text(tmp_path):
    history = (
        GenerationStat(0, 10041.5, 41.5),
        GenerationStat(1, 10043.25, 43.25),
    )
    res = dataclasses.replace(_small_result(), history=history)
    path = tmp_path / "conv.csv"
    export_convergence(res, path)
    assert path.read_text() == (
        "series,generation,remaining_mw\n"
        "best,0,41.5\n"
        "best,1,43.25\n"
    )
    export_convergence({"seed 1": history[:1]}, path)
    assert path.read_text() == (
        "series,generation,remaining_mw\nseed 1,0,41.5\n"
    )


def test_screening_report_round_trips_through_store(tmp_path):
    net = star_net([20.0, 15.0, 10.0], trunk_rating=32.0)
    cfg = GAConfig(population_size=16, max_iterations=25, saturate=8, seed=7)
    report = run_screening(net, cfg)
    store = RunStore(tmp_path)
    rec = store.store_run(
        RunRecord(
            kind="screening",
            config=config_payload(cfg, approach=report.approach),
            payload=screening_payload(report),
        )
    )
    loaded = store.load_run(rec.run_id)
    assert loaded.payload == json.loads(canonical_json(screening_payload(report)))
    kinds = [c["kind"] for c in loaded.payload["cases"]]
    assert kinds == [c.kind for c in report.cases]
