"""Tests for the HTTP service: uploads, analysis, async jobs, run records."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from gridshed.caseio import parse_case, serialize_case
from gridshed.service import create_app

from conftest import star_net


FAST_GA = {
    "population_size": 16,
    "max_iterations": 30,
    "saturate": 10,
    "seed": 3,
}


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "data", job_workers=2)
    with TestClient(app) as c:
        yield c


def upload(client, net) -> str:
    resp = client.post(
        "/cases", content=serialize_case(net).encode("utf-8")
    )
    assert resp.status_code == 201, resp.text
    return resp.json()["case_id"]


def wait_for(client, job_id, timeout=30.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        doc = client.get(f"/jobs/{job_id}").json()
        if doc["state"] in ("done", "failed"):
            return doc
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish in {timeout}s")


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_upload_reports_composition_and_is_idempotent(client):
    net = star_net([20.0, 15.0, 10.0], trunk_rating=32.0)
    resp = client.post("/cases", content=serialize_case(net).encode())
    assert resp.status_code == 201
    doc = resp.json()
    assert doc["buses"] == 5 and doc["lines"] == 4 and doc["loads"] == 3
    assert doc["total_p_mw"] == pytest.approx(45.0)
    again = client.post("/cases", content=serialize_case(net).encode())
    assert again.json()["case_id"] == doc["case_id"]


def test_upload_rejects_bad_documents(client):
    resp = client.post("/cases", content=b"not json")
    assert resp.status_code == 400
    assert "error" in resp.json()["detail"]

    bad = {"base_mva": 100.0, "buses": [], "lines": [], "loads": []}
    resp = client.post("/cases", content=json.dumps(bad).encode())
    assert resp.status_code == 400


def test_upload_rejects_oversized_documents(tmp_path):
    app = create_app(tmp_path / "data", max_case_bytes=64)
    with TestClient(app) as client:
        net = star_net([20.0], trunk_rating=40.0)
        resp = client.post("/cases", content=serialize_case(net).encode())
        assert resp.status_code == 413


def test_get_case_round_trips_document(client):
    net = star_net([20.0, 15.0], trunk_rating=40.0)
    case_id = upload(client, net)
    doc = client.get(f"/cases/{case_id}").json()
    assert doc["case_id"] == case_id
    restored = parse_case(doc["document"])
    assert serialize_case(restored) == serialize_case(net)
    assert client.get("/cases/" + "0" * 32).status_code == 404


def test_analyze_intact_and_islanding(client):
    net = star_net([20.0, 15.0, 10.0], trunk_rating=60.0)
    case_id = upload(client, net)

    doc = client.post(f"/cases/{case_id}/analyze", json={}).json()
    assert doc["islanded_loads"] == []
    assert doc["safety"]["safe"] is True

    # dropping spoke 1 strands load 0
    doc = client.post(
        f"/cases/{case_id}/analyze", json={"outage": [1]}
    ).json()
    assert doc["islanded_loads"] == [0]
    assert doc["outage"] == [1]
    assert doc["safety"]["converged"] is True

    resp = client.post(f"/cases/{case_id}/analyze", json={"outage": [99]})
    assert resp.status_code == 422
    assert "unknown line id 99" in resp.json()["detail"]


def test_optimize_job_records_classification(client):
    net = star_net([20.0, 15.0, 10.0], trunk_rating=32.0)
    case_id = upload(client, net)
    resp = client.post(
        f"/cases/{case_id}/optimize",
        json={"outage": [], "mode": "binary", **FAST_GA},
    )
    assert resp.status_code == 202
    job = wait_for(client, resp.json()["job_id"])
    assert job["state"] == "done", job
    assert job["progress"] == 1.0
    assert job["run_id"]

    run = client.get(f"/runs/{job['run_id']}").json()
    assert run["kind"] == "optimize"
    assert run["config"]["case"] == case_id
    assert run["config"]["seed"] == FAST_GA["seed"]
    payload = run["payload"]
    assert payload["kind"] == "solution_found"
    assert payload["result"]["feasible"] is True
    # trunk 32 MVA cannot carry all 45 MW; something must go
    assert payload["result"]["shed_mw"] > 0.0
    assert run["runtime"]["elapsed_s"] >= 0.0


def test_optimize_validates_config_outage_and_importance(client):
    net = star_net([20.0, 15.0], trunk_rating=40.0)
    case_id = upload(client, net)

    resp = client.post(
        f"/cases/{case_id}/optimize", json={"population_size": 0}
    )
    assert resp.status_code == 422

    resp = client.post(
        f"/cases/{case_id}/optimize", json={"outage": [7], **FAST_GA}
    )
    assert resp.status_code == 422
    assert "unknown line id 7" in resp.json()["detail"]

    resp = client.post(
        f"/cases/{case_id}/optimize",
        json={"importance": {"5": 0.5}, **FAST_GA},
    )
    assert resp.status_code == 422
    assert "unknown load id 5" in resp.json()["detail"]

    resp = client.post(
        f"/cases/{case_id}/optimize",
        json={"importance": {"0": 1.5}, **FAST_GA},
    )
    assert resp.status_code == 422
    assert "outside [0, 1]" in resp.json()["detail"]

    resp = client.post(
        f"/cases/{case_id}/optimize",
        json={"mode": "partial", "gene_step": 0.3, **FAST_GA},
    )
    assert resp.status_code == 422  # 0.3 does not divide 1 evenly


def test_multistep_optimize_carries_stage_and_importance(client):
    net = star_net(
        [20.0, 15.0, 10.0], trunk_rating=32.0,
        importance=[0.95, 0.2, 0.3],
    )
    case_id = upload(client, net)
    resp = client.post(
        f"/cases/{case_id}/optimize",
        json={
            "mode": "multistep",
            "thresholds": [0.8],
            "importance": {"1": 0.1},
            **FAST_GA,
        },
    )
    assert resp.status_code == 202
    job = wait_for(client, resp.json()["job_id"])
    assert job["state"] == "done", job
    run = client.get(f"/runs/{job['run_id']}").json()
    result = run["payload"]["result"]
    assert result["stage"] is not None
    assert run["config"]["stages"]["thresholds"] == [0.8]
    assert run["config"]["importance"] == {"1": 0.1}
    if result["feasible"] and result["stage"] == 1:
        kept = dict(enumerate(result["best"]))
        assert kept[0] == 1.0  # importance 0.95 >= 0.8 stays on


def test_screen_job_covers_all_lines(client):
    net = star_net([20.0, 15.0, 10.0], trunk_rating=60.0)
    case_id = upload(client, net)
    resp = client.post(
        f"/cases/{case_id}/screen", json={"mode": "binary", **FAST_GA}
    )
    assert resp.status_code == 202
    job = wait_for(client, resp.json()["job_id"])
    assert job["state"] == "done", job
    run = client.get(f"/runs/{job['run_id']}").json()
    assert run["kind"] == "screening"
    payload = run["payload"]
    assert len(payload["cases"]) == 4
    assert (
        payload["n_no_instability"] + payload["n_solution"]
        + payload["n_infeasible"]
    ) == 4
    assert payload["approach"] == "binary-sat10"
    assert len(run["runtime"]["per_case_s"]) == 4

    resp = client.post(
        f"/cases/{case_id}/screen", json={"workers": 0, **FAST_GA}
    )
    assert resp.status_code == 422


def test_identical_inflight_submission_conflicts(tmp_path):
    app = create_app(tmp_path / "data", job_workers=1)
    with TestClient(app) as client:
        net = star_net([20.0, 15.0, 10.0, 25.0], trunk_rating=40.0)
        case_id = upload(client, net)
        # occupy the single worker so later submissions stay queued
        blocker = client.post(
            f"/cases/{case_id}/screen", json={"mode": "partial", **FAST_GA}
        )
        assert blocker.status_code == 202

        body = {"outage": [0], "mode": "binary", **FAST_GA}
        first = client.post(f"/cases/{case_id}/optimize", json=body)
        assert first.status_code == 202
        dup = client.post(f"/cases/{case_id}/optimize", json=body)
        assert dup.status_code == 409
        assert dup.json()["detail"]["job_id"] == first.json()["job_id"]

        # a different config is not a duplicate
        other = client.post(
            f"/cases/{case_id}/optimize", json={**body, "seed": 4}
        )
        assert other.status_code == 202

        done = wait_for(client, first.json()["job_id"])
        assert done["state"] == "done", done
        # once finished, the same submission is accepted again and maps
        # to the same content-addressed run record
        again = client.post(f"/cases/{case_id}/optimize", json=body)
        assert again.status_code == 202
        redo = wait_for(client, again.json()["job_id"])
        assert redo["run_id"] == done["run_id"]


def test_rerun_produces_byte_identical_record(tmp_path):
    app = create_app(tmp_path / "data", job_workers=1)
    with TestClient(app) as client:
        net = star_net([20.0, 15.0, 10.0], trunk_rating=32.0)
        case_id = upload(client, net)
        body = {"mode": "partial", **FAST_GA}
        job1 = wait_for(
            client,
            client.post(f"/cases/{case_id}/optimize", json=body).json()["job_id"],
        )
        store_dir = app.state.data_dir / "runs"
        rec_path = store_dir / f"{job1['run_id']}.json"
        first = rec_path.read_bytes()
        job2 = wait_for(
            client,
            client.post(f"/cases/{case_id}/optimize", json=body).json()["job_id"],
        )
        assert job2["run_id"] == job1["run_id"]
        assert rec_path.read_bytes() == first


def test_job_and_run_lookups_404(client):
    assert client.get("/jobs/deadbeef").status_code == 404
    assert client.get("/runs/" + "0" * 32).status_code == 404


def test_jobs_index_recovers_launched_jobs(client):
    net = star_net([20.0, 15.0], trunk_rating=40.0)
    case_id = upload(client, net)
    launched = {
        client.post(
            f"/cases/{case_id}/optimize",
            json={"mode": "binary", **FAST_GA, "seed": seed},
        ).json()["job_id"]
        for seed in (1, 2)
    }
    listing = client.get("/jobs").json()["jobs"]
    assert launched <= {j["job_id"] for j in listing}
    assert all(
        {"job_id", "kind", "case_id", "state", "progress"} <= set(j)
        for j in listing
    )
    for job_id in launched:
        wait_for(client, job_id)


def test_runs_index_lists_completed_jobs(client):
    net = star_net([20.0, 15.0], trunk_rating=40.0)
    case_id = upload(client, net)
    job = wait_for(
        client,
        client.post(
            f"/cases/{case_id}/optimize",
            json={"mode": "binary", **FAST_GA},
        ).json()["job_id"],
    )
    listing = client.get("/runs").json()["runs"]
    assert any(r["run_id"] == job["run_id"] for r in listing)
    assert all({"run_id", "kind", "created_at"} <= set(r) for r in listing)
