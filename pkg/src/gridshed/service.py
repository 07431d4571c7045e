"""HTTP service over the toolkit.

Cases are uploaded once and addressed by content hash; optimization and
screening run as async jobs that record their results in the run store,
so every number a client displays traces back to a run id.  Identical
in-flight submissions are rejected with 409 rather than queued twice.
"""

from __future__ import annotations

import dataclasses
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

from .caseio import parse_case, serialize_case
from .contingency import (
    ContingencyCase,
    classify_case,
    enumerate_n1,
    run_screening,
)
from .ga import GAConfig, StageConfig
from .model import CaseError, Network, SchemaError, apply_outage, total_load
from .powerflow import SolverOptions
from .report import (
    CaseStore,
    RunNotFoundError,
    RunRecord,
    RunStore,
    canonical_json,
    classification_payload,
    config_payload,
    safety_payload,
    screening_payload,
)

DEFAULT_MAX_CASE_BYTES = 4_000_000


class JobState:
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


class _Job:
    def __init__(self, kind: str, case_id: str, dedupe_key: str):
        self.job_id = uuid.uuid4().hex
        self.kind = kind
        self.case_id = case_id
        self.dedupe_key = dedupe_key
        self.state = JobState.QUEUED
        self.progress = 0.0
        self.error: str | None = None
        self.run_id: str | None = None

    def snapshot(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "case_id": self.case_id,
            "state": self.state,
            "progress": round(self.progress, 4),
            "error": self.error,
            "run_id": self.run_id,
        }


class _Registry:
    """Thread-safe job table with in-flight duplicate detection."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, _Job] = {}
        self._inflight: dict[str, str] = {}

    def submit(self, job: _Job) -> str | None:
        """Register a job; returns the existing job id when an identical
        submission is still queued or running."""
        with self._lock:
            existing = self._inflight.get(job.dedupe_key)
            if existing is not None:
                return existing
            self._jobs[job.job_id] = job
            self._inflight[job.dedupe_key] = job.job_id
            return None

    def get(self, job_id: str) -> _Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def all(self) -> list["_Job"]:
        with self._lock:
            return list(self._jobs.values())

    def advance(self, job: _Job, progress: float) -> None:
        with self._lock:
            job.progress = max(job.progress, min(progress, 1.0))

    def finish(self, job: _Job, *, run_id: str | None = None,
               error: str | None = None) -> None:
        with self._lock:
            if error is None:
                job.state = JobState.DONE
                job.progress = 1.0
                job.run_id = run_id
            else:
                job.state = JobState.FAILED
                job.error = error
            self._inflight.pop(job.dedupe_key, None)


class OptimizeRequest(BaseModel):
    outage: list[int] = Field(default_factory=list)
    mode: Literal["binary", "partial", "multistep"] = "partial"
    seed: int = 0
    population_size: int = 50
    parents: int = 10
    selection: Literal["tournament", "roulette"] = "tournament"
    tournament_size: int = 3
    mutation_rate: float = 0.1
    gene_step: float | None = None
    ones_bias: float = 0.9
    max_iterations: int = 500
    saturate: int | None = None
    thresholds: list[float] = Field(default_factory=lambda: [0.8])
    importance: dict[int, float] | None = None
    tolerance: float = 1e-8


class ScreenRequest(BaseModel):
    mode: Literal["binary", "partial", "multistep"] = "partial"
    seed: int = 0
    population_size: int = 50
    parents: int = 10
    selection: Literal["tournament", "roulette"] = "tournament"
    tournament_size: int = 3
    mutation_rate: float = 0.1
    gene_step: float | None = None
    ones_bias: float = 0.9
    max_iterations: int = 500
    saturate: int | None = None
    thresholds: list[float] = Field(default_factory=lambda: [0.8])
    workers: int = 1
    tolerance: float = 1e-8


class AnalyzeRequest(BaseModel):
    outage: list[int] = Field(default_factory=list)


def _ga_config(req) -> tuple[GAConfig, StageConfig | None]:
    step = req.gene_step
    if step is None:
        step = 1.0 if req.mode == "binary" else 0.1
    try:
        cfg = GAConfig(
            population_size=req.population_size,
            parents=req.parents,
            selection=req.selection,
            tournament_size=req.tournament_size,
            mutation_rate=req.mutation_rate,
            gene_step=step,
            ones_bias=req.ones_bias,
            max_iterations=req.max_iterations,
            saturate=req.saturate,
            seed=req.seed,
        )
        stages = (
            StageConfig(thresholds=tuple(req.thresholds))
            if req.mode == "multistep"
            else None
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return cfg, stages


def _check_outage(net: Network, outage: list[int]) -> tuple[int, ...]:
    known = {ln.id for ln in net.lines}
    for i in outage:
        if i not in known:
            raise HTTPException(status_code=422, detail=f"unknown line id {i}")
    return tuple(sorted(set(outage)))


def _apply_importance(net: Network, override: dict[int, float] | None) -> Network:
    if not override:
        return net
    for i, v in override.items():
        if not 0 <= i < net.n_loads:
            raise HTTPException(status_code=422, detail=f"unknown load id {i}")
        if not 0.0 <= v <= 1.0:
            raise HTTPException(
                status_code=422, detail=f"importance for load {i} outside [0, 1]"
            )
    loads = tuple(
        dataclasses.replace(ld, importance=override.get(ld.id, ld.importance))
        for ld in net.loads
    )
    return dataclasses.replace(net, loads=loads)


def create_app(
    data_dir: str | Path | None = None,
    *,
    max_case_bytes: int = DEFAULT_MAX_CASE_BYTES,
    job_workers: int = 2,
) -> FastAPI:
    root = Path(
        data_dir
        or os.environ.get("GRIDSHED_DATA_DIR")
        or Path.cwd() / "gridshed-data"
    )
    cases = CaseStore(root / "cases")
    runs = RunStore(root)
    registry = _Registry()
    executor = ThreadPoolExecutor(max_workers=job_workers)

    app = FastAPI(title="gridshed", version="0.1.0")
    app.state.data_dir = root

    def load_network(case_id: str) -> Network:
        try:
            return parse_case(cases.get(case_id))
        except RunNotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown case {case_id}")

    def composition(net: Network, case_id: str) -> dict:
        p, q = total_load(net)
        return {
            "case_id": case_id,
            "buses": len(net.buses),
            "lines": len(net.lines),
            "generators": len(net.generators),
            "loads": net.n_loads,
            "shunts": len(net.shunts),
            "total_p_mw": p,
            "total_q_mvar": q,
        }

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/cases", status_code=201)
    async def upload_case(request: Request):
        body = await request.body()
        if len(body) > max_case_bytes:
            raise HTTPException(
                status_code=413,
                detail=f"case document exceeds {max_case_bytes} bytes",
            )
        try:
            net = parse_case(body)
        except SchemaError as exc:
            raise HTTPException(
                status_code=400, detail={"error": exc.message, "path": exc.path}
            )
        except CaseError as exc:
            raise HTTPException(status_code=400, detail={"error": str(exc)})
        case_id = cases.put(serialize_case(net))
        return composition(net, case_id)

    @app.get("/cases/{case_id}")
    def get_case(case_id: str):
        net = load_network(case_id)
        doc = composition(net, case_id)
        doc["document"] = serialize_case(net)
        return doc

    @app.post("/cases/{case_id}/analyze")
    def analyze(case_id: str, req: AnalyzeRequest):
        net = load_network(case_id)
        outage = _check_outage(net, req.outage)
        outaged = apply_outage(net, outage)
        live = outaged.energized_buses()
        dead = [ld.id for ld in outaged.loads if ld.bus not in live]
        from .ga import FitnessEvaluator

        evaluator = FitnessEvaluator(outaged)
        genes = [0.0 if i in set(dead) else 1.0 for i in range(net.n_loads)]
        report = evaluator.safety(genes)
        return {
            "case_id": case_id,
            "outage": list(outage),
            "islanded_loads": dead,
            "safety": safety_payload(report),
        }

    def submit(job: _Job, work) -> dict:
        existing = registry.submit(job)
        if existing is not None:
            raise HTTPException(
                status_code=409,
                detail={"error": "identical job already in flight",
                        "job_id": existing},
            )
        def run():
            job.state = JobState.RUNNING
            try:
                run_id = work(job)
                registry.finish(job, run_id=run_id)
            except Exception as exc:  # surfaced via the job, not the log
                registry.finish(job, error=f"{type(exc).__name__}: {exc}")
        executor.submit(run)
        return {"job_id": job.job_id}

    @app.post("/cases/{case_id}/optimize", status_code=202)
    def optimize(case_id: str, req: OptimizeRequest):
        net = load_network(case_id)
        outage = _check_outage(net, req.outage)
        net = _apply_importance(net, req.importance)
        cfg, stages = _ga_config(req)
        options = SolverOptions(tolerance=req.tolerance)
        config_doc = config_payload(
            cfg,
            stages,
            case=case_id,
            outage=list(outage),
            mode=req.mode,
            importance={str(k): v for k, v in (req.importance or {}).items()},
            tolerance=req.tolerance,
            kind="optimize",
        )
        dedupe = canonical_json({"case": case_id, "config": config_doc})

        def work(job: _Job) -> str:
            case = ContingencyCase(
                out_lines=outage,
                label="lines " + "+".join(map(str, outage)) if outage else "intact",
            )
            c = classify_case(net, case, cfg, options, stages)
            registry.advance(job, 0.95)
            record = runs.store_run(
                RunRecord(
                    kind="optimize",
                    config=config_doc,
                    payload=classification_payload(c),
                    runtime={"elapsed_s": c.elapsed_s},
                )
            )
            return record.run_id

        return submit(_Job("optimize", case_id, dedupe), work)

    @app.post("/cases/{case_id}/screen", status_code=202)
    def screen(case_id: str, req: ScreenRequest):
        net = load_network(case_id)
        if req.workers < 1:
            raise HTTPException(status_code=422, detail="workers must be positive")
        cfg, stages = _ga_config(req)
        options = SolverOptions(tolerance=req.tolerance)
        config_doc = config_payload(
            cfg,
            stages,
            case=case_id,
            mode=req.mode,
            tolerance=req.tolerance,
            kind="screening",
        )
        dedupe = canonical_json({"case": case_id, "config": config_doc})

        def work(job: _Job) -> str:
            report = run_screening(
                net, cfg, options, stages,
                workers=req.workers,
                on_progress=lambda done, total: registry.advance(
                    job, done / max(total, 1)
                ),
            )
            record = runs.store_run(
                RunRecord(
                    kind="screening",
                    config=config_doc,
                    payload=screening_payload(report),
                    runtime={
                        "elapsed_s": report.runtime_s,
                        "per_case_s": list(report.per_case_s),
                    },
                )
            )
            return record.run_id

        return submit(_Job("screening", case_id, dedupe), work)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = registry.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        return job.snapshot()

    @app.get("/jobs")
    def list_jobs():
        # lets a reconnecting client recover every job it may have launched
        return {"jobs": [job.snapshot() for job in registry.all()]}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        try:
            record = runs.load_run(run_id)
        except RunNotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        return {
            "run_id": record.run_id,
            "kind": record.kind,
            "config": record.config,
            "payload": record.payload,
            "created_at": record.created_at,
            "runtime": record.runtime,
        }

    @app.get("/runs")
    def list_runs():
        return {"runs": runs.list_runs()}

    return app
