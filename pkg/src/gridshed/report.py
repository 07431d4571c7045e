"""Result persistence and CSV export.

Run records are content-addressed JSON files: the run id is the hash of
(kind, config), the payload carries only deterministic results (elapsed
times and timestamps live in a ``.meta.json`` sidecar), and every record
embeds a checksum that is verified on load.  Identical configuration and
seed therefore produce byte-identical record files, regardless of worker
scheduling.

CSV output uses fixed column orders and C-locale number formatting.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .contingency import Classification, ScreeningReport
from .ga import GAConfig, GAResult, GenerationStat, StageConfig
from .powerflow import SafetyReport


class ChecksumError(ValueError):
    """A stored record does not match its embedded checksum."""


class RunNotFoundError(KeyError):
    pass


def canonical_json(obj) -> str:
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False,
        allow_nan=False,
    )


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _fmt(x) -> str:
    """Locale-independent short number formatting for CSV cells."""
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


@dataclass(frozen=True)
class RunRecord:
    kind: str
    config: Mapping
    payload: Mapping
    run_id: str = ""
    created_at: str | None = None
    runtime: Mapping | None = None

    def with_id(self) -> "RunRecord":
        if self.run_id:
            return self
        rid = _sha256(canonical_json({"kind": self.kind, "config": self.config}))
        return dataclasses.replace(self, run_id=rid[:32])


class RunStore:
    """Append-only store of run records under one root directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.index_path = self.root / "index.jsonl"
        self.runs_dir.mkdir(parents=True, exist_ok=True)

    SCHEMA_VERSION = 1

    def store_run(self, record: RunRecord) -> RunRecord:
        record = record.with_id()
        body = {
            "schema_version": self.SCHEMA_VERSION,
            "run_id": record.run_id,
            "kind": record.kind,
            "config": record.config,
            "payload": record.payload,
        }
        text = canonical_json({"record": body, "sha256": _sha256(canonical_json(body))})
        path = self.runs_dir / f"{record.run_id}.json"
        known = path.exists()
        _atomic_write(path, text + "\n")
        created = record.created_at or datetime.now(timezone.utc).isoformat()
        meta = {"created_at": created, "runtime": record.runtime or {}}
        _atomic_write(
            self.runs_dir / f"{record.run_id}.meta.json",
            json.dumps(meta, indent=2) + "\n",
        )
        if not known:
            with self.index_path.open("a", encoding="utf-8") as fh:
                fh.write(
                    canonical_json(
                        {"run_id": record.run_id, "kind": record.kind,
                         "created_at": created}
                    )
                    + "\n"
                )
        return dataclasses.replace(record, created_at=created)

    def load_run(self, run_id: str) -> RunRecord:
        path = self.runs_dir / f"{run_id}.json"
        if not path.exists():
            raise RunNotFoundError(run_id)
        doc = json.loads(path.read_text(encoding="utf-8"))
        body = doc.get("record", {})
        if _sha256(canonical_json(body)) != doc.get("sha256"):
            raise ChecksumError(f"run {run_id} failed checksum verification")
        meta_path = self.runs_dir / f"{run_id}.meta.json"
        created = runtime = None
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            created = meta.get("created_at")
            runtime = meta.get("runtime")
        return RunRecord(
            kind=body["kind"],
            config=body["config"],
            payload=body["payload"],
            run_id=body["run_id"],
            created_at=created,
            runtime=runtime,
        )

    def record_bytes(self, run_id: str) -> bytes:
        path = self.runs_dir / f"{run_id}.json"
        if not path.exists():
            raise RunNotFoundError(run_id)
        return path.read_bytes()

    def list_runs(self) -> list[dict]:
        if not self.index_path.exists():
            return []
        out = []
        for line in self.index_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


class CaseStore:
    """Content-addressed storage of case documents (canonical form)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put(self, canonical_text: str) -> str:
        case_id = _sha256(canonical_text)[:32]
        path = self.root / f"{case_id}.json"
        if not path.exists():
            _atomic_write(path, canonical_text + "\n")
        return case_id

    def get(self, case_id: str) -> str:
        path = self.root / f"{case_id}.json"
        if not path.exists():
            raise RunNotFoundError(case_id)
        return path.read_text(encoding="utf-8").rstrip("\n")

    def __contains__(self, case_id: str) -> bool:
        return (self.root / f"{case_id}.json").exists()


# -- payload builders ------------------------------------------------------


def safety_payload(report: SafetyReport) -> dict:
    sol = report.solution
    return {
        "safe": report.safe,
        "converged": report.converged,
        "worst_line_loading": report.worst_line_loading,
        "v_extremes": list(report.v_extremes) if report.v_extremes else None,
        "line_violations": [[i, v] for i, v in report.line_violations],
        "voltage_violations": [[i, v] for i, v in report.voltage_violations],
        "line_loading_pct": [
            [lid, float(sol.line_loading_pct[k])]
            for k, lid in enumerate(sol.line_ids)
        ],
        "bus_voltage": [
            [bid, float(sol.v_mag[k])] for k, bid in enumerate(sol.bus_ids)
        ],
        "iterations": sol.iterations,
    }


def ga_result_payload(result: GAResult, include_trace: bool = True) -> dict:
    out = {
        "best": [float(g) for g in result.best],
        "fitness": {
            "scalar": result.best_fitness.scalar,
            "safe": result.best_fitness.safe,
            "remaining_mw": result.best_fitness.remaining_mw,
            "remaining_mvar": result.best_fitness.remaining_mvar,
        },
        "feasible": result.feasible,
        "shed_mw": result.shed_mw,
        "shed_mvar": result.shed_mvar,
        "shed_loads": [[i, f] for i, f in result.shed_loads],
        "history": [
            [h.generation, h.best_scalar, h.remaining_mw] for h in result.history
        ],
        "generations_run": result.generations_run,
        "evaluations": result.evaluations,
        "stage": result.stage,
        "pinned": [[i, f] for i, f in result.pinned],
    }
    if include_trace and result.stage_trace:
        out["stage_trace"] = [
            ga_result_payload(r, include_trace=False) for r in result.stage_trace
        ]
    return out


def ga_result_from_payload(doc: Mapping) -> GAResult:
    best = np.array(doc["best"], dtype=float)
    best.setflags(write=False)
    from .ga import FitnessValue  # local import avoids a cycle at load time

    fit = doc["fitness"]
    return GAResult(
        best=best,
        best_fitness=FitnessValue(
            scalar=fit["scalar"],
            safe=fit["safe"],
            remaining_mw=fit["remaining_mw"],
            remaining_mvar=fit["remaining_mvar"],
        ),
        feasible=doc["feasible"],
        shed_mw=doc["shed_mw"],
        shed_mvar=doc["shed_mvar"],
        shed_loads=tuple((int(i), float(f)) for i, f in doc["shed_loads"]),
        history=tuple(
            GenerationStat(int(g), float(s), float(m)) for g, s, m in doc["history"]
        ),
        generations_run=doc["generations_run"],
        elapsed_s=0.0,
        evaluations=doc.get("evaluations", 0),
        stage=doc.get("stage"),
        stage_trace=tuple(
            ga_result_from_payload(r) for r in doc.get("stage_trace", [])
        ),
        pinned=tuple((int(i), float(f)) for i, f in doc.get("pinned", [])),
    )


def classification_payload(c: Classification) -> dict:
    return {
        "label": c.case.label,
        "out_lines": list(c.case.out_lines),
        "kind": c.kind,
        "forced_out_loads": list(c.forced_out_loads),
        "result": ga_result_payload(c.result) if c.result else None,
        "base_safety": safety_payload(c.base_safety) if c.base_safety else None,
        "residual": safety_payload(c.residual) if c.residual else None,
    }


def screening_payload(report: ScreeningReport) -> dict:
    return {
        "approach": report.approach,
        "n_no_instability": report.n_no_instability,
        "n_solution": report.n_solution,
        "n_infeasible": report.n_infeasible,
        "cases": [classification_payload(c) for c in report.cases],
    }


def config_payload(
    config: GAConfig,
    stages: StageConfig | None = None,
    **extra,
) -> dict:
    doc = dataclasses.asdict(config)
    if stages is not None:
        doc["stages"] = {
            "thresholds": list(stages.thresholds),
            "overrides": [
                dataclasses.asdict(o) if o else None for o in stages.overrides
            ]
            if stages.overrides
            else None,
        }
    doc.update(extra)
    return doc


# -- CSV writers -----------------------------------------------------------


def write_screening_csv(
    reports: ScreeningReport | Sequence[ScreeningReport], path: str | Path
) -> int:
    """Write the class-count summary table, one row per screening run.

    Columns, in order: approach, n_infeasible, n_solution,
    n_no_instability, runtime_s.  Returns bytes written.
    """
    if isinstance(reports, ScreeningReport):
        reports = [reports]
    lines = ["approach,n_infeasible,n_solution,n_no_instability,runtime_s"]
    for r in reports:
        runtime = round(r.runtime_s, 1)
        lines.append(
            f"{r.approach},{r.n_infeasible},{r.n_solution},"
            f"{r.n_no_instability},{_fmt(runtime)}"
        )
    return _write_text(path, "\n".join(lines) + "\n")


@dataclass(frozen=True)
class ComparisonRow:
    """One line outage compared across shedding modes."""

    line_id: int
    partial_shed_mw: float
    partial_sheds: tuple[tuple[int, float], ...]  # (load id, remaining fraction)
    binary_shed_mw: float
    binary_sheds: tuple[int, ...]


def comparison_row(
    line_id: int, partial: GAResult, binary: GAResult
) -> ComparisonRow:
    return ComparisonRow(
        line_id=line_id,
        partial_shed_mw=partial.shed_mw,
        partial_sheds=partial.shed_loads,
        binary_shed_mw=binary.shed_mw,
        binary_sheds=tuple(i for i, _ in binary.shed_loads),
    )


def write_comparison_table(
    rows: Sequence[ComparisonRow], path: str | Path
) -> int:
    """Write the per-outage mode comparison.

    Partial assignments print as ``id(fraction)`` with the remaining
    fraction, multiple assignments joined by ``|``; binary columns list
    fully shed load ids.  Returns bytes written.
    """
    lines = ["line,partial_shed_mw,partial_sheds,binary_shed_mw,binary_sheds"]
    for r in rows:
        partial = "|".join(f"{i}({_fmt(f)})" for i, f in r.partial_sheds)
        binary = "|".join(str(i) for i in r.binary_sheds)
        lines.append(
            f"{r.line_id},{_fmt(round(r.partial_shed_mw, 4))},{partial},"
            f"{_fmt(round(r.binary_shed_mw, 4))},{binary}"
        )
    return _write_text(path, "\n".join(lines) + "\n")


def export_convergence(
    results: Mapping[str, GAResult | Sequence[GenerationStat]] | GAResult,
    path: str | Path,
) -> int:
    """Write best-so-far remaining load per generation for plotting.

    Columns: series, generation, remaining_mw.  Accepts a single result
    (series name "best") or a mapping of named results/histories.
    """
    if isinstance(results, GAResult):
        results = {"best": results}
    lines = ["series,generation,remaining_mw"]
    for name, item in results.items():
        history = item.history if isinstance(item, GAResult) else item
        for st in history:
            lines.append(f"{name},{st.generation},{_fmt(st.remaining_mw)}")
    return _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: str | Path, text: str) -> int:
    data = text.encode("utf-8")
    Path(path).write_bytes(data)
    return len(data)
