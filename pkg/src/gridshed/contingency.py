"""N-1 / N-k contingency screening.

Every outage case lands in one of three classes:

- ``no_instability``: the network with the outage applied is already safe
  with all loads on; no search is run (verified cheaply first).
- ``solution_found``: the GA found a safe shedding plan.
- ``infeasible``: no safe plan was found within the search budget.

Loads de-energized by the outage itself (islanded from the slack) are
pinned to zero before the search; such cases are never ``no_instability``
because load is lost by construction.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .ga import (
    FitnessEvaluator,
    GAConfig,
    GAResult,
    StageConfig,
    derive_seed,
    run_ga,
    run_multistep,
)
from .model import Network, apply_outage
from .powerflow import SafetyReport, SolverOptions

NO_INSTABILITY = "no_instability"
SOLUTION_FOUND = "solution_found"
INFEASIBLE = "infeasible"

DEFAULT_NK_LIMIT = 10000


@dataclass(frozen=True)
class ContingencyCase:
    out_lines: tuple[int, ...]
    label: str


@dataclass(frozen=True, eq=False)
class Classification:
    case: ContingencyCase
    kind: str
    result: GAResult | None
    base_safety: SafetyReport | None
    residual: SafetyReport | None
    forced_out_loads: tuple[int, ...]
    elapsed_s: float


@dataclass(frozen=True, eq=False)
class ScreeningReport:
    cases: tuple[Classification, ...]
    n_no_instability: int
    n_solution: int
    n_infeasible: int
    runtime_s: float
    per_case_s: tuple[float, ...]
    approach: str
    config: GAConfig
    stages: StageConfig | None


def enumerate_n1(net: Network) -> tuple[ContingencyCase, ...]:
    """One case per in-service line, in ascending line id order."""
    return tuple(
        ContingencyCase(out_lines=(ln.id,), label=f"line {ln.id}")
        for ln in sorted(net.lines, key=lambda l: l.id)
        if ln.in_service
    )


def enumerate_nk(
    net: Network, k: int, limit: int = DEFAULT_NK_LIMIT
) -> tuple[ContingencyCase, ...]:
    """All k-line outage combinations (ascending id tuples).  Refuses to
    enumerate more than ``limit`` cases."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ids = sorted(ln.id for ln in net.lines if ln.in_service)
    count = math.comb(len(ids), k)
    if count > limit:
        raise ValueError(
            f"{count} outage combinations exceed the limit of {limit}"
        )
    return tuple(
        ContingencyCase(
            out_lines=combo, label="lines " + "+".join(str(i) for i in combo)
        )
        for combo in itertools.combinations(ids, k)
    )


def approach_label(config: GAConfig, stages: StageConfig | None) -> str:
    mode = "multistep" if stages is not None else config.mode
    cond = "nocond" if config.saturate is None else f"sat{config.saturate}"
    return f"{mode}-{cond}"


def classify_case(
    net: Network,
    case: ContingencyCase,
    config: GAConfig | None = None,
    options: SolverOptions | None = None,
    stages: StageConfig | None = None,
) -> Classification:
    """Classify one outage case, running the GA only when needed."""
    t0 = time.perf_counter()
    cfg = config or GAConfig()
    outaged = apply_outage(net, case.out_lines)
    live = outaged.energized_buses()
    dead_loads = tuple(ld.id for ld in outaged.loads if ld.bus not in live)

    evaluator = FitnessEvaluator(outaged, options)
    base = None
    if not dead_loads:
        base = evaluator.safety([1.0] * net.n_loads)
        if base.safe:
            return Classification(
                case=case,
                kind=NO_INSTABILITY,
                result=None,
                base_safety=base,
                residual=None,
                forced_out_loads=(),
                elapsed_s=time.perf_counter() - t0,
            )

    pins = {i: 0.0 for i in dead_loads}
    if stages is not None:
        result = run_multistep(
            outaged, stages, cfg, options, pinned=pins, evaluator=evaluator
        )
    else:
        result = run_ga(outaged, cfg, options, pinned=pins, evaluator=evaluator)
    residual = None if result.feasible else evaluator.safety(result.best)
    return Classification(
        case=case,
        kind=SOLUTION_FOUND if result.feasible else INFEASIBLE,
        result=result,
        base_safety=base,
        residual=residual,
        forced_out_loads=dead_loads,
        elapsed_s=time.perf_counter() - t0,
    )


def _case_config(config: GAConfig, case: ContingencyCase) -> GAConfig:
    # each case evolves on its own child seed so results do not depend on
    # scheduling or on which other cases run
    return dataclasses.replace(config, seed=derive_seed(config.seed, case.label))


def _classify_job(args) -> Classification:
    net, case, cfg, options, stages = args
    return classify_case(net, case, cfg, options, stages)


def run_screening(
    net: Network,
    config: GAConfig | None = None,
    options: SolverOptions | None = None,
    stages: StageConfig | None = None,
    *,
    cases: Sequence[ContingencyCase] | None = None,
    workers: int = 1,
    on_progress: Callable[[int, int], None] | None = None,
) -> ScreeningReport:
    """Classify every case (default: all N-1 line outages).

    ``workers`` > 1 distributes cases over a process pool; results are
    assembled in case order and are identical to a serial run because
    each case draws from its own seed stream.
    """
    t0 = time.perf_counter()
    cfg = config or GAConfig()
    if workers < 1:
        raise ValueError("workers must be positive")
    case_list = tuple(cases if cases is not None else enumerate_n1(net))
    jobs = [
        (net, case, _case_config(cfg, case), options, stages)
        for case in case_list
    ]

    results: list[Classification] = []
    if workers == 1 or len(jobs) <= 1:
        for i, job in enumerate(jobs):
            results.append(_classify_job(job))
            if on_progress is not None:
                on_progress(i + 1, len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            futures = [pool.submit(_classify_job, job) for job in jobs]
            done = 0
            for fut in futures:
                results.append(fut.result())
                done += 1
                if on_progress is not None:
                    on_progress(done, len(jobs))

    kinds = [r.kind for r in results]
    return ScreeningReport(
        cases=tuple(results),
        n_no_instability=kinds.count(NO_INSTABILITY),
        n_solution=kinds.count(SOLUTION_FOUND),
        n_infeasible=kinds.count(INFEASIBLE),
        runtime_s=time.perf_counter() - t0,
        per_case_s=tuple(r.elapsed_s for r in results),
        approach=approach_label(cfg, stages),
        config=cfg,
        stages=stages,
    )
