"""Command-line interface.

Subcommands mirror the service: validate and inspect cases, optimize one
outage, screen all N-1 outages, enumerate the exact oracle on small
cases, and serve the HTTP API.  ``--case`` accepts a JSON case file, a
MATPOWER .m file, or the bundled ``rts-gmlc`` benchmark name.  The run
store root comes from ``--data-dir`` or the GRIDSHED_DATA_DIR variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .caseio import parse_case, serialize_case
from .contingency import (
    INFEASIBLE,
    NO_INSTABILITY,
    ContingencyCase,
    classify_case,
    enumerate_nk,
    run_screening,
)
from .ga import GAConfig, StageConfig, brute_force_optimal
from .matpower import parse_matpower
from .model import CaseError, Network, total_load
from .powerflow import SolverOptions
from .report import (
    RunRecord,
    RunStore,
    classification_payload,
    config_payload,
    export_convergence,
    ga_result_payload,
    screening_payload,
    write_screening_csv,
)

BUNDLED = {"rts-gmlc": "rts_gmlc.json"}


def load_case(source: str) -> Network:
    """Load a case from a file path or a bundled case name."""
    if source in BUNDLED:
        text = (
            resources.files("gridshed.data").joinpath(BUNDLED[source]).read_text()
        )
        return parse_case(text)
    path = Path(source)
    if not path.exists():
        raise CaseError(f"case file not found: {source}")
    text = path.read_text()
    if path.suffix == ".m":
        return parse_matpower(text)
    return parse_case(text)


def _data_dir(args) -> Path:
    return Path(
        args.data_dir
        or os.environ.get("GRIDSHED_DATA_DIR")
        or Path.cwd() / "gridshed-data"
    )


def _ga_config(args) -> tuple[GAConfig, StageConfig | None]:
    step = args.step
    if step is None:
        step = 1.0 if args.mode == "binary" else 0.1
    cfg = GAConfig(
        population_size=args.population,
        parents=args.parents,
        mutation_rate=args.mutation_rate,
        gene_step=step,
        max_iterations=args.iterations,
        saturate=args.saturate,
        seed=args.seed,
    )
    stages = (
        StageConfig(thresholds=tuple(args.threshold))
        if args.mode == "multistep"
        else None
    )
    return cfg, stages


def _add_ga_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["binary", "partial", "multistep"],
                   default="partial")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--saturate", type=int, default=None,
                   help="stop after this many generations without improvement")
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--population", type=int, default=50)
    p.add_argument("--parents", type=int, default=10)
    p.add_argument("--mutation-rate", type=float, default=0.1)
    p.add_argument("--step", type=float, default=None,
                   help="gene lattice step (default 0.1 partial, 1 binary)")
    p.add_argument("--threshold", type=float, action="append",
                   default=None, help="multistep importance threshold(s)")
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--store", action="store_true",
                   help="persist the run in the data dir")
    p.add_argument("--data-dir", default=None)


def _parse_outage(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(sorted({int(t) for t in text.replace("+", ",").split(",")}))
    except ValueError:
        raise CaseError(f"bad outage list: {text!r}")


def _shed_summary(result) -> str:
    if not result.shed_loads:
        return "none"
    return ", ".join(f"load {i} kept at {f:g}" for i, f in result.shed_loads)


def cmd_validate(args) -> int:
    net = load_case(args.case)
    p, q = total_load(net)
    print(f"case ok: {len(net.buses)} buses, {len(net.lines)} lines, "
          f"{len(net.generators)} generators, {net.n_loads} loads, "
          f"{len(net.shunts)} shunts")
    print(f"total load: {p:g} MW, {q:g} MVAr")
    if args.echo:
        print(serialize_case(net, indent=2))
    return 0


def cmd_optimize(args) -> int:
    net = load_case(args.case)
    outage = _parse_outage(args.outage)
    cfg, stages = _ga_config(args)
    options = SolverOptions(tolerance=args.tolerance)
    label = "lines " + "+".join(map(str, outage)) if outage else "intact"
    case = ContingencyCase(out_lines=outage, label=label)
    c = classify_case(net, case, cfg, options, stages)
    print(f"outage {label}: {c.kind}")
    if c.forced_out_loads:
        print(f"loads de-energized by the outage: "
              f"{', '.join(map(str, c.forced_out_loads))}")
    if c.kind == NO_INSTABILITY:
        print("network is safe with all loads on; nothing to shed")
    elif c.result is not None:
        r = c.result
        print(f"shed {r.shed_mw:.1f} MW / {r.shed_mvar:.1f} MVAr "
              f"({_shed_summary(r)})")
        if r.stage is not None:
            print(f"found in stage {r.stage}")
        print(f"generations: {r.generations_run}, solver calls: {r.evaluations}, "
              f"elapsed: {r.elapsed_s:.1f}s")
        if c.kind == INFEASIBLE:
            print("no safe plan found; best residual violations:")
            for lid, pct in (c.residual.line_violations if c.residual else ()):
                print(f"  line {lid} at {pct:.1f}%")
            for bid, v in (c.residual.voltage_violations if c.residual else ()):
                print(f"  bus {bid} at {v:.4f} pu")
    if args.out and c.result is not None:
        export_convergence(c.result, args.out)
        print(f"convergence history written to {args.out}")
    if args.store:
        store = RunStore(_data_dir(args))
        record = store.store_run(RunRecord(
            kind="optimize",
            config=config_payload(cfg, stages, case=args.case,
                                  outage=list(outage), mode=args.mode,
                                  tolerance=args.tolerance, kind="optimize"),
            payload=classification_payload(c),
            runtime={"elapsed_s": c.elapsed_s},
        ))
        print(f"stored run {record.run_id}")
    return 0


def cmd_screen(args) -> int:
    net = load_case(args.case)
    cfg, stages = _ga_config(args)
    options = SolverOptions(tolerance=args.tolerance)
    cases = enumerate_nk(net, args.k, args.limit) if args.k > 1 else None
    last = -1

    def progress(done, total):
        nonlocal last
        pct = (100 * done) // total
        if pct // 10 > last // 10:
            print(f"  {done}/{total} cases", file=sys.stderr)
        last = pct

    report = run_screening(
        net, cfg, options, stages,
        cases=cases, workers=args.workers,
        on_progress=progress if not args.quiet else None,
    )
    print(f"approach {report.approach}: "
          f"{report.n_no_instability} no-instability, "
          f"{report.n_solution} solution-found, "
          f"{report.n_infeasible} infeasible "
          f"({report.runtime_s:.1f}s)")
    for c in report.cases:
        if c.kind == INFEASIBLE:
            print(f"  infeasible: {c.case.label}")
    if args.out:
        write_screening_csv(report, args.out)
        print(f"summary written to {args.out}")
    if args.store:
        store = RunStore(_data_dir(args))
        record = store.store_run(RunRecord(
            kind="screening",
            config=config_payload(cfg, stages, case=args.case, mode=args.mode,
                                  tolerance=args.tolerance, kind="screening"),
            payload=screening_payload(report),
            runtime={"elapsed_s": report.runtime_s,
                     "per_case_s": list(report.per_case_s)},
        ))
        print(f"stored run {record.run_id}")
    return 0


def cmd_oracle(args) -> int:
    net = load_case(args.case)
    outage = _parse_outage(args.outage)
    from .model import apply_outage

    outaged = apply_outage(net, outage)
    live = outaged.energized_buses()
    pins = {ld.id: 0.0 for ld in outaged.loads if ld.bus not in live}
    options = SolverOptions(tolerance=args.tolerance)
    result = brute_force_optimal(
        outaged, args.step if args.step is not None else 1.0, options,
        pinned=pins, limit=args.limit,
    )
    print(f"exhaustive optimum ({'feasible' if result.feasible else 'infeasible'}): "
          f"shed {result.shed_mw:.1f} MW / {result.shed_mvar:.1f} MVAr")
    print(f"assignment: {_shed_summary(result)}")
    print(f"solver calls: {result.evaluations}, elapsed: {result.elapsed_s:.1f}s")
    if args.json:
        print(json.dumps(ga_result_payload(result)))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir or os.environ.get("GRIDSHED_DATA_DIR"))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridshed",
        description="Load-shedding optimization for planned power shutoffs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and summarize a case file")
    p.add_argument("--case", required=True)
    p.add_argument("--echo", action="store_true",
                   help="print the canonical case document")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("optimize", help="search shedding plans for one outage")
    p.add_argument("--case", required=True)
    p.add_argument("--outage", default=None,
                   help="comma-separated line ids, e.g. 77 or 12,40")
    p.add_argument("--out", default=None, help="write convergence CSV here")
    _add_ga_args(p)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("screen", help="classify all N-1 (or N-k) outages")
    p.add_argument("--case", required=True)
    p.add_argument("--out", default=None, help="write summary CSV here")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--k", type=int, default=1, help="outage depth")
    p.add_argument("--limit", type=int, default=10000,
                   help="refuse to enumerate more cases than this")
    p.add_argument("--quiet", action="store_true")
    _add_ga_args(p)
    p.set_defaults(fn=cmd_screen)

    p = sub.add_parser("oracle", help="exhaustive optimum for small cases")
    p.add_argument("--case", required=True)
    p.add_argument("--outage", default=None)
    p.add_argument("--step", type=float, default=None,
                   help="gene lattice step (default 1: binary)")
    p.add_argument("--limit", type=int, default=1_000_000)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--json", action="store_true",
                   help="also print the full result as JSON")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default=None)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CaseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
