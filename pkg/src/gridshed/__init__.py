"""gridshed: load-shedding optimization for public safety power shutoffs.

Build a network, take lines out, and search for the least amount of load
to shed (weighted by importance) that returns the system to a safe
operating state, with N-1 screening, reproducible run records, a CLI and
an HTTP service on top.
"""

from .model import (
    Bus,
    CaseError,
    Generator,
    Line,
    Load,
    Network,
    SchemaError,
    Shunt,
    apply_outage,
    scale_loads,
    total_load,
)
from .caseio import parse_case, serialize_case
from .matpower import parse_matpower
from .powerflow import (
    AdmittanceMatrix,
    PowerFlowError,
    PowerFlowSolution,
    SafetyReport,
    SolverOptions,
    build_ybus,
    evaluate_safety,
    line_loading_percent,
    solve,
)
from .ga import (
    FitnessEvaluator,
    FitnessValue,
    GAConfig,
    GAResult,
    StageConfig,
    brute_force_optimal,
    crossover_single_point,
    fitness,
    init_population,
    mutate,
    run_ga,
    run_multistep,
    sample_importance,
    select_parents,
)
from .contingency import (
    Classification,
    ContingencyCase,
    ScreeningReport,
    classify_case,
    enumerate_n1,
    enumerate_nk,
    run_screening,
)
from .report import (
    RunRecord,
    RunStore,
    export_convergence,
    write_comparison_table,
    write_screening_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AdmittanceMatrix",
    "Bus",
    "CaseError",
    "Classification",
    "ContingencyCase",
    "FitnessEvaluator",
    "FitnessValue",
    "GAConfig",
    "GAResult",
    "Generator",
    "Line",
    "Load",
    "Network",
    "PowerFlowError",
    "PowerFlowSolution",
    "RunRecord",
    "RunStore",
    "SafetyReport",
    "SchemaError",
    "ScreeningReport",
    "Shunt",
    "SolverOptions",
    "StageConfig",
    "apply_outage",
    "brute_force_optimal",
    "build_ybus",
    "classify_case",
    "crossover_single_point",
    "enumerate_n1",
    "enumerate_nk",
    "evaluate_safety",
    "export_convergence",
    "fitness",
    "init_population",
    "line_loading_percent",
    "mutate",
    "parse_case",
    "parse_matpower",
    "run_ga",
    "run_multistep",
    "run_screening",
    "sample_importance",
    "scale_loads",
    "select_parents",
    "serialize_case",
    "solve",
    "total_load",
    "write_comparison_table",
    "write_screening_csv",
]
