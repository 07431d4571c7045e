"""Genetic-algorithm search for minimal safe load shedding.

A chromosome assigns every load a remaining fraction on the gene lattice
{0, step, ..., 1}; step 1 gives binary shedding, step 0.1 the partial
mode.  Fitness rewards safe states with a large constant and otherwise
counts the remaining load, so the search orders safe states by unserved
demand while infeasible states still rank by how much load they keep:

    fitness = 10000 * safe + sum_i g_i * (p_i + q_i)

with P in MW and Q in MVAr.  The multistep variant first pins loads above
an importance threshold to stay on and only frees them when no protected
solution exists.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .model import Network
from .powerflow import CompiledCase, SafetyReport, SolverOptions

SAFE_BONUS = 10000.0

# stream tags keep every stochastic draw on an independent, replayable
# substream of the run seed
_TAG_INIT = 1
_TAG_SELECT = 2
_TAG_BREED = 3
_TAG_MUT = 4


def _rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(keys)))


def derive_seed(seed: int, label: str) -> int:
    """A replayable child seed for a labelled piece of work."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def gene_lattice(step: float) -> np.ndarray:
    """Admissible gene values {0, step, 2*step, ..., 1}."""
    if not 0.0 < step <= 1.0:
        raise ValueError("gene_step must lie in (0, 1]")
    levels = round(1.0 / step)
    if abs(levels * step - 1.0) > 1e-9:
        raise ValueError("gene_step must divide 1 evenly")
    values = np.arange(levels + 1) * step
    values[-1] = 1.0
    return values


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    parents: int = 10
    selection: str = "tournament"
    tournament_size: int = 3
    mutation_rate: float = 0.1
    gene_step: float = 0.1
    ones_bias: float = 0.9
    max_iterations: int = 500
    saturate: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 1 <= self.parents:
            raise ValueError("parents must be positive")
        if self.selection not in ("tournament", "roulette"):
            raise ValueError(f"unknown selection scheme {self.selection!r}")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        gene_lattice(self.gene_step)
        if not 0.0 <= self.ones_bias <= 1.0:
            raise ValueError("ones_bias must lie in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.saturate is not None and self.saturate < 1:
            raise ValueError("saturate must be positive when set")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def mode(self) -> str:
        return "binary" if self.gene_step == 1.0 else "partial"


@dataclass(frozen=True)
class StageConfig:
    """Importance-staged search: thresholds are tried from most to least
    protective (ascending threshold value), then a final unconstrained
    stage.  ``overrides`` optionally replaces the GA config per stage and
    must then have ``len(thresholds) + 1`` entries."""

    thresholds: tuple[float, ...] = (0.8,)
    overrides: tuple[GAConfig | None, ...] | None = None

    def __post_init__(self):
        if not self.thresholds:
            raise ValueError("at least one threshold is required")
        for t in self.thresholds:
            if not 0.0 <= t <= 1.0:
                raise ValueError("thresholds must lie in [0, 1]")
        if self.overrides is not None and len(self.overrides) != len(self.thresholds) + 1:
            raise ValueError("overrides must cover every stage plus the final one")


@dataclass(frozen=True)
class FitnessValue:
    scalar: float
    safe: bool
    remaining_mw: float
    remaining_mvar: float

    @property
    def remaining_load(self) -> float:
        return self.remaining_mw + self.remaining_mvar


@dataclass(frozen=True)
class GenerationStat:
    generation: int
    best_scalar: float
    remaining_mw: float


@dataclass(frozen=True, eq=False)
class GAResult:
    best: np.ndarray
    best_fitness: FitnessValue
    feasible: bool
    shed_mw: float
    shed_mvar: float
    shed_loads: tuple[tuple[int, float], ...]  # (load id, remaining fraction)
    history: tuple[GenerationStat, ...]
    generations_run: int
    elapsed_s: float
    evaluations: int = 0
    stage: int | None = None
    stage_trace: tuple["GAResult", ...] = ()
    pinned: tuple[tuple[int, float], ...] = ()


class FitnessEvaluator:
    """Memoizing fitness oracle for one (network, solver options) pair.

    ``evaluate`` is bit-identical to scaling the loads, solving and
    summing the remaining demand through the public functions; the
    compiled state only removes repeated setup work.
    """

    def __init__(self, net: Network, options: SolverOptions | None = None):
        self.net = net
        self.case = CompiledCase(net, options)
        self.n_loads = net.n_loads
        self._cache: dict[bytes, FitnessValue] = {}
        self.n_evaluations = 0
        self.n_solves = 0

    def evaluate(self, genes, use_cache: bool = True) -> FitnessValue:
        genes = np.ascontiguousarray(genes, dtype=float)
        self.n_evaluations += 1
        key = genes.tobytes() if use_cache else b""
        if use_cache:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        solution, p, q = self.case.solve(genes)
        report = self.case.assess(solution)
        value = _fitness_from(report.safe, p, q)
        self.n_solves += 1
        if use_cache and len(self._cache) < 200_000:
            self._cache[key] = value
        return value

    __call__ = evaluate

    def safety(self, genes) -> SafetyReport:
        """Full safety report for one chromosome (uncached)."""
        solution, _, _ = self.case.solve(np.ascontiguousarray(genes, dtype=float))
        return self.case.assess(solution)


def _fitness_from(safe: bool, p_scaled, q_scaled) -> FitnessValue:
    p_tot = float(sum(p_scaled))
    q_tot = float(sum(q_scaled))
    remaining = p_tot + q_tot
    scalar = remaining + SAFE_BONUS if safe else remaining
    return FitnessValue(
        scalar=scalar, safe=safe, remaining_mw=p_tot, remaining_mvar=q_tot
    )


def fitness(
    net: Network, chromosome, options: SolverOptions | None = None
) -> FitnessValue:
    """Safety-dominated fitness of one shedding plan on a network."""
    return FitnessEvaluator(net, options).evaluate(chromosome)


# -- operators -----------------------------------------------------------


def init_population(
    n_loads: int, config: GAConfig, rng: np.random.Generator
) -> np.ndarray:
    """Population biased toward keeping loads on: each gene is 1 with
    probability ``ones_bias``, otherwise uniform on the lattice below 1.
    Row 0 is forced to all ones."""
    lattice = gene_lattice(config.gene_step)
    shape = (config.population_size, n_loads)
    keep = rng.random(shape) < config.ones_bias
    draws = rng.integers(0, len(lattice) - 1, size=shape)
    pop = np.where(keep, 1.0, lattice[draws])
    pop[0, :] = 1.0
    return pop


def _scalars(fitnesses: Sequence) -> np.ndarray:
    return np.array([getattr(f, "scalar", f) for f in fitnesses], dtype=float)


def select_parents(
    population: np.ndarray,
    fitnesses: Sequence,
    config: GAConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Pick ``config.parents`` chromosomes by tournament (best of k drawn
    without replacement) or fitness-proportional roulette."""
    n = len(population)
    scalars = _scalars(fitnesses)
    if len(scalars) != n:
        raise ValueError("population and fitnesses differ in length")
    picks = []
    if config.selection == "tournament":
        k = min(config.tournament_size, n)
        for _ in range(config.parents):
            entrants = rng.choice(n, size=k, replace=False)
            picks.append(entrants[int(np.argmax(scalars[entrants]))])
    else:
        total = scalars.sum()
        if total > 0:
            p = scalars / total
            picks = list(rng.choice(n, size=config.parents, replace=True, p=p))
        else:
            picks = list(rng.integers(0, n, size=config.parents))
    return population[np.array(picks, dtype=int)].copy()


def crossover_single_point(
    a: np.ndarray, b: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Swap tails at a cut drawn uniformly from the interior positions."""
    if len(a) != len(b):
        raise ValueError("parents differ in length")
    if len(a) < 2:
        raise ValueError("chromosome too short for single-point crossover")
    cut = int(rng.integers(1, len(a)))
    return (
        np.concatenate([a[:cut], b[cut:]]),
        np.concatenate([b[:cut], a[cut:]]),
    )


def mutate(
    chromosome: np.ndarray, config: GAConfig, rng: np.random.Generator
) -> np.ndarray:
    """Resample each gene with probability ``mutation_rate`` to a
    different lattice value (uniform over the alternatives, so a mutated
    gene always changes; in binary mode this is a bit flip)."""
    lattice = gene_lattice(config.gene_step)
    n = len(chromosome)
    hit = rng.random(n) < config.mutation_rate
    draws = rng.integers(0, len(lattice) - 1, size=n)
    levels = np.rint(np.asarray(chromosome) / config.gene_step).astype(int)
    # a draw landing on the current level maps to the excluded top level
    draws = np.where(draws == levels, len(lattice) - 1, draws)
    return np.where(hit, lattice[draws], chromosome)


# -- best-candidate ordering ----------------------------------------------


def _shed_ids(genes: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(genes < 1.0))


def _improves(cand_fit: FitnessValue, cand: np.ndarray,
              inc_fit: FitnessValue, inc: np.ndarray) -> bool:
    """Strictly better: higher fitness, then fewer touched loads, then
    lexicographically smallest shed-id tuple (a stable, reportable pick
    among equal optima)."""
    if cand_fit.scalar != inc_fit.scalar:
        return cand_fit.scalar > inc_fit.scalar
    c_ones = int(np.sum(cand == 1.0))
    i_ones = int(np.sum(inc == 1.0))
    if c_ones != i_ones:
        return c_ones > i_ones
    return _shed_ids(cand) < _shed_ids(inc)


def _normalize_pins(
    pinned: Mapping[int, float] | None, n_loads: int, lattice: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    if not pinned:
        return np.array([], dtype=int), np.array([])
    idx = []
    vals = []
    for load_id in sorted(pinned):
        if not 0 <= load_id < n_loads:
            raise ValueError(f"pinned load id {load_id} out of range")
        f = float(pinned[load_id])
        level = int(np.rint(f / (lattice[1] if len(lattice) > 1 else 1.0)))
        level = min(max(level, 0), len(lattice) - 1)
        if abs(lattice[level] - f) > 1e-9:
            raise ValueError(f"pinned fraction {f} for load {load_id} is off-lattice")
        idx.append(load_id)
        vals.append(float(lattice[level]))
    return np.array(idx, dtype=int), np.array(vals)


# -- search drivers --------------------------------------------------------


def run_ga(
    net: Network,
    config: GAConfig | None = None,
    options: SolverOptions | None = None,
    *,
    pinned: Mapping[int, float] | None = None,
    evaluator: FitnessEvaluator | None = None,
    on_generation: Callable[[int, int], None] | None = None,
) -> GAResult:
    """Evolve shedding plans for a network (typically one with an outage
    applied) and return the best plan found.

    ``pinned`` fixes genes of specific loads: 1.0 protects a load from
    shedding, 0.0 marks loads that an outage physically de-energized.
    Identical seeds give identical results; the evolution is elitist, so
    the best fitness per generation never decreases.
    """
    t0 = time.perf_counter()
    cfg = config or GAConfig()
    ev = evaluator or FitnessEvaluator(net, options)
    n = net.n_loads
    lattice = gene_lattice(cfg.gene_step)
    pin_idx, pin_val = _normalize_pins(pinned, n, lattice)
    solves_before = ev.n_solves

    pop = init_population(n, cfg, _rng(cfg.seed, _TAG_INIT))
    if len(pin_idx):
        pop[:, pin_idx] = pin_val
    fits = [ev.evaluate(c) for c in pop]

    best = pop[0].copy()
    best_fit = fits[0]
    for c, f in zip(pop[1:], fits[1:]):
        if _improves(f, c, best_fit, best):
            best, best_fit = c.copy(), f

    history = [GenerationStat(0, best_fit.scalar, best_fit.remaining_mw)]
    stall = 0
    generations = 0
    for gen in range(1, cfg.max_iterations + 1):
        parents = select_parents(pop, fits, cfg, _rng(cfg.seed, _TAG_SELECT, gen))
        brng = _rng(cfg.seed, _TAG_BREED, gen)
        mrng = _rng(cfg.seed, _TAG_MUT, gen)
        kids: list[np.ndarray] = []
        while len(kids) < cfg.population_size:
            i, j = brng.integers(0, len(parents), size=2)
            if n >= 2:
                c1, c2 = crossover_single_point(parents[i], parents[j], brng)
            else:
                c1, c2 = parents[i].copy(), parents[j].copy()
            for child in (c1, c2):
                child = mutate(child, cfg, mrng)
                if len(pin_idx):
                    child[pin_idx] = pin_val
                kids.append(child)
        kids = kids[: cfg.population_size]
        kid_fits = [ev.evaluate(c) for c in kids]

        for c, f in zip(kids, kid_fits):
            if _improves(f, c, best_fit, best):
                best, best_fit = c.copy(), f

        # elitist truncation: survivors are the best of old plus new
        merged = np.vstack([pop, np.array(kids)])
        merged_fits = fits + kid_fits
        order = np.argsort(-_scalars(merged_fits), kind="stable")[
            : cfg.population_size
        ]
        pop = merged[order]
        fits = [merged_fits[k] for k in order]

        generations = gen
        improved = best_fit.scalar > history[-1].best_scalar
        history.append(GenerationStat(gen, best_fit.scalar, best_fit.remaining_mw))
        stall = 0 if improved else stall + 1
        if on_generation is not None:
            on_generation(gen, cfg.max_iterations)
        if cfg.saturate is not None and stall >= cfg.saturate:
            break

    return _result_from(
        net, best, best_fit, tuple(history), generations,
        time.perf_counter() - t0, ev.n_solves - solves_before,
        pin_idx, pin_val,
    )


def _result_from(
    net, best, best_fit, history, generations, elapsed, solves, pin_idx, pin_val,
    stage=None, trace=(),
) -> GAResult:
    base_p, base_q = (
        float(sum(ld.p_mw for ld in net.loads)),
        float(sum(ld.q_mvar for ld in net.loads)),
    )
    best = np.array(best, dtype=float)
    best.setflags(write=False)
    return GAResult(
        best=best,
        best_fitness=best_fit,
        feasible=best_fit.safe,
        shed_mw=base_p - best_fit.remaining_mw,
        shed_mvar=base_q - best_fit.remaining_mvar,
        shed_loads=tuple(
            (int(i), float(best[i])) for i in np.flatnonzero(best < 1.0)
        ),
        history=history,
        generations_run=generations,
        elapsed_s=elapsed,
        evaluations=solves,
        stage=stage,
        stage_trace=trace,
        pinned=tuple(
            (int(i), float(v)) for i, v in zip(pin_idx, pin_val)
        ),
    )


def run_multistep(
    net: Network,
    stages: StageConfig | None = None,
    config: GAConfig | None = None,
    options: SolverOptions | None = None,
    *,
    pinned: Mapping[int, float] | None = None,
    evaluator: FitnessEvaluator | None = None,
    on_generation: Callable[[int, int], None] | None = None,
) -> GAResult:
    """Importance-staged search: protect loads above each threshold in
    turn (most protective stage first) and return the first feasible
    stage's plan; the final stage runs unconstrained.

    Loads already pinned to 0 by the caller (de-energized by the outage)
    stay pinned in every stage.
    """
    stages = stages or StageConfig()
    cfg = config or GAConfig()
    ev = evaluator or FitnessEvaluator(net, options)
    base_pins = dict(pinned or {})

    plan: list[tuple[float | None, GAConfig]] = []
    for i, thr in enumerate(sorted(stages.thresholds)):
        stage_cfg = stages.overrides[i] if stages.overrides else None
        plan.append((thr, stage_cfg or cfg))
    final_cfg = (stages.overrides[-1] if stages.overrides else None) or cfg
    plan.append((None, final_cfg))

    trace: list[GAResult] = []
    for stage_no, (thr, stage_cfg) in enumerate(plan, start=1):
        pins = dict(base_pins)
        if thr is not None:
            for ld in net.loads:
                if ld.importance >= thr and ld.id not in pins:
                    pins[ld.id] = 1.0
        stage_cfg = dataclasses.replace(
            stage_cfg, seed=derive_seed(stage_cfg.seed, f"stage{stage_no}")
        )
        result = run_ga(
            net, stage_cfg, options,
            pinned=pins, evaluator=ev, on_generation=on_generation,
        )
        result = dataclasses.replace(result, stage=stage_no)
        trace.append(result)
        if result.feasible:
            return dataclasses.replace(result, stage_trace=tuple(trace))
    return dataclasses.replace(trace[-1], stage_trace=tuple(trace))


def brute_force_optimal(
    net: Network,
    gene_step: float = 1.0,
    options: SolverOptions | None = None,
    *,
    pinned: Mapping[int, float] | None = None,
    evaluator: FitnessEvaluator | None = None,
    limit: int = 1_000_000,
) -> GAResult:
    """Exhaustive lattice search; the reference answer for small cases.

    Raises ValueError when the lattice has more than ``limit`` points.
    Ties resolve exactly like the GA's best tracking, so results are
    directly comparable.
    """
    t0 = time.perf_counter()
    lattice = gene_lattice(gene_step)
    n = net.n_loads
    pin_idx, pin_val = _normalize_pins(pinned, n, lattice)
    free = np.setdiff1d(np.arange(n), pin_idx)
    points = len(lattice) ** len(free)
    if points > limit:
        raise ValueError(
            f"lattice has {points} points, above the limit of {limit}"
        )
    ev = evaluator or FitnessEvaluator(net, options)
    solves_before = ev.n_solves

    genes = np.empty(n)
    if len(pin_idx):
        genes[pin_idx] = pin_val
    best = None
    best_fit = None
    for combo in itertools.product(lattice, repeat=len(free)):
        genes[free] = combo
        f = ev.evaluate(genes, use_cache=False)
        if best is None or _improves(f, genes, best_fit, best):
            best, best_fit = genes.copy(), f
    return _result_from(
        net, best, best_fit, (), 0, time.perf_counter() - t0,
        ev.n_solves - solves_before, pin_idx, pin_val,
    )


def sample_importance(
    n_loads: int,
    alpha: float = 5.0,
    beta: float = 1.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Draw load importance weights from Beta(alpha, beta); the default
    skews toward 1 so most load is hard to shed."""
    if n_loads < 0:
        raise ValueError("n_loads must be non-negative")
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    rng = rng or np.random.default_rng()
    return rng.beta(alpha, beta, size=n_loads)
