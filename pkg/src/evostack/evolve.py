"""Genetic search over stacking-ensemble genomes, plus the base-learner grid.

A genome is a triple (level-2 learner index, internal fold count, membership
bit per registry entry): the set bits pick the level-1 members, in registry
order. Fitness is the inverse of the evaluated RMSE of the decoded stacking
ensemble. Each iteration roulette-selects parents proportionally to fitness,
produces children by paired two-way prefix/suffix crossover, carries the top
elite individuals unchanged, mutates children (resample the head with one
probability, flip one membership bit with another), and optionally removes
random members from individuals exceeding the ensemble size limit.

Fitness is memoized per (genome, evaluation-seed base) and the evaluation
seed is derived from the genome's own string form, so identical genomes get
identical RMSE no matter which worker evaluates them or when — which also
makes the best-so-far RMSE non-increasing under elitism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .ensembles import StackingSpec
from .evaluation import cross_validate, proportional_eval
from .learners import (
    BaggedNetSpec,
    ForestSpec,
    KNNSpec,
    LearnerSpec,
    MeanSpec,
    NeuralNetSpec,
    PLSSpec,
    TrainingError,
)
from .parallel import run_tasks
from .seeding import child_seed, spawn_rng

__all__ = [
    "Registry",
    "Individual",
    "GAConfig",
    "IterationRecord",
    "EvolutionTrace",
    "FitnessEvaluator",
    "build_default_registry",
    "build_basic_registry",
    "random_individual",
    "decode",
    "encode",
    "mutate_head",
    "mutate_membership",
    "crossover",
    "enforce_size_limit",
    "roulette_select",
    "fitness",
    "run_ga",
    "RMSE_FLOOR",
]

RMSE_FLOOR = 1e-9

FOLDS_MIN, FOLDS_MAX = 2, 6


# --- registry -----------------------------------------------------------

@dataclass(frozen=True)
class Registry:
    """Ordered base-learner grid with stable 1-based indices."""

    entries: tuple[LearnerSpec, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("registry must not be empty")
        names = [e.name for e in entries]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate learner names in registry: {dupes}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_index", {n: i + 1 for i, n in enumerate(names)})

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def spec_at(self, index: int) -> LearnerSpec:
        """Entry at a 1-based index."""
        if not 1 <= index <= len(self.entries):
            raise ValueError(f"registry index must lie in [1, {len(self.entries)}], got {index}")
        return self.entries[index - 1]

    def index_of(self, name: str) -> int:
        """1-based index of an entry by display name."""
        try:
            return self._index[name]
        except KeyError:
            import difflib
            hint = difflib.get_close_matches(name, self._index, n=1)
            extra = f" (did you mean '{hint[0]}'?)" if hint else ""
            raise ValueError(f"no learner named '{name}' in the registry{extra}") from None

    def by_name(self, name: str) -> LearnerSpec:
        return self.entries[self.index_of(name) - 1]

    def names(self) -> list[str]:
        return [e.name for e in self.entries]


def _net_grid() -> list[NeuralNetSpec]:
    return [NeuralNetSpec(hidden=h, max_iter=m, epsilon=e)
            for m in (50, 100, 200, 500)
            for e in (0.001, 0.005)
            for h in (10, 20)]


def build_default_registry() -> Registry:
    """The full 104-entry grid: mean, PLS, k-NN, forests, nets, bagged nets."""
    entries: list[LearnerSpec] = [MeanSpec()]
    entries += [PLSSpec(l) for l in range(2, 11)]
    entries += [KNNSpec(k, alpha, metric)
                for k in (10, 20, 30, 40, 50, 60)
                for alpha in (10.0, 20.0)
                for metric in ("manhattan", "euclidean")]
    entries += [ForestSpec(n) for n in (5, 10, 25, 50, 100, 200)]
    nets = _net_grid()
    entries += nets
    entries += [BaggedNetSpec(t, net) for t in (20, 40, 60) for net in nets]
    return Registry(tuple(entries))


def build_basic_registry() -> Registry:
    """Small, cheap subset of the full grid for desk-scale runs.

    Contains every member of the bundled hand-tuned ensemble, so hand-tuned
    seed genomes stay expressible.
    """
    entries: tuple[LearnerSpec, ...] = (
        MeanSpec(),
        PLSSpec(2), PLSSpec(3), PLSSpec(5),
        KNNSpec(10, 10.0, "manhattan"),
        KNNSpec(20, 10.0, "euclidean"),
        KNNSpec(50, 20.0, "manhattan"),
        ForestSpec(5), ForestSpec(25), ForestSpec(50),
        NeuralNetSpec(hidden=10, max_iter=50, epsilon=0.001),
        NeuralNetSpec(hidden=10, max_iter=100, epsilon=0.005),
        BaggedNetSpec(20, NeuralNetSpec(hidden=10, max_iter=100, epsilon=0.001)),
    )
    return Registry(entries)


# --- genome --------------------------------------------------------------

@dataclass(frozen=True)
class Individual:
    """GA genome: level-2 learner index (1-based), fold count, membership bits."""

    level2: int
    folds: int
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("membership bitvector must not be empty")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("membership bits must be 0 or 1")
        if not 1 <= self.level2 <= len(bits):
            raise ValueError(
                f"level-2 index must lie in [1, {len(bits)}], got {self.level2}")
        if not FOLDS_MIN <= self.folds <= FOLDS_MAX:
            raise ValueError(
                f"folds must lie in [{FOLDS_MIN}, {FOLDS_MAX}], got {self.folds}")
        if sum(bits) < 1:
            raise ValueError("membership bitvector must have at least one set bit")
        object.__setattr__(self, "bits", bits)

    @property
    def member_count(self) -> int:
        return sum(self.bits)

    def member_indices(self) -> tuple[int, ...]:
        """1-based registry indices of the selected members, ascending."""
        return tuple(i + 1 for i, b in enumerate(self.bits) if b)

    def genome_str(self) -> str:
        return f"I={self.level2};F={self.folds};V=" + "".join(map(str, self.bits))


def random_individual(registry_size: int, rng, size_limit: int | None = None) -> Individual:
    """Random genome: uniform head, sparse membership (repaired, size-limited)."""
    level2 = int(rng.integers(1, registry_size + 1))
    folds = int(rng.integers(FOLDS_MIN, FOLDS_MAX + 1))
    prob = 0.1 if size_limit is None else min(0.1, size_limit / registry_size)
    bits = (rng.random(registry_size) < prob).astype(int)
    if bits.sum() == 0:
        bits[int(rng.integers(0, registry_size))] = 1
    ind = Individual(level2, folds, tuple(int(b) for b in bits))
    if size_limit is not None:
        ind = enforce_size_limit(ind, size_limit, rng)
    return ind


def decode(ind: Individual, registry: Registry) -> StackingSpec:
    """Genome -> stacking spec: set bits pick members in registry order."""
    if len(ind.bits) != len(registry):
        raise ValueError(
            f"genome length {len(ind.bits)} does not match registry size {len(registry)}")
    members = tuple(registry.spec_at(i) for i in ind.member_indices())
    return StackingSpec(ensemble=members, l2=registry.spec_at(ind.level2),
                        folds=ind.folds)


def encode(spec: StackingSpec, registry: Registry) -> Individual:
    """Stacking spec -> genome; every member must exist in the registry by name."""
    bits = [0] * len(registry)
    for member in spec.ensemble:
        bits[registry.index_of(member.name) - 1] = 1
    return Individual(registry.index_of(spec.l2.name), spec.folds, tuple(bits))


# --- variation operators ---------------------------------------------------

def mutate_head(ind: Individual, rng) -> Individual:
    """Fair coin: resample the level-2 index or the fold count; bits untouched."""
    if rng.random() < 0.5:
        return replace(ind, level2=int(rng.integers(1, len(ind.bits) + 1)))
    return replace(ind, folds=int(rng.integers(FOLDS_MIN, FOLDS_MAX + 1)))


def _repair_bits(bits: list[int], rng) -> list[int]:
    if not any(bits):
        bits[int(rng.integers(0, len(bits)))] = 1
    return bits


def mutate_membership(ind: Individual, rng) -> Individual:
    """Flip one uniformly chosen membership bit (re-set one if that empties v)."""
    bits = list(ind.bits)
    pos = int(rng.integers(0, len(bits)))
    bits[pos] ^= 1
    return replace(ind, bits=tuple(_repair_bits(bits, rng)))


def crossover(parent: Individual, other: Individual, rng) -> Individual:
    """Child = parent's head plus parent's bit prefix joined with other's suffix.

    The cut position i is uniform in 1..|bits|; i == |bits| copies the first
    parent entirely. The head (level-2 index, folds) always comes from the
    first parent; callers compensate by crossing each pair both ways.
    """
    if len(parent.bits) != len(other.bits):
        raise ValueError("cannot cross genomes over different registries")
    i = int(rng.integers(1, len(parent.bits) + 1))
    bits = list(parent.bits[:i] + other.bits[i:])
    return Individual(parent.level2, parent.folds, tuple(_repair_bits(bits, rng)))


def enforce_size_limit(ind: Individual, limit: int, rng) -> Individual:
    """Clear uniformly chosen set bits until at most `limit` members remain."""
    if limit < 1:
        raise ValueError(f"size limit must be >= 1, got {limit}")
    set_positions = [i for i, b in enumerate(ind.bits) if b]
    excess = len(set_positions) - limit
    if excess <= 0:
        return ind
    drop = rng.choice(len(set_positions), size=excess, replace=False)
    bits = list(ind.bits)
    for j in drop:
        bits[set_positions[int(j)]] = 0
    return replace(ind, bits=tuple(bits))


def roulette_select(population, fitnesses, count: int, rng) -> list:
    """`count` independent draws with probability proportional to fitness."""
    population = list(population)
    f = np.asarray(fitnesses, dtype=float)
    if len(population) == 0 or f.shape != (len(population),):
        raise ValueError("population and fitnesses must be equal-length and non-empty")
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise ValueError("fitnesses must be positive and finite")
    idx = rng.choice(len(population), size=count, replace=True, p=f / f.sum())
    return [population[int(i)] for i in idx]


# --- fitness ----------------------------------------------------------------

@dataclass(frozen=True)
class GAConfig:
    """Parameters of the genetic search (master seed included)."""

    population_size: int
    elite_size: int = 1
    max_iterations: int = 100
    head_mutation_prob: float = 0.2
    bit_mutation_prob: float = 0.5
    size_limit: int | None = None
    fitness_mode: str = "cv"  # "cv" | "split"
    fitness_folds: int = 5
    train_ratio: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError(f"population size must be >= 2, got {self.population_size}")
        if not 0 <= self.elite_size <= self.population_size:
            raise ValueError(
                f"elite size must lie in [0, {self.population_size}], got {self.elite_size}")
        if self.max_iterations < 1:
            raise ValueError(f"max iterations must be >= 1, got {self.max_iterations}")
        for label, prob in (("head", self.head_mutation_prob),
                            ("bit", self.bit_mutation_prob)):
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"{label} mutation probability must lie in [0, 1], got {prob}")
        if self.size_limit is not None and self.size_limit < 1:
            raise ValueError(f"size limit must be >= 1, got {self.size_limit}")
        if self.fitness_mode not in ("cv", "split"):
            raise ValueError(f"fitness mode must be 'cv' or 'split', got {self.fitness_mode!r}")
        if self.fitness_folds < 2:
            raise ValueError(f"fitness folds must be >= 2, got {self.fitness_folds}")
        if not 0.0 < self.train_ratio < 1.0:
            raise ValueError(f"train ratio must lie in (0, 1), got {self.train_ratio}")


def _genome_eval_task(args):
    ind, data, registry, config, eval_seed = args
    spec = decode(ind, registry)
    try:
        if config.fitness_mode == "cv":
            report = cross_validate(spec, data, config.fitness_folds, eval_seed,
                                    with_reference=False)
        else:
            report = proportional_eval(spec, data, config.train_ratio, eval_seed,
                                       with_reference=False)
    except TrainingError as exc:
        raise TrainingError(f"genome {ind.genome_str()}: {exc}") from exc
    return report.rmse


class FitnessEvaluator:
    """Memoized genome -> RMSE evaluation, parallelizable within a generation.

    In "cv" mode the evaluation-seed base is fixed for the whole run; in
    "split" mode it changes every iteration (the split is redrawn anew each
    generation), which also invalidates the memo between generations.
    """

    def __init__(self, data: Dataset, registry: Registry, config: GAConfig,
                 *, jobs: int = 1, cache: dict | None = None):
        self.data = data
        self.registry = registry
        self.config = config
        self.jobs = jobs
        self.cache = {} if cache is None else cache
        self.evaluations = 0

    def _seed_base(self, iteration: int) -> int:
        if self.config.fitness_mode == "cv":
            return child_seed(self.config.seed, "fitness")
        return child_seed(self.config.seed, "fitness", iteration)

    def rmse_of_population(self, population, iteration: int = 0) -> list[float]:
        base = self._seed_base(iteration)
        pending: dict[Individual, None] = {}
        for ind in population:
            if (ind, base) not in self.cache:
                pending.setdefault(ind, None)
        if pending:
            tasks = [(ind, self.data, self.registry, self.config,
                      child_seed(base, ind.genome_str()))
                     for ind in pending]
            results = run_tasks(_genome_eval_task, tasks, jobs=self.jobs)
            for ind, value in zip(pending, results):
                self.cache[(ind, base)] = float(value)
            self.evaluations += len(tasks)
        return [self.cache[(ind, base)] for ind in population]

    def rmse_of(self, ind: Individual, iteration: int = 0) -> float:
        return self.rmse_of_population([ind], iteration)[0]

    def fitness_of_population(self, population, iteration: int = 0) -> list[float]:
        return [1.0 / max(r, RMSE_FLOOR)
                for r in self.rmse_of_population(population, iteration)]


def fitness(ind: Individual, data: Dataset, config: GAConfig, registry: Registry,
            cache: dict | None = None, *, iteration: int = 0, jobs: int = 1) -> float:
    """Inverse-RMSE fitness of one genome (memoized when a cache dict is given)."""
    evaluator = FitnessEvaluator(data, registry, config, jobs=jobs, cache=cache)
    return evaluator.fitness_of_population([ind], iteration)[0]


# --- the main loop ------------------------------------------------------------

@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    best_rmse: float
    mean_rmse: float
    best: Individual


@dataclass(frozen=True)
class EvolutionTrace:
    """Per-iteration records plus the global and final-iteration best genomes."""

    records: tuple[IterationRecord, ...]
    best: Individual  # global best across all iterations
    best_rmse: float
    final_best: Individual  # the last iteration's best
    final_best_rmse: float

    def to_csv(self) -> str:
        lines = ["iteration,best_rmse,mean_rmse,best_genome"]
        for r in self.records:
            lines.append(f"{r.iteration},{r.best_rmse!r},{r.mean_rmse!r},{r.best.genome_str()}")
        return "\n".join(lines) + "\n"

    def describe_best(self, registry: Registry) -> str:
        """Structured dump of the global best: level-2 learner, folds, members."""
        spec = decode(self.best, registry)
        lines = [
            f"genome: {self.best.genome_str()}",
            f"rmse: {self.best_rmse!r}",
            f"level2: {spec.l2.name}",
            f"folds: {spec.folds}",
            f"members ({len(spec.ensemble)}):",
        ]
        lines += [f"  {m.name}" for m in spec.ensemble]
        return "\n".join(lines) + "\n"


def run_ga(data: Dataset, config: GAConfig, registry: Registry, *,
           seed_genomes=(), jobs: int = 1) -> EvolutionTrace:
    """Evolve stacking genomes over the registry; returns the trace.

    The initial population takes the given seed genomes first (size-limited
    if configured), filling the rest at random. When (S - E) is odd, the last
    child slot each iteration is a clone of the iteration best with one
    membership bit flipped.
    """
    size = len(registry)
    S, E = config.population_size, config.elite_size
    init_rng = spawn_rng(config.seed, "init")
    ops_rng = spawn_rng(config.seed, "ops")

    population: list[Individual] = []
    for genome in seed_genomes:
        if len(genome.bits) != size:
            raise ValueError("seed genome length does not match the registry size")
        if config.size_limit is not None:
            genome = enforce_size_limit(genome, config.size_limit, init_rng)
        population.append(genome)
    population = population[:S]
    while len(population) < S:
        population.append(random_individual(size, init_rng, config.size_limit))

    evaluator = FitnessEvaluator(data, registry, config, jobs=jobs)
    records: list[IterationRecord] = []
    global_best: Individual | None = None
    global_best_rmse = math.inf

    for iteration in range(1, config.max_iterations + 1):
        rmses = evaluator.rmse_of_population(population, iteration)
        fitnesses = [1.0 / max(r, RMSE_FLOOR) for r in rmses]
        order = sorted(range(S), key=lambda i: (rmses[i], i))
        iter_best = population[order[0]]
        iter_best_rmse = rmses[order[0]]
        records.append(IterationRecord(iteration, iter_best_rmse,
                                       float(np.mean(rmses)), iter_best))
        if iter_best_rmse < global_best_rmse:
            global_best, global_best_rmse = iter_best, iter_best_rmse

        n_children = S - E
        n_pairs = n_children // 2
        children: list[Individual] = []
        if n_pairs:
            parents = roulette_select(population, fitnesses, 2 * n_pairs, ops_rng)
            for j in range(n_pairs):
                a, b = parents[2 * j], parents[2 * j + 1]
                children.append(crossover(a, b, ops_rng))
                children.append(crossover(b, a, ops_rng))
        mutated: list[Individual] = []
        for child in children:
            if ops_rng.random() < config.head_mutation_prob:
                child = mutate_head(child, ops_rng)
            if ops_rng.random() < config.bit_mutation_prob:
                child = mutate_membership(child, ops_rng)
            mutated.append(child)
        if n_children % 2 == 1:
            mutated.append(mutate_membership(iter_best, ops_rng))

        next_population = [population[i] for i in order[:E]] + mutated
        if config.size_limit is not None:
            next_population = [enforce_size_limit(ind, config.size_limit, ops_rng)
                               for ind in next_population]
        population = next_population

    last = records[-1]
    return EvolutionTrace(tuple(records), global_best, global_best_rmse,
                          last.best, last.best_rmse)
