"""Selection, genetic operators, the depth ceiling and the generational loop."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import archive as arch
from .backends import default_workers, evaluate
from .compiler import compile_tree, render_expression
from .core import (OPERATORS, Backend, Config, Direction, Kernel, KernelKind, Node, Operator,
                   Tree, Variable, copy_node, iter_nodes, node_count, operator, replace_at,
                   subtree_at)
from .data import ColumnStore, class_count
from .errors import LabelOutOfRange, UnscoredPopulation
from .fitness import score
from .generate import Population, build_subtree, gen_population, random_terminal

MAX_RETRIES = 10

# parameters the interactive menu may change while a run is in flight
MUTABLE_FIELDS = ("generation_max", "tournament_size", "op_reproduction", "op_mutation",
                  "op_crossover")


# -- budget ------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorBudget:
    n_reproduce: int
    n_mutate: int
    n_crossover: int

    def as_tuple(self) -> tuple:
        return (self.n_reproduce, self.n_mutate, self.n_crossover)


def operator_budget(pop: int, fractions: Sequence) -> OperatorBudget:
    """Split ``pop`` by largest remainder; ties go to the earlier operator."""
    fractions = [Fraction(f) if not isinstance(f, float) else Fraction(repr(f))
                 for f in fractions]
    total = sum(fractions)
    quotas = [f * pop / total for f in fractions]
    counts = [math.floor(q) for q in quotas]
    leftover = pop - sum(counts)
    order = sorted(range(3), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return OperatorBudget(*counts)


# -- random streams ----------------------------------------------------------

@dataclass
class RunRngs:
    init: np.random.Generator
    select: np.random.Generator
    operators: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RunRngs":
        return cls(*(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)))


def fresh_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> np.uint64(1))


# -- selection ---------------------------------------------------------------

def _rank_key(tree: Tree, direction: Direction):
    value = tree.fitness if direction is Direction.MINIMIZE else -tree.fitness
    return (value, tree.node_count, tree.id)


def best_tree(trees: Sequence[Tree], direction: Direction) -> Tree:
    return min(trees, key=lambda t: _rank_key(t, direction))


def tournament_select(trees: Sequence[Tree], size: int, direction: Direction,
                      rng: np.random.Generator) -> Tree:
    """Best of ``size`` distinct trees; ties go to fewer nodes, then lower id."""
    trees = list(trees)
    if any(t.fitness is None for t in trees):
        raise UnscoredPopulation("tournament over unscored trees")
    picks = rng.choice(len(trees), size=min(size, len(trees)), replace=False)
    return best_tree([trees[i] for i in picks], direction)


# -- operators ---------------------------------------------------------------

def op_reproduce(parent: Tree, tree_id: Optional[int] = None,
                 generation: Optional[int] = None) -> Tree:
    return Tree(copy_node(parent.root),
                id=parent.id if tree_id is None else tree_id,
                birth_generation=parent.birth_generation if generation is None else generation)


def prune_to_depth(tree: Tree, depth_max: int, feature_names: Sequence[str],
                   rng: np.random.Generator) -> Tree:
    """Turn every operator sitting at ``depth_max`` into a random terminal."""
    if tree.depth <= depth_max:
        return tree

    def prune(node: Node, depth: int) -> Node:
        if depth >= depth_max:
            return node if node.is_terminal else random_terminal(feature_names, rng)
        return Node(node.kind, tuple(prune(c, depth + 1) for c in node.children))

    return replace(tree, root=prune(tree.root, 0), fitness=None)


def _alternatives(kind, config: Config, feature_names: Sequence[str]) -> list:
    if isinstance(kind, Operator):
        return [operator(op) for op in config.operator_set
                if op != kind.symbol and OPERATORS[op] == kind.arity]
    current = kind.index if isinstance(kind, Variable) else None
    return [Variable(i, name) for i, name in enumerate(feature_names) if i != current]


def point_mutation(parent: Tree, config: Config, feature_names: Sequence[str],
                   rng: np.random.Generator) -> Tree:
    """Swap one node's kind for an arity-compatible alternative."""
    entries = list(iter_nodes(parent.root))
    for _ in range(MAX_RETRIES):
        path, _, node = entries[int(rng.integers(len(entries)))]
        options = _alternatives(node.kind, config, feature_names)
        if options:
            kind = options[int(rng.integers(len(options)))]
            root = replace_at(parent.root, path, Node(kind, node.children))
            return replace(parent, root=root, fitness=None)
    return op_reproduce(parent)


def branch_mutation(parent: Tree, config: Config, feature_names: Sequence[str],
                    rng: np.random.Generator) -> Optional[Tree]:
    """Replace one subtree with a fresh Grow subtree that fits under the ceiling."""
    entries = list(iter_nodes(parent.root))
    for _ in range(MAX_RETRIES):
        path, depth, _ = entries[int(rng.integers(len(entries)))]
        fresh = build_subtree("grow", config.tree_depth_max - depth, feature_names,
                              config.operator_set, rng, config.grow_bias)
        root = replace_at(parent.root, path, fresh)
        if node_count(root) >= config.min_nodes:
            return replace(parent, root=root, fitness=None)
    return None


def op_mutate(parent: Tree, config: Config, feature_names: Sequence[str],
              rng: np.random.Generator) -> Tree:
    if rng.random() < config.point_mutation_share:
        return point_mutation(parent, config, feature_names, rng)
    child = branch_mutation(parent, config, feature_names, rng)
    if child is None:
        return point_mutation(parent, config, feature_names, rng)
    return child


def crossover_at(parent_a: Tree, parent_b: Tree, path_a: Sequence[int],
                 path_b: Sequence[int]) -> Tree:
    donor = copy_node(subtree_at(parent_b.root, path_b))
    return replace(parent_a, root=replace_at(parent_a.root, tuple(path_a), donor), fitness=None)


def op_crossover(parent_a: Tree, parent_b: Tree, config: Config,
                 feature_names: Sequence[str], rng: np.random.Generator) -> Tree:
    """Graft a random subtree of ``parent_b`` onto a random point of ``parent_a``."""
    points_a = [p for p, _, _ in iter_nodes(parent_a.root)]
    points_b = [p for p, _, _ in iter_nodes(parent_b.root)]
    for _ in range(MAX_RETRIES):
        pa = points_a[int(rng.integers(len(points_a)))]
        pb = points_b[int(rng.integers(len(points_b)))]
        child = crossover_at(parent_a, parent_b, pa, pb)
        child = prune_to_depth(child, config.tree_depth_max, feature_names, rng)
        if child.node_count >= config.min_nodes:
            return child
    return op_reproduce(parent_a)


# -- scoring -----------------------------------------------------------------

def resolve_kernel(kind, store: ColumnStore) -> Kernel:
    kind = KernelKind(kind)
    if kind is not KernelKind.CLASSIFICATION:
        return Kernel(kind)
    n_classes = class_count(store)
    labels = store.solution
    if n_classes < 2 or ((labels < 0) | (labels >= n_classes) | (labels != np.floor(labels))).any():
        raise LabelOutOfRange(
            f"classification needs integer labels 0..k-1 with k >= 2; found {np.unique(labels)}")
    return Kernel(kind, n_classes)


def score_tree(tree: Tree, store: ColumnStore, kernel: Kernel, config: Config,
               workers: int = 1) -> Tree:
    plan = compile_tree(tree, kernel, store.feature_names)
    result = evaluate(plan, store, config.backend, workers)
    return tree.with_fitness(score(kernel, result, store.solution, config.precision).value)


def score_trees(trees: Sequence[Tree], store: ColumnStore, kernel: Kernel,
                config: Config) -> tuple:
    workers = config.workers or default_workers()
    if config.backend is Backend.SCALAR:
        workers = 1
    if config.tree_parallel and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return tuple(pool.map(lambda t: score_tree(t, store, kernel, config, 1), trees))
    return tuple(score_tree(t, store, kernel, config, workers) for t in trees)


def next_generation(population: Population, config: Config, store: ColumnStore,
                    kernel: Kernel, rngs: RunRngs) -> Population:
    budget = operator_budget(config.tree_pop_max, config.operator_fractions())
    direction = kernel.direction
    names = store.feature_names
    trees = population.trees
    size = config.tournament_size

    def pick() -> Tree:
        return tournament_select(trees, size, direction, rngs.select)

    children = []
    for _ in range(budget.n_reproduce):
        children.append(op_reproduce(pick()))
    for _ in range(budget.n_mutate):
        children.append(op_mutate(pick(), config, names, rngs.operators))
    for _ in range(budget.n_crossover):
        a, b = pick(), pick()
        children.append(op_crossover(a, b, config, names, rngs.operators))

    generation = population.generation + 1
    children = [replace(c, id=i, birth_generation=generation, fitness=None)
                for i, c in enumerate(children, start=1)]
    return Population(generation, score_trees(children, store, kernel, config))


# -- the run -----------------------------------------------------------------

@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_id: int
    best_expression: str
    seconds: float


@dataclass
class RunResult:
    population: Population
    history: list
    elapsed: float
    seed: int
    config: Config
    best: Tree
    archive: Optional[arch.RunArchive] = None
    completed: bool = True


class Evolution:
    """A run that advances one generation per :meth:`step`.

    ``clock`` times the whole run, from building generation 1 to the last
    archive flush.
    """

    def __init__(self, config: Config, store: ColumnStore, *, archive: bool = True,
                 clock: Callable[[], float] = time.perf_counter, dataset_label: str = ""):
        self.config = config
        self.store = store
        self.kernel = resolve_kernel(config.kernel, store)
        self.seed = config.rng_seed if config.rng_seed is not None else fresh_seed()
        self.rngs = RunRngs.from_seed(self.seed)
        self.clock = clock
        self.history: list[GenerationStats] = []
        self.population: Optional[Population] = None
        self.archive = None
        if archive:
            self.archive = arch.init_run_dir(config, store.fingerprint(), self.seed, dataset_label)
        self._t0 = None

    @property
    def generation(self) -> int:
        return 0 if self.population is None else self.population.generation

    @property
    def done(self) -> bool:
        return self.generation >= self.config.generation_max

    @property
    def best(self) -> Tree:
        return best_tree(self.population.trees, self.kernel.direction)

    def start(self) -> Population:
        self._t0 = self.clock()
        tic = time.perf_counter()
        pop = gen_population(self.config, self.store.feature_names, self.rngs.init)
        pop = Population(1, score_trees(pop.trees, self.store, self.kernel, self.config))
        self._record(pop, tic)
        return pop

    def step(self) -> Population:
        tic = time.perf_counter()
        pop = next_generation(self.population, self.config, self.store, self.kernel, self.rngs)
        self._record(pop, tic)
        return pop

    def _record(self, pop: Population, tic: float) -> None:
        self.population = pop
        if self.archive is not None:
            self.archive = arch.write_generation(self.archive, pop, self.config.precision)
        best = self.best
        values = [t.fitness for t in pop.trees]
        self.history.append(GenerationStats(
            pop.generation, best.fitness, float(np.mean(values)), best.id,
            render_expression(best), time.perf_counter() - tic))

    def reconfigure(self, **changes) -> Config:
        bad = set(changes) - set(MUTABLE_FIELDS)
        if bad:
            raise ValueError(f"cannot change {', '.join(sorted(bad))} during a run")
        self.config = self.config.replace(**changes)
        if self.archive is not None:
            arch.snapshot_config(self.archive, self.config)
        return self.config

    def finish(self, status: str = "complete") -> RunResult:
        elapsed = self.clock() - self._t0 if self._t0 is not None else 0.0
        if self.archive is not None:
            self.archive = arch.finalize(self.archive, status)
        return RunResult(self.population, self.history, elapsed, self.seed, self.config,
                         self.best, self.archive, completed=(status == "complete"))

    def abort(self) -> None:
        if self.archive is not None:
            try:
                self.archive = arch.finalize(self.archive, "error")
            except Exception:
                pass


def run_evolution(config: Config, store: ColumnStore, *, archive: bool = True,
                  clock: Callable[[], float] = time.perf_counter,
                  on_generation: Optional[Callable] = None,
                  dataset_label: str = "") -> RunResult:
    """Build, score and archive generation 1, then evolve to ``generation_max``."""
    evo = Evolution(config, store, archive=archive, clock=clock, dataset_label=dataset_label)
    try:
        evo.start()
        if on_generation:
            on_generation(evo)
        while not evo.done:
            evo.step()
            if on_generation:
                on_generation(evo)
    except BaseException:
        evo.abort()
        raise
    return evo.finish()
