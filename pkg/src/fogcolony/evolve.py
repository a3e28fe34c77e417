"""NSGA-II over dendrogram-encoded colony layouts, plus the two control layouts."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dendro import Dendrogram
from .fitness import Evaluation, Evaluator, ObjectiveVector
from .layout import (
    chromosome,
    crossover_subtree,
    cut_by_size,
    is_valid,
    mutate_join,
    mutate_split,
    random_layout,
    repair_agglomerative,
    repair_divisive,
    to_layout,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAConfig:
    pop_size: int = 100
    gen_num: int = 100
    p_cross: float = 0.95
    p_mut: float = 0.3
    p_mut_join: float = 0.5
    p_mut_split: float = 0.5
    p_rep_agg: float = 0.5
    split_prob_init: float = 0.5
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name in ("p_cross", "p_mut", "p_mut_join", "p_mut_split", "p_rep_agg", "split_prob_init"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if abs(self.p_mut_join + self.p_mut_split - 1.0) > 1e-9:
            raise ValueError("p_mut_join + p_mut_split must equal 1")
        if self.pop_size < 2 or self.pop_size % 2:
            raise ValueError("pop_size must be even and >= 2")
        if self.gen_num < 0:
            raise ValueError("gen_num must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class Individual:
    chromosome: np.ndarray
    objectives: ObjectiveVector | None = None
    front_rank: int = 0
    crowding: float = 0.0
    colony_costs: tuple = ()


@dataclass
class GenerationTrace:
    generation: int
    objectives: np.ndarray  # pop_size x 2, population order
    ranks: np.ndarray
    chromosomes: list[np.ndarray]
    colony_costs: list[tuple] = field(default_factory=list)

    @property
    def front(self) -> np.ndarray:
        return np.flatnonzero(self.ranks == 1)


def fast_nondominated_sort(objectives) -> list[list[int]]:
    """Fronts of a minimization problem as lists of indices, best front first."""
    obj = np.asarray(objectives, dtype=np.float64)
    if obj.size == 0:
        return []
    ranks = kernels.nondominated_ranks(obj.reshape(len(obj), -1))
    return [np.flatnonzero(ranks == r).tolist() for r in range(1, int(ranks.max()) + 1)]


def crowding_distance(front_objectives) -> np.ndarray:
    """Crowding distance of each member of one front; boundary members get inf."""
    f = np.asarray(front_objectives, dtype=np.float64)
    n, m = f.shape
    out = np.zeros(n)
    if n <= 2:
        out[:] = np.inf
        return out
    for k in range(m):
        order = np.argsort(f[:, k], kind="stable")
        out[order[0]] = out[order[-1]] = np.inf
        span = f[order[-1], k] - f[order[0], k]
        if span <= 0:
            continue
        gaps = (f[order[2:], k] - f[order[:-2], k]) / span
        out[order[1:-1]] += gaps
    return out


def rank_and_crowd(pop: list[Individual]) -> list[list[int]]:
    obj = np.array([ind.objectives for ind in pop], dtype=np.float64)
    fronts = fast_nondominated_sort(obj)
    for r, fr in enumerate(fronts, start=1):
        cd = crowding_distance(obj[fr])
        for i, c in zip(fr, cd):
            pop[i].front_rank = r
            pop[i].crowding = float(c)
    return fronts


def binary_tournament(pop: list[Individual], rng) -> Individual:
    """Better of two uniform draws: lower front, then larger crowding, then first drawn."""
    a = pop[int(rng.integers(len(pop)))]
    b = pop[int(rng.integers(len(pop)))]
    if b.front_rank < a.front_rank or (b.front_rank == a.front_rank and b.crowding > a.crowding):
        return b
    return a


def _survivor_order(pop: list[Individual]) -> list[int]:
    return sorted(range(len(pop)), key=lambda i: (pop[i].front_rank, -pop[i].crowding, i))


# -- parallel evaluation ---------------------------------------------------

_WORKER: Evaluator | None = None


def _init_worker(evaluator: Evaluator) -> None:
    global _WORKER
    _WORKER = evaluator


def _eval_remote(bits: np.ndarray) -> Evaluation:
    return _WORKER.evaluate(bits)


class _BatchEvaluator:
    def __init__(self, evaluator: Evaluator, workers: int):
        self.evaluator = evaluator
        self.pool = None
        if workers > 1:
            self.pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(evaluator,))

    def __call__(self, inds: list[Individual]) -> None:
        todo = [ind for ind in inds if ind.objectives is None]
        if self.pool is None:
            results = [self.evaluator.evaluate(ind.chromosome) for ind in todo]
        else:
            results = list(self.pool.map(_eval_remote, [ind.chromosome for ind in todo], chunksize=8))
        for ind, ev in zip(todo, results):
            ind.objectives = ev.objectives
            ind.colony_costs = ev.colony_costs

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _trace(gen: int, pop: list[Individual]) -> GenerationTrace:
    return GenerationTrace(
        gen,
        np.array([ind.objectives for ind in pop], dtype=np.float64),
        np.array([ind.front_rank for ind in pop], dtype=np.int64),
        [ind.chromosome.copy() for ind in pop],
        [ind.colony_costs for ind in pop],
    )


def make_offspring(pop: list[Individual], dendro: Dendrogram, cfg: GAConfig, rng) -> list[Individual]:
    """One generation of children: tournament pairs, crossover, mutation, repair."""
    children: list[Individual] = []
    while len(children) < cfg.pop_size:
        cross = rng.random() < cfg.p_cross
        a = binary_tournament(pop, rng).chromosome
        b = binary_tournament(pop, rng).chromosome
        if cross:
            a, b = crossover_subtree(a, b, dendro, rng)
        else:
            a, b = a.copy(), b.copy()
        if rng.random() < cfg.p_mut:
            op = mutate_join if rng.random() < cfg.p_mut_join else mutate_split
            a, b = op(a, dendro, rng), op(b, dendro, rng)
        repair = repair_agglomerative if rng.random() < cfg.p_rep_agg else repair_divisive
        for c in (a, b):
            if not is_valid(c, dendro):
                c = repair(c, dendro)
            children.append(Individual(c))
    return children


def run_nsga2(evaluator: Evaluator, dendro: Dendrogram, cfg: GAConfig, on_generation=None):
    """Evolve layouts; returns ``(population, pareto front, traces)``.

    Offspring and parents are merged each generation and truncated back to
    ``pop_size`` by (front, crowding), so no front-1 parent is lost to a
    dominated child.
    """
    rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed))
    batch = _BatchEvaluator(evaluator, cfg.workers)
    traces: list[GenerationTrace] = []
    try:
        pop = [Individual(random_layout(dendro, cfg.split_prob_init, rng)) for _ in range(cfg.pop_size)]
        batch(pop)
        rank_and_crowd(pop)
        traces.append(_trace(0, pop))
        if on_generation:
            on_generation(traces[-1])
        for gen in range(1, cfg.gen_num + 1):
            off = make_offspring(pop, dendro, cfg, rng)
            batch(off)
            union = off + pop
            rank_and_crowd(union)
            pop = [union[i] for i in _survivor_order(union)[: cfg.pop_size]]
            traces.append(_trace(gen, pop))
            if on_generation:
                on_generation(traces[-1])
            log.debug("generation %d: front size %d", gen, len(traces[-1].front))
    finally:
        batch.close()
    front = pareto_members(pop)
    return pop, front, traces


def pareto_members(pop: list[Individual]) -> list[Individual]:
    """Non-dominated members, one per distinct chromosome, in population order."""
    fronts = fast_nondominated_sort([ind.objectives for ind in pop])
    seen = set()
    out = []
    for i in fronts[0] if fronts else []:
        key = pop[i].chromosome.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(pop[i])
    return out


def baseline_one_colony(evaluator: Evaluator, dendro: Dendrogram):
    """Single colony holding every device."""
    c = chromosome(dendro, [dendro.root])
    return to_layout(c, dendro), evaluator.evaluate(c).objectives


def baseline_fixed_size(evaluator: Evaluator, dendro: Dendrogram, target_size: int = 5):
    """Top-down dendrogram cut into colonies of at most ``target_size`` devices."""
    c = cut_by_size(dendro, target_size)
    return to_layout(c, dendro), evaluator.evaluate(c).objectives
