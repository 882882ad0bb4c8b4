"""Generational genetic algorithm over the network hyperparameter space.

Fixed strategy: population 8, tournament selection of size 3, uniform
crossover (gene swap probability 0.5), per-gene mutation probability 0.2,
one elitist carry-over.  Fitness is minimised (validation loss).  Every
evaluation receives a seed derived from (search seed, generation, slot),
so outcomes are independent of evaluation order or parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import InvariantError

POPULATION = 8
TOURNAMENT_K = 3
CROSSOVER_P = 0.5
MUTATION_P = 0.2
ELITISM = 1

#: gene name -> (kind, bounds/choices)
DEFAULT_SPACE: dict[str, tuple] = {
    "n_hidden": ("int", (1, 4)),
    "width": ("int", (8, 128)),
    "log10_lr": ("float", (-4.0, -2.0)),
    "batch": ("choice", (32, 64, 128)),
}

Genes = dict[str, float | int]
FitnessFn = Callable[[Genes, int], float]


@dataclass
class Evaluation:
    generation: int
    slot: int
    genes: Genes
    fitness: float
    seed: int


@dataclass
class GAResult:
    best_genes: Genes
    best_fitness: float
    history: list[Evaluation] = field(default_factory=list)
    truncated: bool = False

    def best_per_generation(self) -> list[float]:
        """Best-ever fitness after each generation (monotone non-increasing)."""
        out: list[float] = []
        best = np.inf
        by_gen: dict[int, list[float]] = {}
        for ev in self.history:
            by_gen.setdefault(ev.generation, []).append(ev.fitness)
        for gen in sorted(by_gen):
            best = min(best, min(by_gen[gen]))
            out.append(best)
        return out


def _sample_gene(kind: str, arg, rng: np.random.Generator):
    if kind == "int":
        return int(rng.integers(arg[0], arg[1] + 1))
    if kind == "float":
        return float(rng.uniform(arg[0], arg[1]))
    if kind == "choice":
        return arg[int(rng.integers(len(arg)))]
    raise InvariantError(f"unknown gene kind {kind!r}", path="space")


def _mutate_gene(kind: str, arg, value, rng: np.random.Generator):
    if kind == "float":
        lo, hi = arg
        return float(np.clip(value + rng.normal(0.0, 0.15 * (hi - lo)), lo, hi))
    return _sample_gene(kind, arg, rng)


def _eval_seed(seed: int, generation: int, slot: int) -> int:
    return int(np.random.SeedSequence((seed, generation, slot)).generate_state(1)[0])


def ga_search(fitness: FitnessFn, budget: int, seed: int,
              space: dict[str, tuple] | None = None) -> GAResult:
    """Minimise ``fitness(genes, eval_seed)`` within ``budget`` evaluations.

    ``budget`` must cover at least the initial population.  If it runs out
    mid-generation the search returns the best individual found so far
    with ``truncated=True``.
    """
    space = dict(space or DEFAULT_SPACE)
    if budget < POPULATION:
        raise InvariantError(f"budget must be >= population size {POPULATION}", path="budget")
    rng = np.random.Generator(np.random.PCG64(seed))
    names = list(space)

    def random_genes() -> Genes:
        return {k: _sample_gene(*space[k], rng) for k in names}

    history: list[Evaluation] = []
    best_genes: Genes | None = None
    best_fitness = np.inf
    evaluations = 0
    truncated = False

    population = [random_genes() for _ in range(POPULATION)]
    fitnesses: list[float] = []
    generation = 0
    while True:
        new_fitnesses: list[float] = []
        for slot, genes in enumerate(population):
            if generation > 0 and slot == 0 and fitnesses:
                # elitist carry-over keeps its already-evaluated fitness
                new_fitnesses.append(fitnesses_elite)
                continue
            if evaluations >= budget:
                truncated = True
                break
            ev_seed = _eval_seed(seed, generation, slot)
            value = float(fitness(genes, ev_seed))
            evaluations += 1
            history.append(Evaluation(generation, slot, dict(genes), value, ev_seed))
            new_fitnesses.append(value)
            if value < best_fitness:
                best_fitness = value
                best_genes = dict(genes)
        if truncated:
            break
        fitnesses = new_fitnesses
        if evaluations + (POPULATION - ELITISM) > budget:
            break
        # next generation
        ranked = sorted(range(POPULATION), key=lambda i: fitnesses[i])
        elite = dict(population[ranked[0]])
        fitnesses_elite = fitnesses[ranked[0]]

        def tournament() -> Genes:
            picks = rng.integers(0, POPULATION, size=TOURNAMENT_K)
            winner = min(picks, key=lambda i: fitnesses[i])
            return population[winner]

        children = [elite]
        while len(children) < POPULATION:
            pa, pb = tournament(), tournament()
            child = {k: (pb[k] if rng.random() < CROSSOVER_P else pa[k]) for k in names}
            for k in names:
                if rng.random() < MUTATION_P:
                    child[k] = _mutate_gene(*space[k], child[k], rng)
            children.append(child)
        population = children
        generation += 1

    if best_genes is None:
        raise InvariantError("budget exhausted before any evaluation", path="budget")
    return GAResult(best_genes=best_genes, best_fitness=best_fitness,
                    history=history, truncated=truncated)
