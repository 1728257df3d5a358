# baselines/genetic.py - One generation step of the (B, E, K) genetic search
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from core.domain import GlobalParams, neighbor_values

GENES = ("B", "E", "K")


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 10
    mutation_rate: float = 0.2
    crossover_rate: float = 0.7
    elitism: int = 1

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not (0 <= self.mutation_rate <= 1 and 0 <= self.crossover_rate <= 1):
            raise ValueError("rates must be in [0, 1]")
        if not 0 <= self.elitism <= self.population_size:
            raise ValueError("elitism must be between 0 and population_size")


def _tournament(population: Sequence[GlobalParams], fitnesses: Sequence[float], rng: np.random.Generator) -> GlobalParams:
    a, b = (int(i) for i in rng.integers(len(population), size=2))
    # ties go to the lower index
    if (fitnesses[a], -a) >= (fitnesses[b], -b):
        return population[a]
    return population[b]


def ga_adaptive(
    population: Sequence[GlobalParams],
    fitnesses: Sequence[float],
    cfg: GAConfig,
    rng: np.random.Generator,
) -> List[GlobalParams]:
    """Elites survive in their original order; the rest are bred by size-2
    tournaments, single-point crossover and adjacent-value mutation."""
    n = cfg.population_size
    if len(population) != n or len(fitnesses) != n:
        raise ValueError(f"expected {n} individuals and fitnesses, got {len(population)} and {len(fitnesses)}")
    ranked = sorted(range(n), key=lambda i: (-fitnesses[i], i))
    next_population = [population[i] for i in sorted(ranked[: cfg.elitism])]

    while len(next_population) < n:
        first = _tournament(population, fitnesses, rng)
        second = _tournament(population, fitnesses, rng)
        genes = list(first.as_tuple())
        if rng.random() < cfg.crossover_rate:
            point = int(rng.integers(1, len(GENES)))
            genes = list(first.as_tuple()[:point] + second.as_tuple()[point:])
        for position, component in enumerate(GENES):
            if rng.random() < cfg.mutation_rate:
                options = neighbor_values(component, genes[position])
                genes[position] = options[int(rng.integers(len(options)))]
        next_population.append(GlobalParams(*genes))
    return next_population
