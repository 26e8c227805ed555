"""Selection, crossover and mutation over genomes.

Crossover cuts both parents at positions that agree modulo the cell
width, so offspring lengths change while every gene keeps its role.
Mutation touches at most one gene; stride genes move by a clamped
normal step instead of a uniform redraw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .search_space import GENES_PER_CELL, Genome, SearchSpace


@dataclass
class Individual:
    genome: Genome
    fitness: float | None = None
    generation_born: int = 0


@dataclass(frozen=True)
class GaConfig:
    """Knobs of the evolutionary loop.

    tournament_size defaults to a third of the population (10 for the
    default population of 30).
    """

    population_size: int = 30
    generations: int = 20
    tournament_size: int | None = None
    crossover_prob: float = 0.7
    mutation_prob: float = 0.3
    crossover_retry_cap: int = 100

    def __post_init__(self):
        if self.tournament_size is None:
            object.__setattr__(self, "tournament_size", max(1, self.population_size // 3))
        if self.population_size < 1 or self.generations < 1:
            raise ValueError("population_size and generations must be >= 1")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ValueError("tournament_size must lie in [1, population_size]")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.crossover_retry_cap < 1:
            raise ValueError("crossover_retry_cap must be >= 1")


def tournament_select(pop: list[Individual], k: int, rng) -> Individual:
    """Draw k distinct members uniformly and return the fittest.

    Ties break toward the lower population index, which keeps repeated
    runs over the same stream reproducible.
    """
    if not 1 <= k <= len(pop):
        raise ValueError(f"tournament size {k} invalid for a population of {len(pop)}")
    drawn = sorted(int(i) for i in rng.choice(len(pop), size=k, replace=False))
    best = None
    for idx in drawn:
        ind = pop[idx]
        if ind.fitness is None:
            raise ValueError(f"individual {idx} entered a tournament without a fitness")
        if best is None or ind.fitness > best.fitness:
            best = ind
    return best


@dataclass(frozen=True)
class CrossoverOutcome:
    """Children plus the bookkeeping the run log records."""

    child1: Genome
    child2: Genome
    crossed: bool
    point1: int | None = None
    point2: int | None = None
    attempts: int = 0
    fell_back: bool = False


def crossover(p1: Genome, p2: Genome, space: SearchSpace, cfg: GaConfig,
              rng) -> CrossoverOutcome:
    """Cut-and-swap recombination with length changes.

    With probability 1 - crossover_prob the parents pass through
    unchanged.  Otherwise the first cut point is uniform on
    [0, len(p1)] inclusive and the second is a uniform multiple of the
    cell width plus point1 mod 4, so gene slots stay aligned.  Cut pairs
    whose children leave the genome length bounds (or whose second point
    overruns parent 2) are redrawn; after half the retry budget the
    first point is redrawn as well, and an exhausted budget falls back
    to parent copies.
    """
    if rng.random() >= cfg.crossover_prob:
        return CrossoverOutcome(p1, p2, crossed=False)
    lo = GENES_PER_CELL * space.min_cells
    hi = GENES_PER_CELL * space.max_cells
    point1 = int(rng.integers(0, len(p1) + 1))
    for attempt in range(1, cfg.crossover_retry_cap + 1):
        point2 = int(rng.integers(0, len(p2) // GENES_PER_CELL + 1)) * GENES_PER_CELL \
            + point1 % GENES_PER_CELL
        len1 = point1 + len(p2) - point2
        len2 = point2 + len(p1) - point1
        if point2 <= len(p2) and lo <= len1 <= hi and lo <= len2 <= hi:
            child1 = Genome(p1.genes[:point1] + p2.genes[point2:])
            child2 = Genome(p2.genes[:point2] + p1.genes[point1:])
            return CrossoverOutcome(child1, child2, True, point1, point2, attempt)
        if attempt >= cfg.crossover_retry_cap // 2:
            point1 = int(rng.integers(0, len(p1) + 1))
    return CrossoverOutcome(p1, p2, True, attempts=cfg.crossover_retry_cap,
                            fell_back=True)


@dataclass(frozen=True)
class MutationOutcome:
    genome: Genome
    mutated: bool
    gene_index: int | None = None
    old_value: int | None = None
    new_value: int | None = None


def mutate(g: Genome, space: SearchSpace, cfg: GaConfig, rng) -> MutationOutcome:
    """Redraw one uniformly chosen gene.

    Filter counts and sizes resample uniformly from their sets (the old
    value may come back).  Stride genes take a standard normal step,
    clamp into their range, then round to the nearest integer with ties
    rounding up, so the result is always valid.
    """
    if rng.random() >= cfg.mutation_prob:
        return MutationOutcome(g, mutated=False)
    idx = int(rng.integers(0, len(g)))
    slot = idx % GENES_PER_CELL
    genes = list(g.genes)
    old = genes[idx]
    if slot == 0:
        genes[idx] = int(rng.choice(space.filter_counts))
    elif slot == 1:
        genes[idx] = int(rng.choice(space.genome_filter_sizes))
    else:
        lo, hi = space.conv_stride_range if slot == 2 else space.pool_stride_range
        shifted = max(min(old + rng.normal(), hi), lo)
        genes[idx] = int(math.floor(shifted + 0.5))
    return MutationOutcome(Genome(tuple(genes)), True, idx, old, genes[idx])
