"""Selection, crossover and mutation."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ContractError
from ..model.model import HardwareParams
from .genes import GeneSpace

__all__ = ["tournament_select", "crossover", "mutate"]


def tournament_select(fitness, k: int, rng: np.random.Generator) -> int:
    """Index of the fittest of ``k`` distinct members drawn uniformly.

    Ties go to the lowest index.

    Raises:
        ContractError: If ``k`` is out of range or a fitness is missing.
    """
    fitness = list(fitness)
    n = len(fitness)
    if not 1 <= k <= n:
        raise ContractError(f"tournament size {k} must be within [1, {n}]")
    if any(f is None or not np.isfinite(f) for f in fitness):
        raise ContractError("population has unevaluated members")
    picks = rng.choice(n, size=k, replace=False)
    return int(min(picks, key=lambda i: (-fitness[i], i)))


def crossover(a: HardwareParams, b: HardwareParams, rng: np.random.Generator, space: GeneSpace) -> HardwareParams:
    """Uniform crossover: each gene from either parent with probability 1/2."""
    space.check_layout(a)
    space.check_layout(b)
    ga, gb = space.genes(a), space.genes(b)
    take = rng.random(len(ga)) < 0.5
    return space.from_genes([x if t else y for x, y, t in zip(ga, gb, take)])


def mutate(params: HardwareParams, fraction: float, rng: np.random.Generator, space: GeneSpace) -> HardwareParams:
    """Resample ``ceil(fraction * n_genes)`` distinct genes uniformly over their domains."""
    if not 0.0 <= fraction <= 1.0:
        raise ContractError("mutation fraction must be within [0, 1]")
    genes = space.genes(params)
    count = math.ceil(fraction * len(genes))
    if count == 0:
        return params
    for i in rng.choice(len(genes), size=count, replace=False):
        genes[int(i)] = space.sample_gene(int(i), rng)
    return space.from_genes(genes)
