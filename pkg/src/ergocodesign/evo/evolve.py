"""Generational genetic search over robot designs."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ContractError
from ..model.model import HardwareParams
from .genes import GeneSpace, design_key
from .operators import crossover, mutate, tournament_select

__all__ = [
    "EvolutionConfig",
    "GenerationStats",
    "EvolutionResult",
    "evolve",
    "stop_reached",
    "first_stop_generation",
    "stats_csv",
    "STATS_HEADER",
]

log = logging.getLogger(__name__)

STATS_HEADER = ("generation", "mean_fitness", "var_fitness", "max_fitness", "best_member_id")


@dataclass(frozen=True)
class EvolutionConfig:
    """Settings of the genetic search.

    Attributes:
        population_size: Members per generation.
        tournament_size: Members drawn per tournament.
        mutation_fraction: Fraction of genes resampled per child.
        crossover: Crossover operator (only ``uniform``).
        elitism: Best members copied unchanged into the next generation.
        stop_improvement: Stop once the best fitness reaches ``(1 + value)`` times the
            generation-0 best; None disables the rule.
        max_generations: Generation cap, generation 0 included.
        seed: Root seed of all random streams.
    """

    population_size: int = 20
    tournament_size: int = 3
    mutation_fraction: float = 0.1
    crossover: str = "uniform"
    elitism: int = 1
    stop_improvement: float | None = 0.05
    max_generations: int = 150
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ContractError("population size must be positive")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ContractError("tournament size must be within [1, population size]")
        if not 0.0 <= self.mutation_fraction <= 1.0:
            raise ContractError("mutation fraction must be within [0, 1]")
        if self.crossover != "uniform":
            raise ContractError(f"unsupported crossover {self.crossover!r}")
        if not 0 <= self.elitism <= self.population_size:
            raise ContractError("elitism must be within [0, population size]")
        if self.stop_improvement is not None and not 0.0 <= self.stop_improvement:
            raise ContractError("stop improvement must be nonnegative")
        if self.max_generations < 1:
            raise ContractError("at least one generation is required")
        if self.seed < 0:
            raise ContractError("seed must be nonnegative")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    mean_fitness: float
    var_fitness: float
    max_fitness: float
    best_member_id: int


@dataclass
class EvolutionResult:
    """Outcome of :func:`evolve`.

    Attributes:
        best: Best design found.
        best_fitness: Its fitness.
        stats: Per-generation statistics.
        populations: Designs of every generation.
        fitness: Fitness of every generation's members.
        reports: Evaluation result per design key.
        stopped: True when the improvement rule ended the run.
    """

    best: HardwareParams
    best_fitness: float
    stats: list[GenerationStats]
    populations: list[list[HardwareParams]]
    fitness: list[list[float]]
    reports: dict = field(repr=False, default_factory=dict)
    stopped: bool = False

    @property
    def best_report(self):
        return self.reports.get(design_key(self.best))


def stop_reached(initial_best: float, best: float, improvement: float | None) -> bool:
    """True once ``best >= (1 + improvement) * initial_best`` (never for a zero baseline)."""
    if improvement is None or not initial_best > 0:
        return False
    return best >= (1.0 + improvement) * initial_best


def first_stop_generation(best_per_generation, improvement: float) -> int | None:
    """Generation at which the stopping rule first fires for a best-fitness sequence."""
    seq = list(best_per_generation)
    for g, v in enumerate(seq):
        if g > 0 and stop_reached(seq[0], v, improvement):
            return g
    return None


def _rng(seed: int, generation: int, member: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, generation, member]))


def _fitness_of(result) -> float:
    return float(getattr(result, "fitness", result))


def evolve(
    config: EvolutionConfig,
    space: GeneSpace,
    evaluate: Callable[[HardwareParams], object],
    initial=(),
    threads: int = 1,
    on_generation: Callable[[GenerationStats], None] | None = None,
) -> EvolutionResult:
    """Run the genetic search.

    Args:
        config: Search settings.
        space: Gene domains.
        evaluate: Maps a design to a fitness or to an object with a ``fitness`` attribute.
            Must be picklable when ``threads > 1``.
        initial: Warm-start designs placed first in generation 0.
        threads: Worker processes for fitness evaluation.
        on_generation: Called with each generation's statistics.

    Returns:
        The :class:`EvolutionResult`.
    """
    n = config.population_size
    initial = list(initial)[:n]
    for p in initial:
        if not space.contains(p):
            raise ContractError("warm-start design lies outside the gene domains")
    pop = initial + [space.random(_rng(config.seed, 0, i)) for i in range(len(initial), n)]
    cache: dict[str, object] = {}
    executor = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None

    def assess(members):
        todo, keys = [], []
        for m in members:
            k = design_key(m)
            if k not in cache and k not in keys:
                keys.append(k)
                todo.append(m)
        results = executor.map(evaluate, todo) if executor else map(evaluate, todo)
        for k, r in zip(keys, results):
            cache[k] = r
        return [_fitness_of(cache[design_key(m)]) for m in members]

    stats, pops, fits = [], [], []
    stopped = False
    try:
        for gen in range(config.max_generations):
            if gen > 0:
                order = sorted(range(n), key=lambda i: (-fit[i], i))
                nxt = [pop[i] for i in order[: config.elitism]]
                for i in range(len(nxt), n):
                    rng = _rng(config.seed, gen, i)
                    a = pop[tournament_select(fit, config.tournament_size, rng)]
                    b = pop[tournament_select(fit, config.tournament_size, rng)]
                    nxt.append(mutate(crossover(a, b, rng, space), config.mutation_fraction, rng, space))
                pop = nxt
            fit = assess(pop)
            best_i = min(range(n), key=lambda i: (-fit[i], i))
            st = GenerationStats(gen, float(np.mean(fit)), float(np.var(fit)), float(fit[best_i]), gen * n + best_i)
            stats.append(st)
            pops.append(list(pop))
            fits.append(list(fit))
            log.info("generation %d: mean %.6g max %.6g", gen, st.mean_fitness, st.max_fitness)
            if on_generation:
                on_generation(st)
            if gen > 0 and stop_reached(stats[0].max_fitness, st.max_fitness, config.stop_improvement):
                stopped = True
                break
    finally:
        if executor:
            executor.shutdown()
    g_best, i_best = max(((g, i) for g in range(len(fits)) for i in range(n)), key=lambda t: (fits[t[0]][t[1]], -t[0], -t[1]))
    return EvolutionResult(pops[g_best][i_best], fits[g_best][i_best], stats, pops, fits, cache, stopped)


def stats_csv(stats) -> str:
    """Stats table as CSV text (fixed header, floats by exact repr)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_HEADER)
    for s in stats:
        w.writerow([s.generation, repr(s.mean_fitness), repr(s.var_fitness), repr(s.max_fitness), s.best_member_id])
    return buf.getvalue()
