import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergocodesign.errors import ContractError
from ergocodesign.evo.evolve import EvolutionConfig, evolve, first_stop_generation, stats_csv, stop_reached
from ergocodesign.evo.fitness import SKIPPED, CaseResult, build_report, fitness_from_torques, worst_torque
from ergocodesign.evo.genes import GeneSpace, design_key
from ergocodesign.evo.operators import crossover, mutate, tournament_select
from ergocodesign.model.model import HardwareParams

SPACE = GeneSpace(3, 2, (0.5, 2.0), (200.0, 400.0, 800.0), ("S", "M", "L"))


def synthetic_fitness(p: HardwareParams) -> float:
    """Smooth in the lengths, ordered in the categorical genes."""
    lm = np.asarray(p.length_multipliers)
    rank = {"S": 0.0, "M": 0.5, "L": 1.0}
    return float(10.0 / (1.0 + np.sum((lm - 1.3) ** 2)) + 1e-3 * sum(p.densities) / 800.0 + sum(rank[m] for m in p.motor_ids))


class Counter:
    def __init__(self):
        self.keys = []

    def __call__(self, p):
        self.keys.append(design_key(p))
        return synthetic_fitness(p)


# gene domains ----------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), fraction=st.floats(0.0, 1.0))
def test_operators_stay_in_domain(seed, fraction):
    rng = np.random.default_rng(seed)
    pop = [SPACE.random(rng) for _ in range(6)]
    fit = [synthetic_fitness(p) for p in pop]
    for _ in range(50):
        a = pop[tournament_select(fit, 3, rng)]
        b = pop[tournament_select(fit, 3, rng)]
        child = mutate(crossover(a, b, rng, SPACE), fraction, rng, SPACE)
        assert SPACE.contains(child)
        pop[int(rng.integers(6))] = child
        fit = [synthetic_fitness(p) for p in pop]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_crossover_takes_each_gene_from_a_parent(seed):
    rng = np.random.default_rng(seed)
    a, b = SPACE.random(rng), SPACE.random(rng)
    c = crossover(a, b, rng, SPACE)
    for x, y, z in zip(SPACE.genes(a), SPACE.genes(b), SPACE.genes(c)):
        assert z == x or z == y


@pytest.mark.parametrize("fraction,expected", [(0.0, 0), (0.1, 1), (0.3, 3), (1.0, 8)])
def test_mutation_resamples_ceil_fraction_genes(fraction, expected):
    assert SPACE.n_genes == 8
    assert math.ceil(fraction * 8) == expected
    rng = np.random.default_rng(1)
    p = SPACE.random(rng)
    changed = []
    for s in range(200):
        c = mutate(p, fraction, np.random.default_rng(s), SPACE)
        changed.append(sum(x != y for x, y in zip(SPACE.genes(p), SPACE.genes(c))))
    # a categorical resample may draw the old value again
    assert max(changed) == expected


def test_gene_space_contracts():
    with pytest.raises(ContractError):
        GeneSpace(2, 0, (2.0, 1.0), (1.0,))
    with pytest.raises(ContractError):
        GeneSpace(2, 0, (0.5, 1.0), ())
    with pytest.raises(ContractError):
        SPACE.from_genes([1.0])
    assert not SPACE.contains(HardwareParams((1.0, 1.0, 3.0), (200.0, 200.0, 200.0), ("S", "S")))
    assert not SPACE.contains(HardwareParams((1.0, 1.0, 1.0), (300.0, 200.0, 200.0), ("S", "S")))
    assert not SPACE.contains(HardwareParams((1.0, 1.0, 1.0), (200.0, 200.0, 200.0), ("S", "XL")))


# tournament ------------------------------------------------------------------------


def test_tournament_examples():
    fit = [1.0, 5.0, 3.0, 5.0]
    rng = np.random.default_rng(0)
    # k = n always returns the fittest, ties to the lowest index
    assert {tournament_select(fit, 4, rng) for _ in range(20)} == {1}
    counts = np.bincount([tournament_select(fit, 1, rng) for _ in range(4000)], minlength=4)
    assert np.all(np.abs(counts / 4000 - 0.25) < 0.03)
    # k = 2 over distinct members: the worst is never chosen
    assert 0 not in {tournament_select(fit, 2, rng) for _ in range(200)}
    with pytest.raises(ContractError):
        tournament_select(fit, 5, rng)
    with pytest.raises(ContractError):
        tournament_select([1.0, float("nan")], 1, rng)


def test_tournament_selection_probability_matches_combinatorics():
    # P(best of k=3 among 5) = 1 - C(4,3)/C(5,3) = 0.6
    fit = [0.0, 1.0, 2.0, 3.0, 4.0]
    rng = np.random.default_rng(3)
    hits = sum(tournament_select(fit, 3, rng) == 4 for _ in range(5000))
    assert abs(hits / 5000 - 0.6) < 0.03


# stopping rule ---------------------------------------------------------------------


def test_first_stop_generation_synthetic_sequence():
    seq = [2.0, 2.02, 2.099, 2.1, 2.3, 2.0]
    assert first_stop_generation(seq, 0.05) == 3
    assert first_stop_generation([2.0, 2.05, 2.11], 0.05) == 2
    assert first_stop_generation([1.0, 1.01], 0.05) is None
    assert not stop_reached(0.0, 5.0, 0.05)
    assert not stop_reached(1.0, 5.0, None)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=30), st.floats(0.0, 0.5))
def test_first_stop_generation_is_the_first_crossing(seq, improvement):
    g = first_stop_generation(seq, improvement)
    crossings = [i for i in range(1, len(seq)) if seq[i] >= (1 + improvement) * seq[0]]
    assert g == (crossings[0] if crossings else None)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_evolve_stops_at_first_crossing(seed):
    base = EvolutionConfig(population_size=8, max_generations=30, stop_improvement=None, seed=seed)
    full = evolve(base, SPACE, synthetic_fitness)
    g = first_stop_generation([s.max_fitness for s in full.stats], 0.05)
    stopped = evolve(EvolutionConfig(population_size=8, max_generations=30, stop_improvement=0.05, seed=seed), SPACE, synthetic_fitness)
    if g is None:
        assert not stopped.stopped and len(stopped.stats) == 30
    else:
        assert stopped.stopped and len(stopped.stats) == g + 1
        assert stopped.stats == full.stats[: g + 1]


# evolution properties ---------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**63), n=st.integers(2, 10))
def test_elitism_keeps_max_fitness_nondecreasing(seed, n):
    cfg = EvolutionConfig(population_size=n, tournament_size=min(3, n), max_generations=8, stop_improvement=None, seed=seed)
    res = evolve(cfg, SPACE, synthetic_fitness)
    best = [s.max_fitness for s in res.stats]
    assert all(b >= a for a, b in zip(best, best[1:]))
    assert res.best_fitness == max(best)
    assert all(SPACE.contains(p) for pop in res.populations for p in pop)


def test_single_member_population_is_constant():
    cfg = EvolutionConfig(population_size=1, tournament_size=1, max_generations=5, stop_improvement=None)
    res = evolve(cfg, SPACE, synthetic_fitness)
    assert len({design_key(pop[0]) for pop in res.populations}) == 1
    assert len({s.max_fitness for s in res.stats}) == 1


def test_fixed_seed_is_byte_identical_and_seeds_differ():
    cfg = EvolutionConfig(population_size=6, max_generations=6, stop_improvement=None, seed=42)
    a = stats_csv(evolve(cfg, SPACE, synthetic_fitness).stats)
    b = stats_csv(evolve(cfg, SPACE, synthetic_fitness).stats)
    c = stats_csv(evolve(EvolutionConfig(population_size=6, max_generations=6, stop_improvement=None, seed=43), SPACE, synthetic_fitness).stats)
    assert a == b and a != c
    assert a.splitlines()[0] == "generation,mean_fitness,var_fitness,max_fitness,best_member_id"


def test_each_design_is_evaluated_once_and_warm_start_leads():
    counter = Counter()
    warm = HardwareParams((1.0, 1.0, 1.0), (400.0, 400.0, 400.0), ("M", "M"))
    cfg = EvolutionConfig(population_size=5, max_generations=6, stop_improvement=None)
    res = evolve(cfg, SPACE, counter, [warm])
    assert len(counter.keys) == len(set(counter.keys)) == len(res.reports)
    assert design_key(res.populations[0][0]) == design_key(warm)
    with pytest.raises(ContractError):
        evolve(cfg, SPACE, counter, [HardwareParams((9.0, 1.0, 1.0), (400.0, 400.0, 400.0), ("M", "M"))])


def test_worker_processes_match_serial_run():
    cfg = EvolutionConfig(population_size=4, max_generations=3, stop_improvement=None, seed=5)
    a = evolve(cfg, SPACE, synthetic_fitness)
    b = evolve(cfg, SPACE, synthetic_fitness, threads=2)
    assert stats_csv(a.stats) == stats_csv(b.stats)


def test_best_member_id_indexes_generation_and_member():
    cfg = EvolutionConfig(population_size=4, max_generations=4, stop_improvement=None, seed=9)
    res = evolve(cfg, SPACE, synthetic_fitness)
    for s in res.stats:
        g, i = divmod(s.best_member_id, 4)
        assert g == s.generation
        assert res.fitness[g][i] == s.max_fitness


# worst-case torque ------------------------------------------------------------------

vectors = st.lists(
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=3), min_size=1, max_size=12
)


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_worst_torque_matches_brute_force_scan(vecs):
    norms = [math.sqrt(sum(x * x for x in v)) for v in vecs]
    i, nrm = worst_torque([np.array(v) for v in vecs])
    assert norms[i] == pytest.approx(max(norms), rel=1e-12, abs=1e-300)
    assert nrm == pytest.approx(max(norms), rel=1e-12, abs=1e-300)
    expected = 100.0 / max(norms) if max(norms) > 0 else 0.0
    assert fitness_from_torques([np.array(v) for v in vecs], 100.0) == pytest.approx(expected, rel=1e-12)


def test_worst_torque_ties_go_to_the_first_vector():
    v = np.array([3.0, 4.0])
    assert worst_torque([np.zeros(2), v, -v, v[::-1]]) == (1, 5.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3))
def test_report_uses_worst_vector_over_all_cases(seed, ncase, nk):
    rng = np.random.default_rng(seed)
    results = [
        CaseResult(f"h{i % 2}", f"l{i}", "solved", tuple(range(nk)), rng.normal(size=(nk, 5)) * 10)
        for i in range(ncase)
    ]
    rep = build_report(results, 100.0)
    allv = [(c.human, c.load, k, c.torques[k]) for c in sorted(results, key=lambda c: (c.human, c.load)) for k in range(nk)]
    j = int(np.argmax([np.linalg.norm(v[3]) for v in allv]))
    assert rep.worst_case == allv[j][:3]
    assert rep.fitness == pytest.approx(100.0 / np.linalg.norm(allv[j][3]), rel=1e-12)


def test_any_unsolved_case_gives_zero_fitness():
    good = CaseResult("h", "a", "solved", (1.0,), np.ones((1, 3)))
    bad = CaseResult("h", "b", "infeasible", (1.0,), np.ones((1, 3)))
    skipped = CaseResult("h", "c", SKIPPED, (1.0,), np.zeros((0, 0)))
    assert build_report([good], 100.0).fitness == pytest.approx(100.0 / math.sqrt(3))
    assert build_report([good, bad], 100.0).fitness == 0.0
    assert build_report([good, skipped], 100.0).fitness == 0.0
    with pytest.raises(ContractError):
        worst_torque([])
