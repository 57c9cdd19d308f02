import numpy as np
import pytest
from pydantic import ValidationError

from feastap.errors import EvolutionError, GenomeError
from feastap.evolution import (
    EvoConfig, GenerationRecord, Individual, crossover, evolve, format_history, init_population, mutate,
    read_history, select_survivors, step_generation, write_history,
)
from feastap.fitness import EvalReport, FitnessCoeffs, FitnessEvaluator
from feastap.genome import Chromosome, random_chromosome
from feastap.noise import NoiseModel


def _scored(chromosome, fitness, index):
    report = EvalReport(correct=np.zeros(3, dtype=np.int64), totals=np.ones(3, dtype=np.int64), fitness=fitness)
    return Individual(chromosome, report, index)


def _evaluated_population(evaluator, cfg, rng):
    evaluator.prepare(("static",))
    population = init_population(cfg, evaluator.layout, rng)
    reports = evaluator.evaluate_many([ind.chromosome for ind in population])
    ranked = select_survivors([Individual(i.chromosome, r, i.index) for i, r in zip(population, reports)],
                              len(population))
    return [Individual(ind.chromosome, ind.report, i) for i, ind in enumerate(ranked)]


def test_config_validation():
    with pytest.raises(ValidationError):
        EvoConfig(population_size=5)
    with pytest.raises(ValidationError):
        EvoConfig(population_size=0)
    with pytest.raises(ValidationError):
        EvoConfig(value_mutation_rate=1.5)
    with pytest.raises(ValidationError):
        EvoConfig(pairing="tournament")


def test_init_population(iris_layout):
    cfg = EvoConfig(population_size=100)
    a = init_population(cfg, iris_layout, np.random.default_rng(3))
    b = init_population(cfg, iris_layout, np.random.default_rng(3))
    assert [ind.chromosome for ind in a] == [ind.chromosome for ind in b]
    assert len({ind.chromosome.key() for ind in a}) == 100
    assert all(ind.chromosome.mask_size == 4 for ind in a)
    assert [ind.index for ind in a] == list(range(100))


def test_crossover_rate_zero_copies_parents(iris_layout, rng):
    a, b = random_chromosome(iris_layout, rng), random_chromosome(iris_layout, rng)
    assert crossover(a, b, 0.0, rng) == (a, b)


def test_crossover_of_identical_parents(iris_layout, rng):
    a = random_chromosome(iris_layout, rng, mask_init="random")
    assert crossover(a, a, 1.0, rng) == (a, a)


def test_crossover_keeps_loci(rng):
    zeros = Chromosome(np.zeros(60), np.zeros(4))
    ones = Chromosome(np.ones(60), np.ones(4))
    for _ in range(1000):
        x, y = crossover(zeros, ones, 1.0, rng)
        np.testing.assert_array_equal(x.value_bits + y.value_bits, np.ones(60))
        np.testing.assert_array_equal(x.mask + y.mask, np.ones(4))
        swapped = np.flatnonzero(x.value_bits)
        assert swapped.size >= 1
        assert swapped[-1] - swapped[0] + 1 == swapped.size
        assert swapped[0] >= 1 and swapped[-1] <= 58


def test_crossover_rejects_mismatched_layouts(rng):
    with pytest.raises(GenomeError):
        crossover(Chromosome(np.zeros(8), [1]), Chromosome(np.zeros(6), [1]), 1.0, rng)


def test_mutation_rates(iris_layout, rng):
    c = random_chromosome(iris_layout, rng, mask_init="random")
    assert mutate(c, 0.0, 0.0, rng) == c
    flipped = mutate(c, 1.0, 1.0, rng)
    np.testing.assert_array_equal(flipped.value_bits, 1 - c.value_bits)
    np.testing.assert_array_equal(flipped.mask, 1 - c.mask)

    changed = 0
    for _ in range(100):
        changed += int(np.sum(mutate(c, 0.05, 0.0, rng).value_bits != c.value_bits))
    assert 0.045 <= changed / (100 * iris_layout.value_length) <= 0.055


def test_select_survivors_matches_sort(iris_layout, rng):
    for _ in range(50):
        pool = [_scored(random_chromosome(iris_layout, rng), float(rng.integers(0, 5)), i) for i in range(12)]
        expected = sorted(pool, key=lambda ind: (-ind.fitness, ind.index))[:6]
        assert [ind.index for ind in select_survivors(pool, 6)] == [ind.index for ind in expected]


def test_select_survivors_prefers_unique_chromosomes(iris_layout, rng):
    a, b = random_chromosome(iris_layout, rng), random_chromosome(iris_layout, rng)
    pool = [_scored(a, 5.0, 0), _scored(b, 1.0, 1), _scored(a, 5.0, 2), _scored(a, 5.0, 3)]
    survivors = select_survivors(pool, 2)
    assert [ind.index for ind in survivors] == [0, 1]
    assert [ind.index for ind in select_survivors(pool, 3)] == [0, 1, 2]


def test_zero_rates_keep_population(tiny_evaluator, rng):
    cfg = EvoConfig(population_size=4, value_crossover_rate=0.0, value_mutation_rate=0.0, mask_mutation_rate=0.0)
    parents = _evaluated_population(tiny_evaluator, cfg, rng)
    nxt = step_generation(parents, tiny_evaluator, cfg, rng)
    assert [ind.chromosome for ind in nxt] == [ind.chromosome for ind in parents]


def test_best_never_gets_worse(tiny_evaluator, rng):
    cfg = EvoConfig(population_size=4)
    population = _evaluated_population(tiny_evaluator, cfg, rng)
    for _ in range(2):
        best = population[0].fitness
        population = step_generation(population, tiny_evaluator, cfg, rng)
        assert population[0].fitness >= best
        assert [ind.index for ind in population] == [0, 1, 2, 3]


def test_step_needs_evaluated_parents(tiny_evaluator, iris_layout, rng):
    cfg = EvoConfig(population_size=4)
    population = init_population(cfg, iris_layout, rng)
    with pytest.raises(EvolutionError):
        step_generation(population, tiny_evaluator, cfg, rng)
    with pytest.raises(EvolutionError):
        population[0].fitness
    scored = [_scored(ind.chromosome, 1.0, ind.index) for ind in population]
    with pytest.raises(EvolutionError):
        step_generation(scored[:3], tiny_evaluator, cfg, rng)


def test_zero_generations(tiny_evaluator):
    result = evolve(EvoConfig(population_size=4, generations=0), tiny_evaluator)
    assert len(result.history) == 1
    assert result.generations == 0
    assert result.best.fitness == result.history[0].best_fitness
    assert result.best.fitness == max(ind.fitness for ind in result.population)


def test_evolution_is_deterministic(iris_skeleton, iris_layout, short_encoding, short_sim, tiny_evaluator):
    cfg = EvoConfig(population_size=4, generations=2, seed=9)

    def fresh():
        return FitnessEvaluator(iris_skeleton, iris_layout, tiny_evaluator.train, short_encoding, short_sim,
                                FitnessCoeffs(), noise=NoiseModel(target_sd=1.0))

    a, b = evolve(cfg, fresh()), evolve(cfg, fresh())
    assert a.best.chromosome == b.best.chromosome
    assert a.history == b.history


def test_history_best_is_monotone_without_noise(tiny_evaluator):
    seen = []
    result = evolve(EvoConfig(population_size=4, generations=3, seed=1), tiny_evaluator, on_generation=seen.append)
    assert seen == result.history
    assert [r.generation for r in result.history] == [0, 1, 2, 3]
    best = [r.best_fitness for r in result.history]
    assert best == sorted(best)
    assert tiny_evaluator.eval_key == ("static",)


def test_proportional_pairing(tiny_evaluator):
    result = evolve(EvoConfig(population_size=4, generations=1, pairing="proportional"), tiny_evaluator)
    assert result.generations == 1


def test_noise_resampled_per_generation(iris_skeleton, iris_layout, short_encoding, short_sim, tiny_evaluator):
    noisy = FitnessEvaluator(iris_skeleton, iris_layout, tiny_evaluator.train, short_encoding, short_sim,
                             FitnessCoeffs(), noise=NoiseModel(target_sd=1.0))
    result = evolve(EvoConfig(population_size=4, generations=2), noisy)
    assert noisy.eval_key == ("generation", 2)
    assert all(ind.report.eval_key == ("generation", 2) for ind in result.population)

    frozen = EvoConfig(population_size=4, generations=1, resample_noise=False)
    evolve(frozen, noisy)
    assert noisy.eval_key == ("static",)


def test_pattern_subset_per_generation(tiny_evaluator):
    evolve(EvoConfig(population_size=4, generations=1, subset_fraction=0.5), tiny_evaluator)
    assert tiny_evaluator.eval_key == ("generation", 1)
    assert len(tiny_evaluator.subset) == 9
    assert tiny_evaluator.subset.class_sizes().tolist() == [3, 3, 3]


def test_history_file(tmp_path):
    history = [GenerationRecord(0, 31.5, 30.75, 0.4, 4), GenerationRecord(1, 40.125, 33.0, 0.6, 3)]
    path = tmp_path / "history.tsv"
    write_history(history, path)
    assert path.read_text().splitlines()[0] == "generation\tbest_fitness\tmean_fitness\tbest_accuracy\tmask_size"
    assert read_history(path) == history
    assert format_history([]).count("\n") == 1

    path.write_text("gen\tbest\n")
    with pytest.raises(EvolutionError):
        read_history(path)
