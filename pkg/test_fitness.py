import numpy as np
import pytest

from feastap.codec import EncodingConfig
from feastap.dataset import Dataset
from feastap.errors import ConfigError, DatasetError
from feastap.fitness import (
    FitnessCoeffs, FitnessEvaluator, classify_pattern, evaluate, merge_reports, simple_ratio_fitness,
    three_term_fitness,
)
from feastap.genome import decode_genome, random_chromosome
from feastap.neuron import Network, NeuronSpec, SimConfig, SynapseSpec, WaveformParams
from feastap.noise import NoiseModel

COEFFS = FitnessCoeffs()
SIM = SimConfig(horizon=100.0)
ENC = EncodingConfig(horizon=100.0).with_ranges([(0.0, 1.0)])
THIRD = 1.0 / 3.0


def _hot_spot_net(latency=30.0, threshold=0.3):
    """Output 0 listens to the single input, output 1 never fires"""
    syn = SynapseSpec(0, 1.0, latency, WaveformParams(5.0, 15.0), external=True)
    neurons = (NeuronSpec(threshold, synapses=(syn,)), NeuronSpec(0.5))
    return Network(neurons=neurons, input_channels=1, output_neurons=(0, 1))


def _two_class_set():
    return Dataset(features=np.full((4, 1), 0.5), labels=[0, 0, 1, 1],
                   feature_ranges=((0.0, 1.0),), class_names=("a", "b"))


def test_three_term_reference_values():
    assert three_term_fitness([0.0, 0.0, 0.0], COEFFS) == pytest.approx(30.69, abs=0.01)
    assert three_term_fitness([THIRD] * 3, COEFFS) == pytest.approx(151.335, abs=0.01)


def test_three_term_prefers_more_classes():
    full = three_term_fitness([THIRD, THIRD, THIRD], COEFFS)
    two = three_term_fitness([THIRD, THIRD, 0.0], COEFFS)
    one = three_term_fitness([THIRD, 0.0, 0.0], COEFFS)
    assert full > two > one


def test_three_term_monotone_in_each_ratio(rng):
    for _ in range(1000):
        ratios = rng.dirichlet(np.ones(3)) * rng.uniform(0.0, 0.9)
        j = int(rng.integers(3))
        better = ratios.copy()
        better[j] += rng.uniform(0.001, 1.0 - ratios.sum())
        assert three_term_fitness(better, COEFFS) > three_term_fitness(ratios, COEFFS)


def test_three_term_rewards_balance(rng):
    for _ in range(1000):
        total = rng.uniform(0.05, 0.95)
        skewed = rng.dirichlet(np.ones(3)) * total
        if np.allclose(skewed, total / 3):
            continue
        assert three_term_fitness([total / 3] * 3, COEFFS) > three_term_fitness(skewed, COEFFS)


def test_hot_spot_decision():
    outcome = classify_pattern(_hot_spot_net(), [0.5], [1], ENC, sim=SIM)
    assert outcome.predicted == 0
    assert 40.0 < outcome.decision_time <= 47.0
    assert not outcome.early
    assert outcome.is_correct(0)


def test_early_decision_counts_as_wrong():
    outcome = classify_pattern(_hot_spot_net(latency=0.0, threshold=0.05), [0.0], [1], ENC, sim=SIM)
    assert outcome.predicted == 0
    assert outcome.decision_time < ENC.early_window
    assert outcome.early
    assert not outcome.is_correct(0)


def test_zero_warmup_accepts_any_decision():
    enc = EncodingConfig(horizon=100.0, warmup=0.0).with_ranges([(0.0, 1.0)])
    outcome = classify_pattern(_hot_spot_net(latency=0.0, threshold=0.05), [0.0], [1], enc, sim=SIM)
    assert not outcome.early
    assert outcome.is_correct(0)


def test_masked_input_gives_silent_network():
    outcome = classify_pattern(_hot_spot_net(), [0.5], [0], ENC, sim=SIM)
    assert outcome.silent
    assert not outcome.is_correct(0)


def test_masked_features_do_not_change_decisions(iris, iris_skeleton, iris_layout, short_encoding, short_sim, rng):
    noise = NoiseModel(target_sd=1.0)
    checked = 0
    for _ in range(200):
        chromosome = random_chromosome(iris_layout, rng, mask_init="random")
        hidden = chromosome.mask == 0
        if not hidden.any():
            continue
        net = decode_genome(chromosome, iris_layout, iris_skeleton)
        pattern = iris.features[rng.integers(len(iris))]
        other = pattern.copy()
        other[hidden] = iris.features[rng.integers(len(iris)), hidden]
        seed = int(rng.integers(2 ** 32))
        outcomes = [
            classify_pattern(net, x, chromosome.mask, short_encoding, noise, np.random.default_rng(seed), short_sim)
            for x in (pattern, other)
        ]
        assert outcomes[0] == outcomes[1]
        checked += 1
    assert checked > 100


def test_classify_pattern_checks_lengths():
    with pytest.raises(ConfigError):
        classify_pattern(_hot_spot_net(), [0.5, 0.5], [1, 1], ENC, sim=SIM)


def test_evaluate_scores_per_class():
    report = evaluate(_hot_spot_net(), [1], _two_class_set(), COEFFS, ENC, SIM)
    assert report.correct.tolist() == [2, 0]
    assert report.totals.tolist() == [2, 2]
    assert report.accuracy == 0.5
    np.testing.assert_allclose(report.correct_ratio, [0.5, 0.0])
    assert report.fitness == pytest.approx(three_term_fitness([0.5, 0.0], COEFFS))


def test_ratio_mode():
    report = evaluate(_hot_spot_net(), [1], _two_class_set(), COEFFS, ENC, SIM, mode="ratio")
    assert report.fitness == 0.5
    assert simple_ratio_fitness(report) == 0.5


def test_silent_patterns_are_counted():
    report = evaluate(_hot_spot_net(), [0], _two_class_set(), COEFFS, ENC, SIM)
    assert report.silent == 4
    assert report.correct.sum() == 0


def test_evaluate_rejects_bad_sets():
    empty = Dataset(features=np.zeros((0, 1)), labels=[], feature_ranges=((0.0, 1.0),), class_names=("a", "b"))
    with pytest.raises(DatasetError):
        evaluate(_hot_spot_net(), [1], empty, COEFFS, ENC, SIM)
    one_class = Dataset(features=np.full((2, 1), 0.5), labels=[0, 0],
                        feature_ranges=((0.0, 1.0),), class_names=("a", "b"))
    with pytest.raises(DatasetError, match="lacks"):
        evaluate(_hot_spot_net(), [1], one_class, COEFFS, ENC, SIM)
    with pytest.raises(ConfigError):
        evaluate(_hot_spot_net(), [1], _two_class_set(), COEFFS, ENC, SIM, mode="f1")


def test_held_out_scoring_tolerates_missing_class():
    one_class = Dataset(features=np.full((2, 1), 0.5), labels=[0, 0],
                        feature_ranges=((0.0, 1.0),), class_names=("a", "b"))
    report = evaluate(_hot_spot_net(), [1], one_class, COEFFS, ENC, SIM, require_all_classes=False)
    assert report.totals.tolist() == [2, 0]
    assert report.accuracy == 1.0
    assert report.fitness == pytest.approx(three_term_fitness([1.0, 0.0], COEFFS))


def test_noisy_evaluation_is_deterministic(iris, iris_skeleton, iris_layout, short_encoding, short_sim, rng):
    chromosome = random_chromosome(iris_layout, rng)
    net = decode_genome(chromosome, iris_layout, iris_skeleton)
    subset = iris.subset(np.arange(0, 150, 10))
    noise = NoiseModel(target_sd=1.0)
    a = evaluate(net, chromosome.mask, subset, COEFFS, short_encoding, short_sim, noise, seed=5)
    b = evaluate(net, chromosome.mask, subset, COEFFS, short_encoding, short_sim, noise, seed=5)
    np.testing.assert_array_equal(a.correct, b.correct)
    assert a.fitness == b.fitness


def test_merge_reports_pools_counts():
    report = evaluate(_hot_spot_net(), [1], _two_class_set(), COEFFS, ENC, SIM)
    merged = merge_reports([report, report], COEFFS)
    assert merged.totals.tolist() == [4, 4]
    assert merged.fitness == pytest.approx(report.fitness)
    assert merge_reports([report], COEFFS) is report


def test_evaluator_parallel_matches_serial(tiny_evaluator, iris_layout, rng):
    chromosomes = [random_chromosome(iris_layout, rng) for _ in range(6)]
    tiny_evaluator.prepare(("static",))
    serial = tiny_evaluator.evaluate_many(chromosomes)
    parallel = tiny_evaluator.evaluate_many(chromosomes, workers=2)
    assert [r.fitness for r in serial] == [r.fitness for r in parallel]
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.correct, b.correct)


def test_evaluator_pools_noise_trials(iris_skeleton, iris_layout, short_encoding, short_sim, tiny_evaluator, rng):
    train = tiny_evaluator.train
    noisy = FitnessEvaluator(iris_skeleton, iris_layout, train, short_encoding, short_sim, COEFFS,
                             noise=NoiseModel(target_sd=1.0))
    noisy.prepare(("generation", 0), noise_seed=3, trials=3)
    report = noisy.evaluate(random_chromosome(iris_layout, rng))
    assert report.totals.sum() == 3 * len(train)
    assert report.eval_key == ("generation", 0)


def test_trials_collapse_without_noise(tiny_evaluator, iris_layout, rng):
    tiny_evaluator.prepare(("static",), trials=4)
    report = tiny_evaluator.evaluate(random_chromosome(iris_layout, rng))
    assert report.totals.sum() == len(tiny_evaluator.train)


def test_evaluator_validation(iris_skeleton, iris_layout, short_encoding, short_sim, tiny_evaluator):
    with pytest.raises(ConfigError):
        FitnessEvaluator(iris_skeleton, iris_layout, tiny_evaluator.train, short_encoding, short_sim,
                         COEFFS, mode="f1")
    with pytest.raises(ConfigError):
        tiny_evaluator.prepare(("generation", 1), trials=0)


def test_prepare_reuses_same_key(tiny_evaluator):
    tiny_evaluator.prepare(("static",))
    batches = tiny_evaluator._batches
    tiny_evaluator.prepare(("static",))
    assert tiny_evaluator._batches is batches
