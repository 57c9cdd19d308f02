from pathlib import Path

import numpy as np
import pytest

from feastap.codec import EncodingConfig
from feastap.config import ExperimentConfig
from feastap.dataset import load_csv, stratified_subset
from feastap.fitness import FitnessCoeffs, FitnessEvaluator
from feastap.genome import build_layout
from feastap.neuron import SimConfig
from feastap.skeletons import RecurrentInputSkeleton

ROOT = Path(__file__).parent
IRIS_CSV = ROOT / "data" / "iris.csv"

# short simulations keep evolution tests fast
SHORT_HORIZON = 60.0


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def iris():
    return load_csv(IRIS_CSV)


@pytest.fixture(scope="session")
def small_iris(iris):
    """30 patterns, 10 per class, full-dataset ranges"""
    return stratified_subset(iris, 0.2, np.random.default_rng(0))


@pytest.fixture(scope="session")
def iris_skeleton():
    return RecurrentInputSkeleton().build(4, 3)


@pytest.fixture(scope="session")
def iris_layout(iris_skeleton):
    return build_layout(iris_skeleton, 4)


@pytest.fixture(scope="session")
def short_sim():
    return SimConfig(horizon=SHORT_HORIZON)


@pytest.fixture(scope="session")
def short_encoding(iris):
    return EncodingConfig(horizon=SHORT_HORIZON).with_ranges(iris.feature_ranges)


@pytest.fixture
def tiny_evaluator(iris, iris_skeleton, iris_layout, short_encoding, short_sim):
    train = stratified_subset(iris, 0.1, np.random.default_rng(0))
    return FitnessEvaluator(iris_skeleton, iris_layout, train, short_encoding, short_sim, FitnessCoeffs())


@pytest.fixture
def tiny_config(tmp_path):
    return ExperimentConfig(
        dataset=str(IRIS_CSV),
        horizon=SHORT_HORIZON,
        population_size=4,
        generations=2,
        repeats=2,
        out_dir=str(tmp_path / "runs"),
    )


@pytest.fixture(scope="session")
def trained_run(tmp_path_factory, small_iris):
    """Run directory of a one-generation training repeat"""
    from feastap.runner import run_repeat

    out = tmp_path_factory.mktemp("trained")
    cfg = ExperimentConfig(dataset=str(IRIS_CSV), horizon=SHORT_HORIZON, population_size=4,
                           generations=1, repeats=1)
    summary = run_repeat(cfg, small_iris, seed=0, out_dir=out)
    return out / summary.run_dir
