import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from feastap.noise import ISI_FLOOR, NoiseModel, perturb_isi, sample_gamma


def test_gamma_moments():
    draws = sample_gamma(25.0, 0.8, np.random.default_rng(0), size=1_000_000)
    assert draws.mean() == pytest.approx(20.0, abs=0.05)
    assert draws.std() == pytest.approx(4.0, abs=0.05)
    assert stats.skew(draws) == pytest.approx(0.4, abs=0.03)


@pytest.mark.parametrize("alpha,beta", [(0.3, 1.0), (0.5, 2.0), (1.0, 1.5), (2.5, 1.0), (25.0, 0.8)])
def test_gamma_distribution_shape(alpha, beta):
    draws = sample_gamma(alpha, beta, np.random.default_rng(42), size=20_000)
    assert np.all(draws > 0)
    result = stats.kstest(draws, stats.gamma(alpha, scale=beta).cdf)
    assert result.pvalue > 1e-3


def test_gamma_scalar_draw():
    value = sample_gamma(25.0, 0.8, np.random.default_rng(1))
    assert isinstance(value, float)
    assert value > 0


def test_gamma_is_deterministic():
    a = sample_gamma(0.7, 1.0, np.random.default_rng(9), size=100)
    b = sample_gamma(0.7, 1.0, np.random.default_rng(9), size=100)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_gamma_rejects_bad_parameters(alpha, beta):
    with pytest.raises(ValueError):
        sample_gamma(alpha, beta, np.random.default_rng(0))


def test_perturbation_sd():
    isis = perturb_isi(10.0, NoiseModel(target_sd=1.0), np.random.default_rng(2), size=200_000)
    assert isis.std() == pytest.approx(1.0, abs=0.02)
    assert isis.mean() == pytest.approx(10.0, abs=0.02)


def test_perturbation_floor():
    isis = perturb_isi(0.6, NoiseModel(target_sd=1.0), np.random.default_rng(4), size=10_000)
    assert isis.min() >= ISI_FLOOR
    assert np.any(isis == ISI_FLOOR)


def test_zero_noise_is_identity():
    assert perturb_isi(7.5, NoiseModel.disabled(), np.random.default_rng(0)) == 7.5
    np.testing.assert_array_equal(perturb_isi(7.5, NoiseModel(), np.random.default_rng(0), size=3), [7.5] * 3)


def test_noise_levels():
    assert NoiseModel.from_level(1).target_sd == pytest.approx(0.1)
    assert NoiseModel.from_level(10).target_sd == pytest.approx(1.0)
    assert not NoiseModel.from_level(0).enabled


def test_noise_model_validation():
    with pytest.raises(ValidationError):
        NoiseModel(target_sd=-1.0)
    with pytest.raises(ValidationError):
        NoiseModel(alpha=0.0)
