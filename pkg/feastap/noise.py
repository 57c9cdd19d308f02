"""
Gamma-distributed noise for encoded inter-spike intervals.

Samplers follow the classic constructions: Ahrens-Dieter GS (alpha < 1,
acceptance-rejection with composition), inverse transform (alpha = 1) and
the Cheng-Feast GKM1 ratio-of-uniforms method (alpha > 1). All samplers are
vectorized and draw only from the numpy Generator they are given.
"""
import logging
import math
from typing import Callable, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

ISI_FLOOR = 0.5
NOMINAL_ISI = 10.0

ArrayLike = Union[float, np.ndarray]


class NoiseModel(BaseModel):
    """Zero-mean Gamma-shaped ISI perturbation with standard deviation target_sd"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    target_sd: float = Field(0.0, ge=0)
    alpha: float = Field(25.0, gt=0)
    beta: float = Field(0.8, gt=0)

    @property
    def enabled(self) -> bool:
        return self.target_sd > 0

    @classmethod
    def disabled(cls) -> "NoiseModel":
        return cls(target_sd=0.0)

    @classmethod
    def from_level(cls, percent: float, **kwargs) -> "NoiseModel":
        """Noise level relative to the middle of the 5-15 ms band (10 % -> 1 ms)"""
        return cls(target_sd=NOMINAL_ISI * percent / 100.0, **kwargs)


def _fill(n: int, propose: Callable[[int], np.ndarray]) -> np.ndarray:
    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        accepted = propose(max(2 * need, 16))
        take = min(accepted.size, need)
        out[filled: filled + take] = accepted[:take]
        filled += take
    return out


def _gs_star(alpha: float, rng: np.random.Generator, n: int) -> np.ndarray:
    b = 1.0 + alpha / math.e

    def propose(m: int) -> np.ndarray:
        p = b * rng.random(m)
        w = rng.random(m)
        small = p <= 1.0
        x = np.empty(m)
        x[small] = p[small] ** (1.0 / alpha)
        x[~small] = -np.log((b - p[~small]) / alpha)
        with np.errstate(divide="ignore"):
            accept = np.where(small, w <= np.exp(-x), w <= x ** (alpha - 1.0))
        return x[accept]

    return _fill(n, propose)


def _gkm1(alpha: float, rng: np.random.Generator, n: int) -> np.ndarray:
    a = alpha - 1.0
    b = (alpha - 1.0 / (6.0 * alpha)) / a
    m = 2.0 / a
    d = m + 2.0

    def propose(k: int) -> np.ndarray:
        x = 1.0 - rng.random(k)
        y = 1.0 - rng.random(k)
        v = b * y / x
        quick = m * x - d + v + 1.0 / v <= 0.0
        full = m * np.log(x) - np.log(v) + v - 1.0 <= 0.0
        return a * v[quick | full]

    return _fill(n, propose)


def sample_gamma(alpha: float, beta: float, rng: np.random.Generator,
                 size: Optional[int] = None) -> ArrayLike:
    """Draw from Gamma(shape=alpha, scale=beta)"""
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"Gamma parameters must be positive, got alpha={alpha}, beta={beta}")
    n = 1 if size is None else int(size)
    if alpha == 1.0:
        draws = -np.log1p(-rng.random(n))
    elif alpha < 1.0:
        draws = _gs_star(alpha, rng, n)
    else:
        draws = _gkm1(alpha, rng, n)
    draws = beta * draws
    return float(draws[0]) if size is None else draws


def perturb_isi(nominal: ArrayLike, model: NoiseModel, rng: np.random.Generator,
                size: Optional[int] = None) -> ArrayLike:
    """Centred and rescaled Gamma perturbation of one or more nominal ISIs"""
    if np.any(np.asarray(nominal) <= 0):
        raise ValueError("nominal inter-spike interval must be positive")
    if not model.enabled:
        return nominal if size is None else np.full(size, nominal, dtype=float)
    x = sample_gamma(model.alpha, model.beta, rng, size)
    scale = model.target_sd / (model.beta * math.sqrt(model.alpha))
    return np.maximum(ISI_FLOOR, nominal + (x - model.alpha * model.beta) * scale)
