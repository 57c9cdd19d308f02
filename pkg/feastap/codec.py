"""
Repetitive inter-spike-interval encoding of feature vectors and hot-spot
decoding of network output.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import ConfigError
from .neuron import Network, SimTrace
from .noise import NoiseModel, perturb_isi
from .spike_train import SpikeTrain

logger = logging.getLogger(__name__)

Range = Tuple[float, float]


class EncodingConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    isi_lo: float = Field(5.0, gt=0)
    isi_hi: float = Field(15.0, gt=0)
    horizon: float = Field(300.0, gt=0)
    feature_ranges: Tuple[Tuple[float, float], ...] = ()
    # decisions before this time count as early; None means one maximal ISI
    warmup: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if not self.isi_lo < self.isi_hi <= self.horizon:
            raise ValueError(
                f"need 0 < isi_lo < isi_hi <= horizon, got {self.isi_lo}, {self.isi_hi}, {self.horizon}"
            )
        for j, (lo, hi) in enumerate(self.feature_ranges):
            if not lo < hi:
                raise ValueError(f"feature {j} has degenerate range ({lo}, {hi})")
        return self

    @property
    def early_window(self) -> float:
        return self.isi_hi if self.warmup is None else self.warmup

    def with_ranges(self, ranges: Sequence[Range]) -> "EncodingConfig":
        return self.model_copy(update={"feature_ranges": tuple((float(lo), float(hi)) for lo, hi in ranges)})


@dataclass(frozen=True)
class Decision:
    class_index: Optional[int] = None
    decision_time: Optional[float] = None

    def __post_init__(self):
        if (self.class_index is None) != (self.decision_time is None):
            raise ValueError("class index and decision time must be given together")

    @property
    def silent(self) -> bool:
        return self.class_index is None


def scale_feature(value: float, value_range: Range, cfg: EncodingConfig) -> float:
    """Map a feature value linearly onto [isi_lo, isi_hi], clamping outliers"""
    lo, hi = value_range
    if not lo < hi:
        raise ConfigError(f"degenerate feature range ({lo}, {hi})")
    fraction = min(max((value - lo) / (hi - lo), 0.0), 1.0)
    return cfg.isi_lo + (cfg.isi_hi - cfg.isi_lo) * fraction


def _regular_train(isi: float, horizon: float) -> SpikeTrain:
    count = int(math.floor(horizon / isi + 1e-9))
    times = isi * np.arange(1, count + 1)
    return SpikeTrain(np.minimum(times, horizon))


def _noisy_train(isi: float, horizon: float, noise: NoiseModel, rng: np.random.Generator) -> SpikeTrain:
    chunk = int(horizon / isi) + 8
    times = np.cumsum(perturb_isi(isi, noise, rng, size=chunk))
    while times[-1] <= horizon:
        more = np.cumsum(perturb_isi(isi, noise, rng, size=chunk)) + times[-1]
        times = np.concatenate([times, more])
    return SpikeTrain(times[times <= horizon])


def encode(features: Sequence[float], mask: Sequence[int], cfg: EncodingConfig,
           noise: Optional[NoiseModel] = None,
           rng: Optional[np.random.Generator] = None) -> List[SpikeTrain]:
    """One spike train per feature; masked features get an empty train"""
    features = np.asarray(features, dtype=float)
    mask = np.asarray(mask).astype(bool)
    if features.shape != mask.shape:
        raise ConfigError(f"{features.size} features but mask of length {mask.size}")
    if len(cfg.feature_ranges) != features.size:
        raise ConfigError(f"{features.size} features but {len(cfg.feature_ranges)} feature ranges")

    noisy = noise is not None and noise.enabled
    if noisy and rng is None:
        raise ConfigError("noisy encoding needs a random stream")
    # one child stream per feature, so masking one input never shifts another's noise
    seeds = rng.integers(0, 2 ** 63 - 1, size=features.size) if noisy else None

    trains = []
    for j, value in enumerate(features):
        isi = scale_feature(float(value), cfg.feature_ranges[j], cfg)
        if not mask[j]:
            trains.append(SpikeTrain.empty())
        elif noisy:
            trains.append(_noisy_train(isi, cfg.horizon, noise, np.random.default_rng(seeds[j])))
        else:
            trains.append(_regular_train(isi, cfg.horizon))
    return trains


def encode_batch(patterns: np.ndarray, cfg: EncodingConfig, noise: Optional[NoiseModel] = None,
                 seed: int = 0) -> List[List[SpikeTrain]]:
    """Unmasked trains for every pattern, pattern i drawing from stream (seed, i)"""
    full_mask = np.ones(patterns.shape[1], dtype=np.uint8)
    return [
        encode(row, full_mask, cfg, noise, np.random.default_rng([seed, i]))
        for i, row in enumerate(patterns)
    ]


def apply_mask(trains: Sequence[SpikeTrain], mask: Sequence[int]) -> List[SpikeTrain]:
    return [train if bit else SpikeTrain.empty() for train, bit in zip(trains, mask)]


def decode(trace: SimTrace, net: Network) -> Decision:
    """Earliest-firing output neuron wins; ties go to the lowest output ordinal"""
    best: Optional[Tuple[int, float]] = None
    for ordinal, neuron_id in enumerate(net.output_neurons):
        first = trace.first_spike(neuron_id)
        if first is not None and (best is None or first < best[1]):
            best = (ordinal, first)
    if best is None:
        return Decision()
    return Decision(class_index=best[0], decision_time=best[1])


def isi_statistics(train: SpikeTrain) -> Tuple[float, float]:
    intervals = train.intervals()
    if not intervals.size:
        return float("nan"), float("nan")
    return float(intervals.mean()), float(intervals.std())
