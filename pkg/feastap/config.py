"""
Flat experiment configuration and its `key = value` file format.

Every field of ExperimentConfig is one key of the file; the typed configs of
the other modules are derived from it.
"""
import logging
import re
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .codec import EncodingConfig
from .errors import ConfigError
from .evolution import EvoConfig
from .fitness import FITNESS_MODES, FitnessCoeffs
from .genome import GeneBounds
from .neuron import MAX_LATENCY, Network, SimConfig
from .noise import NoiseModel
from .skeletons import NetworkSkeleton, registry

logger = logging.getLogger(__name__)

# `#` opens a comment only at line start or after whitespace
COMMENT = re.compile(r"(?:^|\s)#")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # data
    dataset: str = "data/iris.csv"
    header: bool = False
    train_fraction: float = Field(0.8, gt=0, lt=1)
    stratified: bool = True

    # network
    skeleton: str = "recurrent"
    hidden_size: int = Field(2, ge=1)
    t1: float = Field(5.0, gt=0)
    t2: float = Field(15.0, gt=0)
    i_min: float = Field(1.0, gt=0)
    i_max: float = Field(10.0, gt=0)

    # simulation and encoding
    dt: float = Field(0.1, gt=0)
    horizon: float = Field(300.0, gt=0)
    clamp_isi: bool = True
    isi_lo: float = Field(5.0, gt=0)
    isi_hi: float = Field(15.0, gt=0)
    warmup: Optional[float] = Field(None, ge=0)

    # genome
    gene_width: int = Field(12, ge=1, le=62)
    weight_lo: float = -1.0
    weight_hi: float = 1.0
    latency_lo: float = 0.0
    latency_hi: float = 40.0
    threshold_lo: float = 0.0
    threshold_hi: float = 1.0

    # fitness
    fitness_mode: str = "three_term"
    c1: float = Field(1.0, ge=0)
    c2: float = Field(30.0, ge=0)
    c3: float = Field(7.0, ge=0)
    epsilon: float = Field(0.01, gt=0)

    # noise
    noise_sd: float = Field(0.0, ge=0)
    noise_alpha: float = Field(25.0, gt=0)
    noise_beta: float = Field(0.8, gt=0)
    test_noise: bool = True

    # evolution
    population_size: int = Field(100, ge=2)
    generations: int = Field(300, ge=0)
    value_crossover_rate: float = Field(0.7, ge=0, le=1)
    value_mutation_rate: float = Field(0.05, ge=0, le=1)
    mask_mutation_rate: float = Field(0.05, ge=0, le=1)
    trials: int = Field(1, ge=1)
    pairing: Literal["random", "proportional"] = "random"
    mask_init: Literal["ones", "random"] = "ones"
    subset_fraction: float = Field(1.0, gt=0, le=1)
    resample_noise: bool = True
    workers: int = Field(1, ge=1)

    # experiment
    seed: int = Field(0, ge=0)
    repeats: int = Field(5, ge=1)
    concurrent_repeats: int = Field(1, ge=1)
    out_dir: str = "runs"
    plots: bool = False

    @model_validator(mode="after")
    def _check(self):
        if self.fitness_mode not in FITNESS_MODES:
            raise ValueError(f"fitness_mode must be one of {FITNESS_MODES}, got '{self.fitness_mode}'")
        if self.skeleton not in registry.names():
            raise ValueError(f"unknown skeleton '{self.skeleton}', available: {registry.names()}")
        if self.population_size % 2:
            raise ValueError(f"population_size must be even, got {self.population_size}")
        if not self.i_min < self.i_max:
            raise ValueError(f"need i_min < i_max, got {self.i_min}, {self.i_max}")
        for name, (lo, hi), (low, high) in (
            ("weight", (self.weight_lo, self.weight_hi), (-1.0, 1.0)),
            ("latency", (self.latency_lo, self.latency_hi), (0.0, MAX_LATENCY)),
            ("threshold", (self.threshold_lo, self.threshold_hi), (0.0, 1.0)),
        ):
            if not low <= lo < hi <= high:
                raise ValueError(f"need {low} <= {name}_lo < {name}_hi <= {high}, got {lo}, {hi}")
        return self

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with some fields replaced; None values are ignored"""
        values = self.model_dump()
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return ExperimentConfig.model_validate(values)
        except ValidationError as e:
            raise ConfigError(f"invalid override: {e}") from None

    def check_paths(self) -> None:
        if not Path(self.dataset).is_file():
            raise ConfigError(f"dataset file {self.dataset} does not exist")

    def sim_config(self, **overrides: Any) -> SimConfig:
        values = {"dt": self.dt, "horizon": self.horizon, "clamp_isi": self.clamp_isi}
        values.update(overrides)
        return SimConfig(**values)

    def encoding_config(self, ranges: Sequence[Tuple[float, float]] = ()) -> EncodingConfig:
        return EncodingConfig(isi_lo=self.isi_lo, isi_hi=self.isi_hi, horizon=self.horizon,
                              warmup=self.warmup).with_ranges(ranges)

    def noise_model(self, target_sd: Optional[float] = None) -> NoiseModel:
        sd = self.noise_sd if target_sd is None else target_sd
        return NoiseModel(target_sd=sd, alpha=self.noise_alpha, beta=self.noise_beta)

    def test_noise_model(self) -> NoiseModel:
        return self.noise_model() if self.test_noise else NoiseModel.disabled()

    def fitness_coeffs(self) -> FitnessCoeffs:
        return FitnessCoeffs(c1=self.c1, c2=self.c2, c3=self.c3, epsilon=self.epsilon)

    def gene_bounds(self) -> GeneBounds:
        return GeneBounds(
            weight=(self.weight_lo, self.weight_hi),
            latency=(self.latency_lo, self.latency_hi),
            threshold=(self.threshold_lo, self.threshold_hi),
        )

    def evo_config(self, seed: Optional[int] = None) -> EvoConfig:
        return EvoConfig(
            population_size=self.population_size,
            generations=self.generations,
            value_crossover_rate=self.value_crossover_rate,
            value_mutation_rate=self.value_mutation_rate,
            mask_mutation_rate=self.mask_mutation_rate,
            trials=self.trials,
            seed=self.seed if seed is None else seed,
            pairing=self.pairing,
            mask_init=self.mask_init,
            subset_fraction=self.subset_fraction,
            resample_noise=self.resample_noise,
            workers=self.workers,
        )

    def network_skeleton(self) -> NetworkSkeleton:
        kwargs: Dict[str, Any] = {"t1": self.t1, "t2": self.t2, "i_min": self.i_min, "i_max": self.i_max}
        if self.skeleton == "hidden":
            kwargs["hidden_size"] = self.hidden_size
        return registry.get_skeleton(self.skeleton, **kwargs)

    def build_network(self, n_inputs: int, n_classes: int) -> Network:
        return self.network_skeleton().build(n_inputs, n_classes)

    def to_text(self) -> str:
        lines = []
        for key, value in self.model_dump().items():
            if isinstance(value, bool):
                value = str(value).lower()
            elif value is None:
                value = "none"
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse `key = value` lines; `#` at line start or after whitespace starts a comment"""
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = COMMENT.split(raw, maxsplit=1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}, line {lineno}: expected 'key = value', got '{raw.strip()}'")
        if key not in ExperimentConfig.model_fields:
            raise ConfigError(f"{source}, line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{source}, line {lineno}: duplicate key '{key}'")
        values[key] = value

    if values.get("warmup", "").lower() == "none":
        values.pop("warmup")
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"{source}: {e}") from None


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    cfg = parse_config(path.read_text(), source=str(path))
    logger.info(f"Loaded config from {path}")
    return cfg
