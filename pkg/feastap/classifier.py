"""Inference wrapper around the best network of one training run."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .codec import EncodingConfig, encode
from .config import ExperimentConfig, load_config
from .dataset import Dataset
from .errors import ConfigError
from .fitness import EvalReport, classify_trains, evaluate
from .genome import Chromosome, GenomeLayout, build_layout, chromosome_from_text, decode_genome
from .neuron import Network, SimConfig, compile_network, dump_trace
from .noise import NoiseModel

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.txt"
DATASET_FILE = "dataset.json"
SPLIT_FILE = "split.json"
CHROMOSOME_FILE = "best.chromosome"


@dataclass(frozen=True)
class Classification:
    class_index: Optional[int]
    class_name: Optional[str]
    decision_time: Optional[float]
    early: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "class_index": self.class_index,
            "class_name": self.class_name,
            "decision_time": self.decision_time,
            "early": self.early,
        }


class TrainedClassifier:
    """Evolved network, its feature mask and the settings it was trained with"""

    def __init__(self, cfg: ExperimentConfig, chromosome: Chromosome, layout: GenomeLayout,
                 skeleton: Network, class_names: Sequence[str], feature_ranges: Sequence[Sequence[float]],
                 split: Optional[Dict[str, Any]] = None, run_dir: Optional[Path] = None):
        self.cfg = cfg
        self.chromosome = chromosome
        self.layout = layout
        self.network = decode_genome(chromosome, layout, skeleton)
        self.class_names = tuple(class_names)
        self.feature_ranges = tuple((float(lo), float(hi)) for lo, hi in feature_ranges)
        self.split = split or {}
        self.run_dir = run_dir
        self.encoding: EncodingConfig = cfg.encoding_config(self.feature_ranges)
        self.sim: SimConfig = cfg.sim_config()
        self._compiled = compile_network(self.network, self.sim)

    @classmethod
    def load(cls, run_dir: Union[str, Path]) -> "TrainedClassifier":
        run_dir = Path(run_dir)
        for name in (CONFIG_FILE, DATASET_FILE, CHROMOSOME_FILE):
            if not (run_dir / name).is_file():
                raise ConfigError(f"{run_dir} is not a run directory: {name} missing")
        cfg = load_config(run_dir / CONFIG_FILE)
        meta = json.loads((run_dir / DATASET_FILE).read_text())
        split_path = run_dir / SPLIT_FILE
        split = json.loads(split_path.read_text()) if split_path.is_file() else None

        class_names, ranges = meta["class_names"], meta["feature_ranges"]
        skeleton = cfg.build_network(len(ranges), len(class_names))
        layout = build_layout(skeleton, len(ranges), cfg.gene_width, cfg.gene_bounds())
        chromosome = chromosome_from_text((run_dir / CHROMOSOME_FILE).read_text(), layout)
        logger.info(f"Loaded classifier from {run_dir} (mask {chromosome.mask_string})")
        return cls(cfg, chromosome, layout, skeleton, class_names, ranges, split, run_dir)

    @property
    def feature_count(self) -> int:
        return len(self.feature_ranges)

    def _check_features(self, features: Sequence[float]) -> np.ndarray:
        features = np.asarray(features, dtype=float).reshape(-1)
        if features.size != self.feature_count:
            raise ConfigError(f"expected {self.feature_count} features, got {features.size}")
        return features

    def _encode(self, features: Sequence[float], noise_sd: float, seed: int):
        noise = self.cfg.noise_model(noise_sd)
        rng = np.random.default_rng(seed) if noise.enabled else None
        return encode(self._check_features(features), self.chromosome.mask, self.encoding, noise, rng)

    def __call__(self, features: Sequence[float], noise_sd: float = 0.0, seed: int = 0) -> Classification:
        outcome = classify_trains(self._compiled, self._encode(features, noise_sd, seed),
                                  self.encoding.early_window)
        name = None if outcome.silent else self.class_names[outcome.predicted]
        return Classification(outcome.predicted, name, outcome.decision_time, outcome.early)

    def trace(self, features: Sequence[float], noise_sd: float = 0.0, seed: int = 0) -> str:
        """Spike dump of a full-horizon run on one pattern"""
        return dump_trace(self._compiled.run(self._encode(features, noise_sd, seed)))

    def decide_all(self, d: Dataset, sim: Optional[SimConfig] = None) -> List[Optional[int]]:
        """Noiseless class decisions, early responses included"""
        compiled = self._compiled if sim is None else compile_network(self.network, sim)
        decisions = []
        for row in d.features:
            trains = encode(row, self.chromosome.mask, self.encoding)
            decisions.append(classify_trains(compiled, trains, self.encoding.early_window).predicted)
        return decisions

    def evaluate(self, d: Dataset, noise: Optional[NoiseModel] = None, noise_seed: int = 0) -> EvalReport:
        return evaluate(
            self.network, self.chromosome.mask, d, self.cfg.fitness_coeffs(), self.encoding, self.sim,
            noise=noise, seed=noise_seed, mode=self.cfg.fitness_mode, require_all_classes=False,
        )

    def test_set(self, d: Dataset) -> Dataset:
        if "test" not in self.split:
            raise ConfigError("classifier has no stored test split")
        return d.select(self.split["test"])

    @property
    def metadata(self) -> Dict[str, Any]:
        return {
            "run_dir": str(self.run_dir) if self.run_dir else None,
            "skeleton": self.cfg.skeleton,
            "neurons": len(self.network.neurons),
            "synapses": self.network.synapse_count,
            "features": self.feature_count,
            "mask": self.chromosome.mask_string,
            "selected_features": self.chromosome.mask_size,
            "class_names": list(self.class_names),
            "seed": self.cfg.seed,
        }
