"""
Scoring of one decoded network on a set of patterns.

The three-term fitness rewards overall correctness, the worst class, and
correct answers shared by pairs of classes. Correct ratios are normalized
by the total number of patterns, so they sum to the overall accuracy.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .codec import EncodingConfig, apply_mask, decode, encode, encode_batch
from .dataset import Dataset
from .errors import DatasetError, ConfigError
from .genome import Chromosome, GenomeLayout, decode_genome
from .neuron import CompiledNetwork, Network, SimConfig, compile_network
from .noise import NoiseModel
from .spike_train import SpikeTrain

logger = logging.getLogger(__name__)

FITNESS_MODES = ("three_term", "ratio")


class FitnessCoeffs(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    c1: float = Field(1.0, ge=0)
    c2: float = Field(30.0, ge=0)
    c3: float = Field(7.0, ge=0)
    epsilon: float = Field(0.01, gt=0)


@dataclass(frozen=True)
class PatternOutcome:
    predicted: Optional[int] = None
    decision_time: Optional[float] = None
    early: bool = False

    @property
    def silent(self) -> bool:
        return self.predicted is None

    def is_correct(self, label: int) -> bool:
        return not self.early and self.predicted == label


@dataclass(frozen=True)
class EvalReport:
    correct: np.ndarray       # per-class correct answers
    totals: np.ndarray        # per-class pattern counts
    fitness: float
    silent: int = 0
    early: int = 0
    eval_key: Optional[Hashable] = None

    @property
    def correct_ratio(self) -> np.ndarray:
        return self.correct / self.totals.sum()

    @property
    def accuracy(self) -> float:
        return float(self.correct.sum() / self.totals.sum())


def three_term_fitness(ratios: Sequence[float], coeffs: FitnessCoeffs) -> float:
    ratios = np.asarray(ratios, dtype=float)
    eps = coeffs.epsilon
    total = coeffs.c1 / (1.0 + eps - ratios.sum())
    worst = coeffs.c2 / (1.0 + eps - ratios.min())
    pairs = coeffs.c3 * sum(min(a, b) for a, b in combinations(ratios.tolist(), 2))
    return float(total + worst + pairs)


def simple_ratio_fitness(report: EvalReport) -> float:
    """Plain accuracy; kept only as a comparison baseline"""
    return report.accuracy


def classify_trains(compiled: CompiledNetwork, trains: Sequence[SpikeTrain], warmup: float) -> PatternOutcome:
    trace = compiled.run(trains, stop_on_output=True)
    decision = decode(trace, compiled.net)
    if decision.silent:
        return PatternOutcome()
    early = decision.decision_time < warmup - 1e-9
    return PatternOutcome(decision.class_index, decision.decision_time, early)


def classify_pattern(net: Network, pattern: Sequence[float], mask: Sequence[int], cfg: EncodingConfig,
                     noise: Optional[NoiseModel] = None, rng: Optional[np.random.Generator] = None,
                     sim: Optional[SimConfig] = None) -> PatternOutcome:
    if not len(pattern) == len(mask) == net.input_channels:
        raise ConfigError(
            f"pattern ({len(pattern)}), mask ({len(mask)}) and network inputs ({net.input_channels}) differ"
        )
    sim = sim if sim is not None else SimConfig(horizon=cfg.horizon)
    trains = encode(pattern, mask, cfg, noise, rng)
    return classify_trains(compile_network(net, sim), trains, cfg.early_window)


def evaluate(net: Network, mask: Sequence[int], subset: Dataset, coeffs: FitnessCoeffs,
             encoding: EncodingConfig, sim: SimConfig, noise: Optional[NoiseModel] = None,
             seed: int = 0, trains: Optional[List[List[SpikeTrain]]] = None,
             mode: str = "three_term", eval_key: Optional[Hashable] = None,
             require_all_classes: bool = True) -> EvalReport:
    """Classify every pattern of subset and score the network

    Pattern i is encoded from stream (seed, i) unless pre-encoded unmasked
    trains are given. Held-out scoring passes require_all_classes=False, so a
    class absent from the set simply contributes no correct answers.
    """
    if mode not in FITNESS_MODES:
        raise ConfigError(f"unknown fitness mode '{mode}', expected one of {FITNESS_MODES}")
    if not len(subset):
        raise DatasetError("cannot evaluate on an empty pattern set")
    totals = subset.class_sizes()
    if require_all_classes and np.any(totals == 0):
        missing = [subset.class_names[i] for i in np.flatnonzero(totals == 0)]
        raise DatasetError(f"evaluation set lacks classes {missing}")
    if trains is None:
        trains = encode_batch(subset.features, encoding, noise, seed)

    compiled = compile_network(net, sim)
    correct = np.zeros(subset.class_count, dtype=np.int64)
    silent = early = 0
    for pattern_trains, label in zip(trains, subset.labels):
        outcome = classify_trains(compiled, apply_mask(pattern_trains, mask), encoding.early_window)
        silent += outcome.silent
        early += outcome.early
        if outcome.is_correct(int(label)):
            correct[label] += 1

    return _report(correct, totals, coeffs, mode, silent, early, eval_key)


def _report(correct: np.ndarray, totals: np.ndarray, coeffs: FitnessCoeffs, mode: str,
            silent: int, early: int, eval_key: Optional[Hashable]) -> EvalReport:
    ratios = correct / totals.sum()
    fitness = three_term_fitness(ratios, coeffs) if mode == "three_term" else float(ratios.sum())
    return EvalReport(correct=correct, totals=totals, fitness=fitness, silent=silent, early=early, eval_key=eval_key)


def merge_reports(reports: Sequence[EvalReport], coeffs: FitnessCoeffs, mode: str = "three_term") -> EvalReport:
    """Pool the counts of several noise trials into one report"""
    if len(reports) == 1:
        return reports[0]
    return _report(
        sum(r.correct for r in reports), sum(r.totals for r in reports), coeffs, mode,
        sum(r.silent for r in reports), sum(r.early for r in reports), reports[0].eval_key,
    )


class FitnessEvaluator:
    """Scores chromosomes against a training set under one evaluation key

    The key names the noise realization and pattern subset in force; reports
    are only comparable when their keys match. With noise enabled each of the
    `trials` realizations is scored and the counts are pooled.
    """
    def __init__(self, skeleton: Network, layout: GenomeLayout, train: Dataset,
                 encoding: EncodingConfig, sim: SimConfig, coeffs: FitnessCoeffs,
                 noise: Optional[NoiseModel] = None, mode: str = "three_term"):
        if mode not in FITNESS_MODES:
            raise ConfigError(f"unknown fitness mode '{mode}', expected one of {FITNESS_MODES}")
        self.skeleton = skeleton
        self.layout = layout
        self.train = train
        self.encoding = encoding
        self.sim = sim
        self.coeffs = coeffs
        self.noise = noise if noise is not None else NoiseModel.disabled()
        self.mode = mode
        self.subset = train
        self.eval_key: Optional[Hashable] = None
        self._batches: Optional[List[List[List[SpikeTrain]]]] = None

    def prepare(self, key: Hashable, noise_seed: int = 0, subset: Optional[Dataset] = None,
                trials: int = 1) -> None:
        """Fix the patterns and noise realizations used by following evaluations"""
        if key == self.eval_key and self._batches is not None:
            return
        if trials < 1:
            raise ConfigError(f"trials must be at least 1, got {trials}")
        trials = trials if self.noise.enabled else 1
        self.subset = subset if subset is not None else self.train
        self._batches = [
            encode_batch(self.subset.features, self.encoding, self.noise, noise_seed + t)
            for t in range(trials)
        ]
        self.eval_key = key
        logger.debug(f"Prepared evaluation key {key} on {len(self.subset)} patterns, {trials} trial(s)")

    def network(self, chromosome: Chromosome) -> Network:
        return decode_genome(chromosome, self.layout, self.skeleton)

    def evaluate(self, chromosome: Chromosome) -> EvalReport:
        if self._batches is None:
            self.prepare(key=("static",))
        net = self.network(chromosome)
        reports = [
            evaluate(net, chromosome.mask, self.subset, self.coeffs, self.encoding, self.sim,
                     trains=trains, mode=self.mode, eval_key=self.eval_key)
            for trains in self._batches
        ]
        return merge_reports(reports, self.coeffs, self.mode)

    def evaluate_many(self, chromosomes: Sequence[Chromosome], workers: int = 1) -> List[EvalReport]:
        """Reports in input order; parallel runs give the same reports as serial ones"""
        if self._batches is None:
            self.prepare(key=("static",))
        if workers <= 1 or len(chromosomes) < 2:
            return [self.evaluate(c) for c in chromosomes]
        chunksize = max(1, math.ceil(len(chromosomes) / (4 * workers)))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(self.evaluate, chromosomes, chunksize=chunksize))
