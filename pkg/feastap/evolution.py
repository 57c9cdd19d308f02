"""
Generational genetic algorithm over chromosomes (values + feature mask).

Offspring are produced by random pairing, two-point crossover and bit-flip
mutation; parents and offspring are pooled and the better half survives.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .codec import EncodingConfig
from .dataset import Dataset, stratified_subset
from .errors import EvolutionError, GenomeError
from .fitness import EvalReport, FitnessCoeffs, FitnessEvaluator
from .genome import Chromosome, GenomeLayout, random_chromosome
from .neuron import Network, SimConfig
from .noise import NoiseModel

logger = logging.getLogger(__name__)

HISTORY_FIELDS = ("generation", "best_fitness", "mean_fitness", "best_accuracy", "mask_size")


class EvoConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    population_size: int = Field(100, ge=2)
    generations: int = Field(300, ge=0)
    value_crossover_rate: float = Field(0.7, ge=0, le=1)
    value_mutation_rate: float = Field(0.05, ge=0, le=1)
    mask_mutation_rate: float = Field(0.05, ge=0, le=1)
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    pairing: Literal["random", "proportional"] = "random"
    mask_init: Literal["ones", "random"] = "ones"
    subset_fraction: float = Field(1.0, gt=0, le=1)
    resample_noise: bool = True
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _even_population(self):
        if self.population_size % 2:
            raise ValueError(f"population size must be even, got {self.population_size}")
        return self


@dataclass
class Individual:
    chromosome: Chromosome
    report: Optional[EvalReport] = None
    index: int = 0

    @property
    def fitness(self) -> float:
        if self.report is None:
            raise EvolutionError("individual has not been evaluated")
        return self.report.fitness


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_accuracy: float
    mask_size: int


@dataclass
class EvolutionResult:
    best: Individual
    history: List[GenerationRecord]
    population: List[Individual] = field(default_factory=list)

    @property
    def generations(self) -> int:
        return self.history[-1].generation if self.history else 0


def init_population(cfg: EvoConfig, layout: GenomeLayout, rng: np.random.Generator) -> List[Individual]:
    if cfg.population_size < 2:
        raise EvolutionError(f"population size must be at least 2, got {cfg.population_size}")
    return [
        Individual(random_chromosome(layout, rng, cfg.mask_init), index=i)
        for i in range(cfg.population_size)
    ]


def _two_point(x: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
    length = x.size
    if length < 2:
        return
    if length == 2:
        lo, hi = 1, 2
    else:
        lo, hi = sorted(rng.choice(np.arange(1, length), size=2, replace=False).tolist())
    x[lo:hi], y[lo:hi] = y[lo:hi].copy(), x[lo:hi].copy()


def crossover(a: Chromosome, b: Chromosome, rate: float,
              rng: np.random.Generator) -> Tuple[Chromosome, Chromosome]:
    """Two-point crossover of the value bits and, independently, of the masks"""
    if a.value_bits.size != b.value_bits.size or a.mask.size != b.mask.size:
        raise GenomeError("cannot cross chromosomes of different layouts")
    va, vb = a.value_bits.copy(), b.value_bits.copy()
    ma, mb = a.mask.copy(), b.mask.copy()
    if rng.random() < rate:
        _two_point(va, vb, rng)
    if rng.random() < rate:
        _two_point(ma, mb, rng)
    return Chromosome(va, ma), Chromosome(vb, mb)


def mutate(c: Chromosome, value_rate: float, mask_rate: float, rng: np.random.Generator) -> Chromosome:
    value_flips = rng.random(c.value_bits.size) < value_rate
    mask_flips = rng.random(c.mask.size) < mask_rate
    return Chromosome(c.value_bits ^ value_flips, c.mask ^ mask_flips)


def select_survivors(pool: Sequence[Individual], n: int) -> List[Individual]:
    """The n fittest; ties go to the lower creation index

    A chromosome already taken is only admitted again when the unique ones
    run out, so clones of a parent never displace other parents.
    """
    ranked = sorted(pool, key=lambda ind: (-ind.fitness, ind.index))
    seen = set()
    unique, repeats = [], []
    for ind in ranked:
        key = ind.chromosome.key()
        (repeats if key in seen else unique).append(ind)
        seen.add(key)
    return (unique + repeats)[:n]


def _pairs(parents: Sequence[Individual], cfg: EvoConfig,
           rng: np.random.Generator) -> List[Tuple[Individual, Individual]]:
    n = len(parents)
    if cfg.pairing == "random":
        order = rng.permutation(n)
        return [(parents[order[k]], parents[order[k + 1]]) for k in range(0, n, 2)]
    fitness = np.array([p.fitness for p in parents])
    probs = fitness / fitness.sum() if fitness.sum() > 0 else None
    pairs = []
    for _ in range(n // 2):
        i, j = rng.choice(n, size=2, replace=False, p=probs)
        pairs.append((parents[i], parents[j]))
    return pairs


def _refresh(population: Sequence[Individual], evaluator: FitnessEvaluator, workers: int) -> List[Individual]:
    """Re-score individuals whose reports were made under another evaluation key"""
    stale = [i for i, ind in enumerate(population) if ind.report.eval_key != evaluator.eval_key]
    if not stale:
        return list(population)
    reports = evaluator.evaluate_many([population[i].chromosome for i in stale], workers)
    refreshed = list(population)
    for i, report in zip(stale, reports):
        refreshed[i] = Individual(population[i].chromosome, report, population[i].index)
    return refreshed


def step_generation(population: Sequence[Individual], evaluator: FitnessEvaluator, cfg: EvoConfig,
                    rng: np.random.Generator) -> List[Individual]:
    n = len(population)
    if n < 2 or n % 2:
        raise EvolutionError(f"population size must be even and at least 2, got {n}")
    if any(ind.report is None for ind in population):
        raise EvolutionError("all parents must be evaluated before a generation step")

    population = _refresh(population, evaluator, cfg.workers)
    parents = [Individual(ind.chromosome, ind.report, index=i) for i, ind in enumerate(population)]

    children: List[Chromosome] = []
    for a, b in _pairs(parents, cfg, rng):
        for child in crossover(a.chromosome, b.chromosome, cfg.value_crossover_rate, rng):
            children.append(mutate(child, cfg.value_mutation_rate, cfg.mask_mutation_rate, rng))

    reports = evaluator.evaluate_many(children, cfg.workers)
    offspring = [Individual(c, r, index=n + k) for k, (c, r) in enumerate(zip(children, reports))]
    survivors = select_survivors(parents + offspring, n)
    return [Individual(ind.chromosome, ind.report, index=i) for i, ind in enumerate(survivors)]


def _derived_seed(*entropy: int) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1, dtype=np.uint64)[0] >> 1)


def _record(generation: int, population: Sequence[Individual]) -> GenerationRecord:
    best = population[0]
    return GenerationRecord(
        generation=generation,
        best_fitness=best.fitness,
        mean_fitness=float(np.mean([ind.fitness for ind in population])),
        best_accuracy=best.report.accuracy,
        mask_size=best.chromosome.mask_size,
    )


def _prepare_generation(evaluator: FitnessEvaluator, cfg: EvoConfig, generation: int) -> None:
    varying_noise = evaluator.noise.enabled and cfg.resample_noise
    varying_subset = cfg.subset_fraction < 1.0
    if not (varying_noise or varying_subset):
        evaluator.prepare(("static",), noise_seed=_derived_seed(cfg.seed, 1, 0), trials=cfg.trials)
        return
    subset = None
    if varying_subset:
        subset = stratified_subset(evaluator.train, cfg.subset_fraction,
                                   np.random.default_rng(_derived_seed(cfg.seed, 2, generation)))
    noise_generation = generation if varying_noise else 0
    evaluator.prepare(("generation", generation), noise_seed=_derived_seed(cfg.seed, 1, noise_generation),
                      subset=subset, trials=cfg.trials)


def evolve(cfg: EvoConfig, evaluator: FitnessEvaluator,
           on_generation: Optional[Callable[[GenerationRecord], None]] = None) -> EvolutionResult:
    rng = np.random.default_rng(_derived_seed(cfg.seed, 0))
    _prepare_generation(evaluator, cfg, 0)
    population = init_population(cfg, evaluator.layout, rng)
    reports = evaluator.evaluate_many([ind.chromosome for ind in population], cfg.workers)
    population = [Individual(ind.chromosome, r, ind.index) for ind, r in zip(population, reports)]
    population = [Individual(ind.chromosome, ind.report, i)
                  for i, ind in enumerate(select_survivors(population, len(population)))]

    history = [_record(0, population)]
    if on_generation:
        on_generation(history[-1])
    for generation in range(1, cfg.generations + 1):
        _prepare_generation(evaluator, cfg, generation)
        population = step_generation(population, evaluator, cfg, rng)
        record = _record(generation, population)
        history.append(record)
        logger.info(
            f"Generation {generation}: best {record.best_fitness:.4f} mean {record.mean_fitness:.4f} "
            f"accuracy {record.best_accuracy:.3f} mask {record.mask_size}"
        )
        if on_generation:
            on_generation(record)
    return EvolutionResult(best=population[0], history=history, population=population)


def run(cfg: EvoConfig, layout: GenomeLayout, skeleton: Network, train: Dataset,
        encoding: EncodingConfig, sim: SimConfig, coeffs: FitnessCoeffs,
        noise: Optional[NoiseModel] = None, mode: str = "three_term",
        on_generation: Optional[Callable[[GenerationRecord], None]] = None) -> EvolutionResult:
    evaluator = FitnessEvaluator(skeleton, layout, train, encoding, sim, coeffs, noise, mode)
    return evolve(cfg, evaluator, on_generation)


def format_history(history: Sequence[GenerationRecord]) -> str:
    lines = ["\t".join(HISTORY_FIELDS)]
    for r in history:
        lines.append(
            f"{r.generation}\t{r.best_fitness:.10g}\t{r.mean_fitness:.10g}\t{r.best_accuracy:.10g}\t{r.mask_size}"
        )
    return "\n".join(lines) + "\n"


def write_history(history: Sequence[GenerationRecord], path: Union[str, Path]) -> None:
    Path(path).write_text(format_history(history))


def read_history(path: Union[str, Path]) -> List[GenerationRecord]:
    rows = Path(path).read_text().splitlines()
    if not rows or tuple(rows[0].split("\t")) != HISTORY_FIELDS:
        raise EvolutionError(f"{path} is not a history log")
    records = []
    for row in rows[1:]:
        g, best, mean, acc, mask = row.split("\t")
        records.append(GenerationRecord(int(g), float(best), float(mean), float(acc), int(mask)))
    return records
