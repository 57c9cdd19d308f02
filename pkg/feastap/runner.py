"""
Experiment harness: seeded repeats of split -> evolve -> held-out test,
run-directory artifacts, aggregate reports and noise sweeps.

Each repeat with seed N writes `run_seed<N>/` holding config.txt,
dataset.json, split.json, history.tsv, best.chromosome and summary.json.
Nothing time-dependent is written, so re-running a config reproduces every
file byte for byte.
"""
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import evolution
from .classifier import (
    CHROMOSOME_FILE, CONFIG_FILE, DATASET_FILE, SPLIT_FILE, TrainedClassifier,
)
from .codec import encode
from .config import ExperimentConfig
from .dataset import Dataset, load_csv, split
from .errors import ConfigError
from .fitness import EvalReport, evaluate
from .genome import build_layout, chromosome_to_text, decode_genome

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.tsv"
SUMMARY_FILE = "summary.json"
REPORT_TEXT = "report.txt"
REPORT_JSON = "report.json"

# independent child streams of one repeat seed
_SPLIT_STREAM = 3
_TEST_NOISE_STREAM = 4
_TRAIN_NOISE_STREAM = 5

REPORT_COLUMNS = ("seed", "hidden", "inputs", "train_acc", "test_acc", "generations", "status")


@dataclass
class RunSummary:
    seed: int
    test_accuracy: float = float("nan")
    train_accuracy: float = float("nan")
    feature_count: int = 0
    total_features: int = 0
    generations: int = 0
    hidden_size: int = 0
    best_fitness: float = float("nan")
    mask: str = ""
    run_dir: str = ""
    wall_clock: float = 0.0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        """Artifact form; wall-clock time is left out"""
        values = asdict(self)
        values.pop("wall_clock")
        # NaN is not valid JSON
        return {k: None if isinstance(v, float) and v != v else v for k, v in values.items()}

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RunSummary":
        kwargs = {k: v for k, v in values.items() if k in cls.__dataclass_fields__}
        for key in ("test_accuracy", "train_accuracy", "best_fitness"):
            if kwargs.get(key) is None:
                kwargs[key] = float("nan")
        return cls(**kwargs)


def _stream_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, dtype=np.uint64)[0] >> 1)


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_repeat(cfg: ExperimentConfig, dataset: Dataset, seed: int, out_dir: Union[str, Path]) -> RunSummary:
    """One seeded repeat; module errors propagate"""
    started = time.perf_counter()
    run_cfg = cfg.with_overrides(seed=seed)
    run_dir = Path(out_dir) / f"run_seed{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)

    train, test = split(dataset, run_cfg.train_fraction, np.random.default_rng(_stream_seed(seed, _SPLIT_STREAM)),
                        stratified=run_cfg.stratified)
    skeleton_builder = run_cfg.network_skeleton()
    skeleton = skeleton_builder.build(dataset.feature_count, dataset.class_count)
    layout = build_layout(skeleton, dataset.feature_count, run_cfg.gene_width, run_cfg.gene_bounds())
    encoding = run_cfg.encoding_config(dataset.feature_ranges)
    sim = run_cfg.sim_config()
    coeffs = run_cfg.fitness_coeffs()
    logger.info(
        f"Seed {seed}: {len(train)} train / {len(test)} test patterns, {len(skeleton.neurons)} neurons, "
        f"{len(layout.genes)} genes"
    )

    result = evolution.run(run_cfg.evo_config(seed), layout, skeleton, train, encoding, sim, coeffs,
                           noise=run_cfg.noise_model(), mode=run_cfg.fitness_mode)
    best = result.best
    net = decode_genome(best.chromosome, layout, skeleton)
    test_noise_seed = _stream_seed(seed, _TEST_NOISE_STREAM)
    test_report = evaluate(net, best.chromosome.mask, test, coeffs, encoding, sim,
                           noise=run_cfg.test_noise_model(), seed=test_noise_seed, mode=run_cfg.fitness_mode,
                           require_all_classes=False)
    train_report = evaluate(net, best.chromosome.mask, train, coeffs, encoding, sim,
                            noise=run_cfg.noise_model(), seed=_stream_seed(seed, _TRAIN_NOISE_STREAM),
                            mode=run_cfg.fitness_mode, require_all_classes=False)

    (run_dir / CONFIG_FILE).write_text(run_cfg.to_text())
    _write_json(run_dir / DATASET_FILE, {
        "path": run_cfg.dataset,
        "class_names": list(dataset.class_names),
        "feature_ranges": [list(r) for r in dataset.feature_ranges],
    })
    _write_json(run_dir / SPLIT_FILE, {
        "train": train.indices.tolist(),
        "test": test.indices.tolist(),
        "test_noise_seed": test_noise_seed,
    })
    evolution.write_history(result.history, run_dir / HISTORY_FILE)
    (run_dir / CHROMOSOME_FILE).write_text(chromosome_to_text(best.chromosome, layout))

    summary = RunSummary(
        seed=seed,
        test_accuracy=test_report.accuracy,
        train_accuracy=train_report.accuracy,
        feature_count=best.chromosome.mask_size,
        total_features=dataset.feature_count,
        generations=result.generations,
        hidden_size=int(skeleton_builder.metadata.get("hidden_layer", 0)),
        best_fitness=best.fitness,
        mask=best.chromosome.mask_string,
        run_dir=run_dir.name,
    )
    _write_json(run_dir / SUMMARY_FILE, summary.to_dict())
    if run_cfg.plots:
        _write_plots(run_dir, result.history, encoding, dataset, skeleton_builder)
    summary.wall_clock = time.perf_counter() - started
    logger.info(
        f"Seed {seed}: test accuracy {summary.test_accuracy:.3f}, train accuracy {summary.train_accuracy:.3f}, "
        f"{summary.feature_count}/{summary.total_features} features, {summary.wall_clock:.1f}s"
    )
    return summary


def _write_plots(run_dir: Path, history, encoding, dataset: Dataset, skeleton_builder) -> None:
    from .plotting import plot_history, plot_psp, plot_raster

    plot_history(history, run_dir / "history.png")
    first = encode(dataset.features[0], np.ones(dataset.feature_count, dtype=np.uint8), encoding)
    plot_raster(first, run_dir / "raster.png", horizon=encoding.horizon)
    plot_psp({"synapse": skeleton_builder.waveform}, run_dir / "psp.png")


def _safe_repeat(cfg: ExperimentConfig, dataset: Dataset, seed: int, out_dir: str) -> RunSummary:
    try:
        return run_repeat(cfg, dataset, seed, out_dir)
    except Exception as e:
        logger.error(f"Seed {seed} failed: {e}", exc_info=True)
        return RunSummary(seed=seed, total_features=dataset.feature_count, error=f"{type(e).__name__}: {e}")


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None,
                   dataset: Optional[Dataset] = None) -> List[RunSummary]:
    """All repeats (seeds seed .. seed+repeats-1), then report.txt and report.json"""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if dataset is None:
        cfg.check_paths()
        dataset = load_csv(cfg.dataset, header=cfg.header)
    seeds = [cfg.seed + r for r in range(cfg.repeats)]

    if cfg.concurrent_repeats > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.concurrent_repeats, len(seeds))) as pool:
            futures = [pool.submit(_safe_repeat, cfg, dataset, seed, str(out)) for seed in seeds]
            summaries = [f.result() for f in futures]
    else:
        summaries = [_safe_repeat(cfg, dataset, seed, str(out)) for seed in seeds]

    summaries.sort(key=lambda s: s.seed)
    write_report(summaries, out)
    return summaries


def _fmt(value: float) -> str:
    return "-" if value != value else f"{value:.4f}"


def report(summaries: Sequence[RunSummary]) -> Tuple[str, Dict[str, Any]]:
    """Aligned table (one row per repeat, mean/max footer) and its structured form"""
    rows = []
    for s in summaries:
        rows.append((
            str(s.seed), str(s.hidden_size), f"{s.feature_count}/{s.total_features}",
            _fmt(s.train_accuracy), _fmt(s.test_accuracy), str(s.generations),
            "ok" if s.ok else "failed",
        ))
    widths = [max([len(c)] + [len(r[i]) for r in rows]) for i, c in enumerate(REPORT_COLUMNS)]

    def line(cells):
        return "  ".join(cell.rjust(w) for cell, w in zip(cells, widths)).rstrip()

    lines = [line(REPORT_COLUMNS), "  ".join("-" * w for w in widths)]
    lines.extend(line(r) for r in rows)

    ok = [s for s in summaries if s.ok]
    aggregate: Dict[str, Any] = {"runs": len(summaries), "failed": len(summaries) - len(ok)}
    if ok:
        test = np.array([s.test_accuracy for s in ok])
        train = np.array([s.train_accuracy for s in ok])
        inputs = np.array([s.feature_count for s in ok])
        aggregate.update({
            "mean_test_accuracy": float(test.mean()),
            "max_test_accuracy": float(test.max()),
            "mean_train_accuracy": float(train.mean()),
            "max_train_accuracy": float(train.max()),
            "mean_inputs": float(inputs.mean()),
        })
    if summaries:
        lines.append("  ".join("-" * w for w in widths))
        if ok:
            lines.append(f"mean: test {_fmt(aggregate['mean_test_accuracy'])}  "
                         f"train {_fmt(aggregate['mean_train_accuracy'])}  inputs {aggregate['mean_inputs']:.2f}")
            lines.append(f"max:  test {_fmt(aggregate['max_test_accuracy'])}  "
                         f"train {_fmt(aggregate['max_train_accuracy'])}")
        if aggregate["failed"]:
            lines.append(f"{aggregate['failed']} of {len(summaries)} runs failed and are excluded from mean/max")
        lines.append("accuracy is measured on the held-out test split, not on training patterns")

    structured = {
        "columns": list(REPORT_COLUMNS),
        "runs": [s.to_dict() for s in summaries],
        "aggregate": aggregate,
    }
    return "\n".join(lines) + "\n", structured


def write_report(summaries: Sequence[RunSummary], out_dir: Union[str, Path]) -> str:
    out = Path(out_dir)
    text, structured = report(summaries)
    (out / REPORT_TEXT).write_text(text)
    _write_json(out / REPORT_JSON, structured)
    logger.info(f"Report written to {out / REPORT_TEXT}")
    return text


def collect_summaries(runs_dir: Union[str, Path]) -> List[RunSummary]:
    """Summaries of every run directory under runs_dir, ordered by seed"""
    runs_dir = Path(runs_dir)
    if not runs_dir.is_dir():
        raise ConfigError(f"{runs_dir} is not a directory")
    summaries = [
        RunSummary.from_dict(json.loads(path.read_text()))
        for path in runs_dir.glob(f"run_seed*/{SUMMARY_FILE}")
    ]
    return sorted(summaries, key=lambda s: s.seed)


def evaluate_exported(run_dir: Union[str, Path], dataset: Optional[Dataset] = None) -> EvalReport:
    """Re-score the exported best chromosome on the stored test split"""
    classifier = TrainedClassifier.load(run_dir)
    if dataset is None:
        dataset = load_csv(classifier.cfg.dataset, header=classifier.cfg.header)
    test = classifier.test_set(dataset)
    return classifier.evaluate(test, noise=classifier.cfg.test_noise_model(),
                               noise_seed=int(classifier.split["test_noise_seed"]))


def dt_robustness(classifier: TrainedClassifier, dataset: Dataset, dt_a: float = 0.1, dt_b: float = 0.05) -> float:
    """Fraction of noiseless decisions that change between two time steps"""
    if not len(dataset):
        raise ConfigError("dt robustness needs at least one pattern")
    first = classifier.decide_all(dataset, classifier.cfg.sim_config(dt=dt_a))
    second = classifier.decide_all(dataset, classifier.cfg.sim_config(dt=dt_b))
    mismatches = sum(a != b for a, b in zip(first, second))
    return mismatches / len(dataset)


def noise_sweep(cfg: ExperimentConfig, levels: Sequence[float],
                out_dir: Optional[Union[str, Path]] = None) -> Dict[float, List[RunSummary]]:
    """Full experiment per noise SD (ms), each under `noise_<sd>/` with matched seeds"""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    cfg.check_paths()
    dataset = load_csv(cfg.dataset, header=cfg.header)
    results: Dict[float, List[RunSummary]] = {}
    for level in levels:
        level_cfg = cfg.with_overrides(noise_sd=float(level))
        logger.info(f"Noise sweep: target SD {level} ms")
        results[float(level)] = run_experiment(level_cfg, out / f"noise_{level:g}", dataset=dataset)

    lines = ["noise_sd  best_test  mean_test  runs"]
    for level, summaries in results.items():
        ok = [s.test_accuracy for s in summaries if s.ok]
        best = f"{max(ok):.4f}" if ok else "-"
        mean = f"{float(np.mean(ok)):.4f}" if ok else "-"
        lines.append(f"{level:>8g}  {best:>9}  {mean:>9}  {len(summaries):>4}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.txt").write_text("\n".join(lines) + "\n")
    return results
