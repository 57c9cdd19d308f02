"""
Command-line entry point.

    python cli.py train --config configs/iris.conf [--seed N] [--noise-sd MS] [--generations N] [--out DIR]
    python cli.py eval --chromosome runs/run_seed0/best.chromosome --dataset data/iris.csv
    python cli.py report --runs runs
    python cli.py sweep --config configs/iris.conf --levels 0 0.1 1
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from feastap.classifier import TrainedClassifier
from feastap.config import load_config
from feastap.dataset import load_csv
from feastap.errors import FeastapError
from feastap.runner import collect_summaries, evaluate_exported, noise_sweep, report, run_experiment, write_report

logger = logging.getLogger("feastap.cli")


def setup_logging(log_file: Optional[Path] = None, verbose: bool = False) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config).with_overrides(
        seed=args.seed, noise_sd=args.noise_sd, generations=args.generations,
        out_dir=args.out, workers=args.workers, dt=args.dt, repeats=args.repeats,
        plots=True if args.plots else None,
    )
    setup_logging(Path(cfg.out_dir) / "train.log", args.verbose)
    summaries = run_experiment(cfg)
    print(report(summaries)[0], end="")
    return 0 if any(s.ok for s in summaries) else 1


def _eval(args: argparse.Namespace) -> int:
    setup_logging(verbose=args.verbose)
    chromosome = Path(args.chromosome)
    run_dir = chromosome if chromosome.is_dir() else chromosome.parent
    dataset = load_csv(args.dataset, header=args.header)
    if args.split:
        result = evaluate_exported(run_dir, dataset)
        print(f"test accuracy {result.accuracy:.4f} ({int(result.correct.sum())}/{int(result.totals.sum())})")
        return 0
    classifier = TrainedClassifier.load(run_dir)
    result = classifier.evaluate(dataset)
    print(f"accuracy {result.accuracy:.4f} ({int(result.correct.sum())}/{int(result.totals.sum())}), "
          f"fitness {result.fitness:.4f}, silent {result.silent}, early {result.early}")
    return 0


def _report(args: argparse.Namespace) -> int:
    setup_logging(verbose=args.verbose)
    summaries = collect_summaries(args.runs)
    print(write_report(summaries, args.runs), end="")
    return 0


def _sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config).with_overrides(seed=args.seed, generations=args.generations, out_dir=args.out)
    setup_logging(Path(cfg.out_dir) / "sweep.log", args.verbose)
    noise_sweep(cfg, args.levels)
    print((Path(cfg.out_dir) / "sweep.txt").read_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Evolve spiking classifiers with feature selection")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run seeded training repeats and write a report")
    train.add_argument("--config", required=True, help="key = value experiment file")
    train.add_argument("--seed", type=int, help="first repeat seed")
    train.add_argument("--noise-sd", type=float, help="Gamma noise SD in ms")
    train.add_argument("--generations", type=int)
    train.add_argument("--repeats", type=int)
    train.add_argument("--out", help="output directory")
    train.add_argument("--workers", type=int, help="evaluation processes per repeat")
    train.add_argument("--dt", type=float, help="simulation step in ms")
    train.add_argument("--plots", action="store_true", help="write figures into run directories")
    train.set_defaults(func=_train)

    ev = sub.add_parser("eval", help="evaluate an exported chromosome")
    ev.add_argument("--chromosome", required=True, help="best.chromosome file or its run directory")
    ev.add_argument("--dataset", required=True, help="CSV file")
    ev.add_argument("--header", action="store_true", help="CSV has a header row")
    ev.add_argument("--split", action="store_true", help="score only the stored test split")
    ev.set_defaults(func=_eval)

    rep = sub.add_parser("report", help="aggregate run directories into a report")
    rep.add_argument("--runs", required=True, help="directory holding run_seed*/ folders")
    rep.set_defaults(func=_report)

    sweep = sub.add_parser("sweep", help="repeat training at several noise levels")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--levels", type=float, nargs="+", required=True, help="noise SDs in ms")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--generations", type=int)
    sweep.add_argument("--out")
    sweep.set_defaults(func=_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FeastapError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
