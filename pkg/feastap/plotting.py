"""Figures written next to run artifacts (headless Agg backend)."""
import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evolution import GenerationRecord  # noqa: E402
from .neuron import WaveformParams, psp_support, psp_value  # noqa: E402
from .spike_train import SpikeTrain  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def plot_history(history: Sequence[GenerationRecord], path: PathLike) -> Path:
    """Best and mean fitness per generation, accuracy on a second axis"""
    generations = [r.generation for r in history]
    fig, ax = plt.subplots(figsize=(10, 6))
    ax.plot(generations, [r.best_fitness for r in history], label="best fitness")
    ax.plot(generations, [r.mean_fitness for r in history], label="mean fitness", alpha=0.7)
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    acc = ax.twinx()
    acc.plot(generations, [r.best_accuracy for r in history], color="tab:green", linestyle="--",
             label="best accuracy")
    acc.set_ylim(0.0, 1.05)
    acc.set_ylabel("training accuracy")
    lines = ax.get_legend_handles_labels()
    more = acc.get_legend_handles_labels()
    ax.legend(lines[0] + more[0], lines[1] + more[1], loc="lower right")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_raster(trains: Sequence[SpikeTrain], path: PathLike, labels: Optional[Sequence[str]] = None,
                horizon: Optional[float] = None) -> Path:
    """One row of ticks per channel"""
    fig, ax = plt.subplots(figsize=(10, 1 + 0.6 * max(len(trains), 1)))
    ax.eventplot([train.times for train in trains], lineoffsets=np.arange(len(trains)), linelengths=0.8)
    ax.set_yticks(np.arange(len(trains)))
    ax.set_yticklabels(labels if labels is not None else [f"input {i}" for i in range(len(trains))])
    ax.set_xlabel("time (ms)")
    if horizon is not None:
        ax.set_xlim(0.0, horizon)
    return _save(fig, path)


def plot_psp(waveforms: Dict[str, WaveformParams], path: PathLike, dt: float = 0.1) -> Path:
    fig, ax = plt.subplots(figsize=(8, 5))
    end = max((psp_support(w, 1e-3) for w in waveforms.values()), default=1.0)
    t = np.arange(0.0, end + dt, dt)
    for label, w in waveforms.items():
        ax.plot(t, psp_value(w, t), label=label)
    ax.set_xlabel("time after arrival (ms)")
    ax.set_ylabel("PSP")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    logger.debug(f"Saved figure {path}")
    return path
