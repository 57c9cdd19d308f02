"""Numeric CSV ingestion and train/test splitting."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import DatasetError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray          # (patterns, features)
    labels: np.ndarray            # (patterns,) class indices
    feature_ranges: Tuple[Tuple[float, float], ...]
    class_names: Tuple[str, ...]
    indices: Optional[np.ndarray] = None   # positions in the file this dataset came from

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise DatasetError("features must be a 2-D array with one label per row")
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise DatasetError("labels outside the class index range")
        if len(self.feature_ranges) != features.shape[1]:
            raise DatasetError("one feature range per column is required")
        indices = np.arange(labels.size) if self.indices is None else np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def feature_count(self) -> int:
        return int(self.features.shape[1])

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

    def subset(self, positions: Sequence[int]) -> "Dataset":
        """Rows at the given positions; ranges and class names are shared"""
        positions = np.asarray(positions, dtype=np.int64)
        return Dataset(
            features=self.features[positions],
            labels=self.labels[positions],
            feature_ranges=self.feature_ranges,
            class_names=self.class_names,
            indices=self.indices[positions],
        )

    def select(self, indices: Sequence[int]) -> "Dataset":
        """Rows by their original file index"""
        lookup = {int(idx): pos for pos, idx in enumerate(self.indices)}
        try:
            return self.subset([lookup[int(idx)] for idx in indices])
        except KeyError as e:
            raise DatasetError(f"pattern index {e.args[0]} not in dataset") from None


def compute_ranges(features: np.ndarray) -> Tuple[Tuple[float, float], ...]:
    lows, highs = features.min(axis=0), features.max(axis=0)
    for j, (lo, hi) in enumerate(zip(lows, highs)):
        if not lo < hi:
            raise DatasetError(f"feature {j} is constant ({lo}); it cannot be scaled")
    return tuple((float(lo), float(hi)) for lo, hi in zip(lows, highs))


def load_csv(path: Union[str, Path], header: bool = False) -> Dataset:
    """Comma-separated numeric features followed by a class label token"""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file {path} does not exist")
    try:
        frame = pd.read_csv(path, header=0 if header else None, dtype=str,
                            skip_blank_lines=True, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DatasetError(f"dataset file {path} is empty") from None
    except pd.errors.ParserError as e:
        raise DatasetError(f"malformed row in {path}: {e}") from None
    if frame.empty:
        raise DatasetError(f"dataset file {path} has no patterns")
    if frame.shape[1] < 2:
        raise DatasetError(f"{path} needs at least one feature column and a label column")

    line_offset = 2 if header else 1
    incomplete = frame.isna().any(axis=1).to_numpy()
    if incomplete.any():
        row = int(np.flatnonzero(incomplete)[0])
        raise DatasetError(f"{path}, line {row + line_offset}: expected {frame.shape[1]} fields")

    numeric = frame.iloc[:, :-1].apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1).to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        values = ",".join(frame.iloc[row, :-1])
        raise DatasetError(f"{path}, line {row + line_offset}: non-numeric feature in '{values}'")

    codes, names = pd.factorize(frame.iloc[:, -1].str.strip(), sort=False)
    features = numeric.to_numpy(dtype=float)
    dataset = Dataset(
        features=features,
        labels=codes,
        feature_ranges=compute_ranges(features),
        class_names=tuple(str(name) for name in names),
    )
    logger.info(
        f"Loaded {len(dataset)} patterns, {dataset.feature_count} features, "
        f"{dataset.class_count} classes from {path}"
    )
    return dataset


def _train_count(size: int, fraction: float) -> int:
    count = int(np.floor(fraction * size + 0.5))
    return min(max(count, 1), size - 1)


def split(d: Dataset, train_fraction: float = 0.8, rng: Optional[np.random.Generator] = None,
          stratified: bool = True) -> Tuple[Dataset, Dataset]:
    """Random train/test split; stratified keeps class proportions"""
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train fraction must be inside (0, 1), got {train_fraction}")
    rng = rng if rng is not None else np.random.default_rng(0)
    if stratified:
        train: List[int] = []
        for cls in range(d.class_count):
            members = np.flatnonzero(d.labels == cls)
            if members.size < 2:
                raise DatasetError(f"class '{d.class_names[cls]}' has fewer than 2 patterns")
            chosen = rng.permutation(members)
            train.extend(chosen[: _train_count(members.size, train_fraction)].tolist())
    else:
        if len(d) < 2:
            raise DatasetError("need at least 2 patterns to split")
        train = rng.permutation(len(d))[: _train_count(len(d), train_fraction)].tolist()

    train_positions = np.sort(np.array(train, dtype=np.int64))
    test_positions = np.setdiff1d(np.arange(len(d)), train_positions)
    return d.subset(train_positions), d.subset(test_positions)


def stratified_subset(d: Dataset, fraction: float, rng: np.random.Generator) -> Dataset:
    """Per-class random sample keeping at least one pattern of every present class"""
    if fraction >= 1.0:
        return d
    chosen: List[int] = []
    for cls in range(d.class_count):
        members = np.flatnonzero(d.labels == cls)
        if members.size:
            count = max(1, int(np.floor(fraction * members.size + 0.5)))
            chosen.extend(rng.permutation(members)[:count].tolist())
    return d.subset(np.sort(np.array(chosen, dtype=np.int64)))
