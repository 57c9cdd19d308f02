from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np


@dataclass(frozen=True)
class SpikeTrain:
    """Strictly increasing spike times (ms) of one input or neuron channel"""
    times: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        if times.size and (times[0] < 0 or np.any(np.diff(times) <= 0)):
            raise ValueError("spike times must be non-negative and strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @classmethod
    def empty(cls) -> "SpikeTrain":
        return cls(np.empty(0))

    @classmethod
    def of(cls, times: Union[Iterable[float], np.ndarray]) -> "SpikeTrain":
        return cls(np.fromiter(times, dtype=float) if not isinstance(times, np.ndarray) else times)

    def __len__(self) -> int:
        return int(self.times.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return np.array_equal(self.times, other.times)

    def __hash__(self) -> int:
        return hash(self.times.tobytes())

    @property
    def first(self):
        return float(self.times[0]) if self.times.size else None

    def intervals(self) -> np.ndarray:
        """Inter-spike intervals, the first measured from t = 0"""
        if not self.times.size:
            return np.empty(0)
        return np.diff(self.times, prepend=0.0)
