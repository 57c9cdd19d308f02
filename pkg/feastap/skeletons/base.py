from abc import ABC, abstractmethod
from typing import Any, Dict, List, Tuple

from ..neuron import Network, NeuronSpec, SynapseSpec, WaveformParams

# non-evolved constants
DEFAULT_T1 = 5.0
DEFAULT_T2 = 15.0
DEFAULT_I_MIN = 1.0
DEFAULT_I_MAX = 10.0


class NetworkSkeleton(ABC):
    """Base class for all fixed network topologies

    A skeleton fixes which synapses exist; weights, latencies and thresholds
    are placeholders that the genome overwrites.
    """
    name = "skeleton"

    def __init__(self, t1: float = DEFAULT_T1, t2: float = DEFAULT_T2,
                 i_min: float = DEFAULT_I_MIN, i_max: float = DEFAULT_I_MAX):
        self.waveform = WaveformParams(t1, t2)
        self.i_min = i_min
        self.i_max = i_max

    @abstractmethod
    def wiring(self, n_inputs: int, n_classes: int) -> Tuple[List[List[Tuple[int, bool]]], List[int]]:
        """Per-neuron synapse sources as (source, external) plus output neuron ids"""
        pass

    def synapse(self, source: int, external: bool = False) -> SynapseSpec:
        return SynapseSpec(source=source, weight=0.0, latency=0.0, waveform=self.waveform, external=external)

    def build(self, n_inputs: int, n_classes: int) -> Network:
        if n_inputs < 1 or n_classes < 1:
            raise ValueError(f"need at least one input and one class, got {n_inputs}, {n_classes}")
        sources, outputs = self.wiring(n_inputs, n_classes)
        neurons = [
            NeuronSpec(
                threshold=0.5,
                i_min=self.i_min,
                i_max=self.i_max,
                synapses=tuple(self.synapse(src, ext) for src, ext in neuron_sources),
            )
            for neuron_sources in sources
        ]
        return Network(neurons=tuple(neurons), input_channels=n_inputs, output_neurons=tuple(outputs))

    def __call__(self, n_inputs: int, n_classes: int) -> Network:
        return self.build(n_inputs, n_classes)

    @property
    def metadata(self) -> Dict[str, Any]:
        """Return skeleton metadata"""
        return {
            "name": self.name,
            "t1": self.waveform.t1,
            "t2": self.waveform.t2,
            "i_min": self.i_min,
            "i_max": self.i_max,
        }
