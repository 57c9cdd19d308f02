from typing import Any, Dict, List, Tuple

from .base import NetworkSkeleton

Wiring = Tuple[List[List[Tuple[int, bool]]], List[int]]


class RecurrentInputSkeleton(NetworkSkeleton):
    """Input neurons wired to each other, outputs read every input neuron

    With 4 features and 3 classes this is the 7-neuron IRIS network: no hidden
    layer and 28 synapses.
    """
    name = "recurrent"

    def wiring(self, n_inputs: int, n_classes: int) -> Wiring:
        sources = []
        for i in range(n_inputs):
            row = [(i, True)] + [(j, False) for j in range(n_inputs) if j != i]
            sources.append(row)
        for _ in range(n_classes):
            sources.append([(j, False) for j in range(n_inputs)])
        return sources, list(range(n_inputs, n_inputs + n_classes))

    @property
    def metadata(self) -> Dict[str, Any]:
        base_metadata = super().metadata
        base_metadata.update({"hidden_layer": 0, "recurrent_inputs": True})
        return base_metadata


class FeedForwardSkeleton(NetworkSkeleton):
    name = "feedforward"

    def wiring(self, n_inputs: int, n_classes: int) -> Wiring:
        sources = [[(i, True)] for i in range(n_inputs)]
        for _ in range(n_classes):
            sources.append([(j, False) for j in range(n_inputs)])
        return sources, list(range(n_inputs, n_inputs + n_classes))

    @property
    def metadata(self) -> Dict[str, Any]:
        base_metadata = super().metadata
        base_metadata.update({"hidden_layer": 0, "recurrent_inputs": False})
        return base_metadata


class HiddenLayerSkeleton(NetworkSkeleton):
    """Inputs -> one fully connected hidden layer -> outputs"""
    name = "hidden"

    def __init__(self, hidden_size: int = 2, **kwargs):
        super().__init__(**kwargs)
        if hidden_size < 1:
            raise ValueError(f"hidden layer needs at least one neuron, got {hidden_size}")
        self.hidden_size = hidden_size

    def wiring(self, n_inputs: int, n_classes: int) -> Wiring:
        sources = [[(i, True)] for i in range(n_inputs)]
        hidden = list(range(n_inputs, n_inputs + self.hidden_size))
        for _ in hidden:
            sources.append([(j, False) for j in range(n_inputs)])
        for _ in range(n_classes):
            sources.append([(h, False) for h in hidden])
        first_output = n_inputs + self.hidden_size
        return sources, list(range(first_output, first_output + n_classes))

    @property
    def metadata(self) -> Dict[str, Any]:
        base_metadata = super().metadata
        base_metadata.update({"hidden_layer": self.hidden_size, "recurrent_inputs": False})
        return base_metadata
