"""
Genotype of an evolved network: Gray-coded parameter genes plus a binary
feature mask, and the decoding of that genotype onto a network skeleton.
"""
import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GenomeError
from .neuron import Network

logger = logging.getLogger(__name__)

DEFAULT_GENE_WIDTH = 12


def gray_encode(n):
    """Reflected binary Gray code of n (int or integer array)"""
    return n ^ (n >> 1)


def gray_decode(g):
    """Inverse of gray_encode by prefix XOR, for values below 2**64"""
    n = g
    shift = 1
    while shift < 64:
        n = n ^ (n >> shift)
        shift <<= 1
    return n


def bits_to_int(bits: np.ndarray) -> int:
    """Most significant bit first"""
    value = 0
    for bit in bits:
        value = (value << 1) | int(bit)
    return value


def int_to_bits(n: int, width: int) -> np.ndarray:
    return np.array([(n >> shift) & 1 for shift in range(width - 1, -1, -1)], dtype=np.uint8)


@dataclass(frozen=True)
class GeneBounds:
    weight: Tuple[float, float] = (-1.0, 1.0)
    latency: Tuple[float, float] = (0.0, 40.0)
    threshold: Tuple[float, float] = (0.0, 1.0)


@dataclass(frozen=True)
class GeneSpec:
    name: str
    width: int
    low: float
    high: float
    kind: str  # threshold | weight | latency
    neuron: int
    synapse: Optional[int] = None

    @property
    def levels(self) -> int:
        return (1 << self.width) - 1

    @property
    def step(self) -> float:
        return (self.high - self.low) / self.levels

    def value_of(self, integer: int) -> float:
        value = self.low + (self.high - self.low) * (integer / self.levels)
        return min(max(value, self.low), self.high)

    def integer_of(self, value: float) -> int:
        fraction = (value - self.low) / (self.high - self.low)
        return int(min(max(round(fraction * self.levels), 0), self.levels))


@dataclass(frozen=True)
class GenomeLayout:
    genes: Tuple[GeneSpec, ...]
    mask_length: int

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(self.genes))
        offsets, offset = [], 0
        for gene in self.genes:
            offsets.append(offset)
            offset += gene.width
        object.__setattr__(self, "_offsets", tuple(offsets))
        object.__setattr__(self, "_by_name", {gene.name: i for i, gene in enumerate(self.genes)})

    @property
    def value_length(self) -> int:
        return sum(gene.width for gene in self.genes)

    def gene_slice(self, index: int) -> slice:
        start = self._offsets[index]
        return slice(start, start + self.genes[index].width)

    def gene_at_bit(self, bit: int) -> int:
        for i in range(len(self.genes)):
            span = self.gene_slice(i)
            if span.start <= bit < span.stop:
                return i
        raise IndexError(f"bit {bit} outside the value bitstring")

    def index_of(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise GenomeError(f"unknown gene '{name}'") from None


def build_layout(skeleton: Network, n_features: Optional[int] = None,
                 gene_width: int = DEFAULT_GENE_WIDTH, bounds: GeneBounds = GeneBounds()) -> GenomeLayout:
    """Thresholds, then weight and latency of each synapse, neuron by neuron"""
    if not 1 <= gene_width <= 62:
        raise GenomeError(f"gene width must be within 1..62 bits, got {gene_width}")
    genes: List[GeneSpec] = []
    for i, neuron in enumerate(skeleton.neurons):
        genes.append(GeneSpec(f"n{i}.threshold", gene_width, *bounds.threshold, "threshold", i))
        for j, _ in enumerate(neuron.synapses):
            genes.append(GeneSpec(f"n{i}.s{j}.weight", gene_width, *bounds.weight, "weight", i, j))
            genes.append(GeneSpec(f"n{i}.s{j}.latency", gene_width, *bounds.latency, "latency", i, j))
    mask_length = skeleton.input_channels if n_features is None else n_features
    return GenomeLayout(genes=tuple(genes), mask_length=mask_length)


class Chromosome:
    """Value bitstring and feature mask; both arrays are read-only"""
    __slots__ = ("value_bits", "mask")

    def __init__(self, value_bits: Sequence[int], mask: Sequence[int]):
        value_bits = np.array(value_bits, dtype=np.uint8).reshape(-1)
        mask = np.array(mask, dtype=np.uint8).reshape(-1)
        if np.any(value_bits > 1) or np.any(mask > 1):
            raise GenomeError("chromosome bits must be 0 or 1")
        value_bits.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "value_bits", value_bits)
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("Chromosome is immutable")

    def __reduce__(self):
        return Chromosome, (self.value_bits, self.mask)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chromosome):
            return NotImplemented
        return np.array_equal(self.value_bits, other.value_bits) and np.array_equal(self.mask, other.mask)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Chromosome(bits={self.value_bits.size}, mask={self.mask_string})"

    def key(self) -> bytes:
        return self.value_bits.tobytes() + b"|" + self.mask.tobytes()

    @property
    def mask_size(self) -> int:
        return int(self.mask.sum())

    @property
    def mask_string(self) -> str:
        return "".join(str(int(bit)) for bit in self.mask)

    def check(self, layout: GenomeLayout) -> None:
        if self.value_bits.size != layout.value_length or self.mask.size != layout.mask_length:
            raise GenomeError(
                f"chromosome shape ({self.value_bits.size}, {self.mask.size}) does not match "
                f"layout ({layout.value_length}, {layout.mask_length})"
            )


def flip_bit(c: Chromosome, index: int) -> Chromosome:
    bits = c.value_bits.copy()
    bits[index] ^= 1
    return Chromosome(bits, c.mask)


def decode_integers(c: Chromosome, layout: GenomeLayout) -> List[int]:
    c.check(layout)
    return [
        gray_decode(bits_to_int(c.value_bits[layout.gene_slice(i)]))
        for i in range(len(layout.genes))
    ]


def decode_values(c: Chromosome, layout: GenomeLayout) -> np.ndarray:
    integers = decode_integers(c, layout)
    return np.array([gene.value_of(n) for gene, n in zip(layout.genes, integers)])


def apply_values(values: Sequence[float], layout: GenomeLayout, skeleton: Network) -> Network:
    """Write decoded gene values into their slots of the skeleton"""
    thresholds: Dict[int, float] = {}
    synapse_values: Dict[Tuple[int, int], Dict[str, float]] = {}
    for gene, value in zip(layout.genes, values):
        if gene.kind == "threshold":
            thresholds[gene.neuron] = float(value)
        else:
            synapse_values.setdefault((gene.neuron, gene.synapse), {})[gene.kind] = float(value)

    neurons = []
    for i, neuron in enumerate(skeleton.neurons):
        synapses = tuple(
            replace(syn, **synapse_values[(i, j)]) if (i, j) in synapse_values else syn
            for j, syn in enumerate(neuron.synapses)
        )
        neurons.append(replace(neuron, threshold=thresholds.get(i, neuron.threshold), synapses=synapses))
    return replace(skeleton, neurons=tuple(neurons))


def decode_genome(c: Chromosome, layout: GenomeLayout, skeleton: Network) -> Network:
    if len(layout.genes) and max(g.neuron for g in layout.genes) >= len(skeleton.neurons):
        raise GenomeError("layout refers to neurons missing from the skeleton")
    return apply_values(decode_values(c, layout), layout, skeleton)


def random_chromosome(layout: GenomeLayout, rng: np.random.Generator, mask_init: str = "ones") -> Chromosome:
    bits = rng.integers(0, 2, size=layout.value_length, dtype=np.uint8)
    if mask_init == "ones":
        mask = np.ones(layout.mask_length, dtype=np.uint8)
    elif mask_init == "random":
        mask = rng.integers(0, 2, size=layout.mask_length, dtype=np.uint8)
    else:
        raise GenomeError(f"unknown mask initialization '{mask_init}'")
    return Chromosome(bits, mask)


def chromosome_to_text(c: Chromosome, layout: GenomeLayout) -> str:
    lines = [f"{gene.name}={value!r}" for gene, value in zip(layout.genes, decode_values(c, layout).tolist())]
    lines.append(f"mask={c.mask_string}")
    return "\n".join(lines) + "\n"


def chromosome_from_text(text: str, layout: GenomeLayout) -> Chromosome:
    """Parse the export format, re-quantizing each value onto its gene"""
    values: Dict[str, float] = {}
    mask: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, value = line.partition("=")
        if not sep:
            raise GenomeError(f"line {lineno}: expected name=value, got '{raw}'")
        name, value = name.strip(), value.strip()
        if name == "mask":
            mask = value
            continue
        layout.index_of(name)
        try:
            values[name] = float(value)
        except ValueError:
            raise GenomeError(f"line {lineno}: gene {name} has non-numeric value '{value}'") from None

    missing = [gene.name for gene in layout.genes if gene.name not in values]
    if missing:
        raise GenomeError(f"chromosome text lacks {len(missing)} genes, first: {missing[0]}")
    if mask is None or len(mask) != layout.mask_length or set(mask) - {"0", "1"}:
        raise GenomeError(f"chromosome text needs a {layout.mask_length}-bit mask, got {mask!r}")

    bits = np.concatenate(
        [int_to_bits(gray_encode(gene.integer_of(values[gene.name])), gene.width) for gene in layout.genes]
    ) if layout.genes else np.empty(0, dtype=np.uint8)
    return Chromosome(bits, [int(ch) for ch in mask])
