"""Spiking network simulator with evolutionary training and feature selection."""
from .errors import (
    ConfigError, DatasetError, EvolutionError, FeastapError, GenomeError, NetworkError, SimulationError,
)
from .spike_train import SpikeTrain
from .neuron import (
    Network, NeuronSpec, SimConfig, SimTrace, SynapseSpec, WaveformParams,
    actual_isi, compile_network, membrane_potential, psp_value, simulate,
)
from .noise import NoiseModel, perturb_isi, sample_gamma
from .codec import Decision, EncodingConfig, decode, encode
from .genome import Chromosome, GenomeLayout, build_layout, decode_genome, random_chromosome
from .dataset import Dataset, load_csv, split
from .fitness import EvalReport, FitnessCoeffs, FitnessEvaluator, evaluate
from .evolution import EvoConfig, Individual, run as evolve_network
from .config import ExperimentConfig, load_config, parse_config

__version__ = "0.1.0"
