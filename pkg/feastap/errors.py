class FeastapError(ValueError):
    """Base class for all errors raised by the feastap package"""


class ConfigError(FeastapError):
    """Invalid or unknown configuration value"""


class DatasetError(FeastapError):
    """Malformed dataset file or invalid split request"""


class NetworkError(FeastapError):
    """Network topology or parameter out of its allowed domain"""


class SimulationError(FeastapError):
    """Inputs that cannot be simulated on the given network"""


class GenomeError(FeastapError):
    """Chromosome does not match its genome layout"""


class EvolutionError(FeastapError):
    """Invalid population state for an evolutionary step"""
