"""Polar-coded over-the-air aggregation of sparse gradients for federated learning."""

from ._backend import backend_name
from .config import ExperimentConfig, load_config
from .cs_codec import CodecConfig, PolarAirCodec, RecoveredSet, Termination
from .errors import ConfigurationError, DegenerateNormalizerError, PolarAirError
from .fl_sim import run_experiment
from .sparse import SparseVector, top_k

__all__ = [
    "CodecConfig", "ConfigurationError", "DegenerateNormalizerError", "ExperimentConfig",
    "PolarAirCodec", "PolarAirError", "RecoveredSet", "SparseVector", "Termination",
    "backend_name", "load_config", "run_experiment", "top_k",
]
__version__ = "0.1.0"
