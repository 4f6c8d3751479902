"""Geometric inhomogeneous random graphs: sampling, compression and statistics."""

from .errors import (
    CorruptionError,
    GirgError,
    InsufficientDataError,
    ModelConfigurationError,
    UsageError,
)
from .graph import Graph
from .model import INFINITY, GirgParams, WeightSequence, make_weights_fixed, sample_weights
from .sampler import sample_girg, sample_girg_naive

__all__ = [
    "CorruptionError",
    "GirgError",
    "Graph",
    "GirgParams",
    "INFINITY",
    "InsufficientDataError",
    "ModelConfigurationError",
    "UsageError",
    "WeightSequence",
    "make_weights_fixed",
    "sample_girg",
    "sample_girg_naive",
    "sample_weights",
]

__version__ = "0.1.0"
