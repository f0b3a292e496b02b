"""Quantum-chaos diagnostics from temporal fluctuations of reduced density
matrices, with the matching classical maps and flows."""

__version__ = "0.1.0"

from . import classical, diagnostics, dynamics, experiments, hamiltonians, linalg
from ._kernels import backend as kernel_backend
from .errors import (
    CapacityError,
    ConfigError,
    DegenerateSeriesError,
    EvolutionError,
    FitFailureError,
    IntegratorError,
    RdmfluxError,
    ValidationError,
)

__all__ = [
    "classical",
    "diagnostics",
    "dynamics",
    "experiments",
    "hamiltonians",
    "linalg",
    "kernel_backend",
    "RdmfluxError",
    "ValidationError",
    "CapacityError",
    "DegenerateSeriesError",
    "FitFailureError",
    "EvolutionError",
    "IntegratorError",
    "ConfigError",
    "__version__",
]
