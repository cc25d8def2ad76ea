"""Quantum illumination with superposed causal orders: channels, Chernoff
exponents and figure sweeps in a truncated Fock space."""

from .errors import DimensionError, NumericalHealthError, ParameterError, QillumError, SolverError
from .protocols import ProtocolParams

__version__ = "0.1.0"

__all__ = [
    "DimensionError",
    "NumericalHealthError",
    "ParameterError",
    "ProtocolParams",
    "QillumError",
    "SolverError",
    "__version__",
]
