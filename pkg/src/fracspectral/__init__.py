"""Spectral and finite element solvers for two-sided fractional diffusion on (0, 1)."""

from .errors import (
    AccuracyError,
    DivergenceError,
    DomainError,
    FracSpectralError,
    NumericError,
    PoleError,
)
from .params import FractionalParams, beta_from_r, r_from_beta

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "DivergenceError",
    "DomainError",
    "FracSpectralError",
    "NumericError",
    "PoleError",
    "FractionalParams",
    "beta_from_r",
    "r_from_beta",
    "__version__",
]
