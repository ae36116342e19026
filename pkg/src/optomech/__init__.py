"""Gaussian and Fock-space tools for quantum optomechanics protocols."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CutoffOverflow,
    InvalidDetuning,
    InvalidSqueezing,
    NonOrthonormalFilters,
    NonPhysicalCovariance,
    OptomechError,
    ParameterError,
    UnstableSystem,
)
from .params import SystemParams

__all__ = [
    "ConfigError",
    "CutoffOverflow",
    "InvalidDetuning",
    "InvalidSqueezing",
    "NonOrthonormalFilters",
    "NonPhysicalCovariance",
    "OptomechError",
    "ParameterError",
    "SystemParams",
    "UnstableSystem",
    "__version__",
]
