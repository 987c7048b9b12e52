"""Discrete-time chaos decompositions of Wiener functionals over increment grids."""

from .chaos import ChaosExpansion, GridSpec
from .clark_ocone import (
    ClarkOconeDecomposition,
    ClarkOconeTerm,
    RateReport,
    decompose,
    err_norm_refined,
    err_tail,
    error_norm_bound,
    reconstruct,
    verify_bound,
)
from .montecarlo import (
    DigitalPayoff,
    OccupationTimePayoff,
    PathBatch,
    PolynomialPayoff,
    SmoothPayoff,
    sample_paths,
)

__all__ = [
    "ChaosExpansion",
    "GridSpec",
    "ClarkOconeDecomposition",
    "ClarkOconeTerm",
    "RateReport",
    "decompose",
    "reconstruct",
    "err_tail",
    "err_norm_refined",
    "error_norm_bound",
    "verify_bound",
    "PolynomialPayoff",
    "SmoothPayoff",
    "DigitalPayoff",
    "OccupationTimePayoff",
    "PathBatch",
    "sample_paths",
]

__version__ = "0.1.0"
