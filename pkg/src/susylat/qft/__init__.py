"""Truncated Fock realization of the free supersymmetric fermion-boson field on the line."""

from .functions import DecayError, Pairings, TestFunction, bos, compute_pairings, fer, wick_residual
from .space import DimensionError, TruncatedQftSpace, build_space, shell_spectrum

__all__ = [
    "DecayError",
    "DimensionError",
    "Pairings",
    "TestFunction",
    "TruncatedQftSpace",
    "bos",
    "build_space",
    "compute_pairings",
    "fer",
    "shell_spectrum",
    "wick_residual",
]
