"""Supersymmetric lattice fermion dynamics and a truncated free SUSY field model."""

__version__ = "0.1.0"
