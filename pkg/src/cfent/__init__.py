"""Composite fermions from (deformed) bosons and fermions: operators, realization, entanglement."""

from .entanglement import entropy, purity, schmidt
from .fock import FockBasis, ModeConfig, StructureFunction, enumerate_basis
from .realization import check, sample_family

__version__ = "0.1.0"

__all__ = [
    "FockBasis", "ModeConfig", "StructureFunction", "enumerate_basis",
    "check", "sample_family", "schmidt", "entropy", "purity",
]
