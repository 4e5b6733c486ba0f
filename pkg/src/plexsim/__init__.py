"""Steady-state photon statistics of a driven cavity coupled to two-level emitters."""
from .hilbert import EmitterSpec, OperatorMatrix, SystemSpec, build_hamiltonian
from .lindblad import DensityMatrix, Liouvillian, build_liouvillian, evolve, solve_system, steady_state
from .observables import CorrelationResult, Regime, classify, correlation, photon_distribution, steady_correlations

__all__ = [
    "CorrelationResult",
    "DensityMatrix",
    "EmitterSpec",
    "Liouvillian",
    "OperatorMatrix",
    "Regime",
    "SystemSpec",
    "build_hamiltonian",
    "build_liouvillian",
    "classify",
    "correlation",
    "evolve",
    "photon_distribution",
    "solve_system",
    "steady_correlations",
    "steady_state",
]
