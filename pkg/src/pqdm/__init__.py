"""Simulator for probabilistic quantum deletion machines and no-signalling checks."""

from .machine import (
    DeletionMachine,
    FeasibilityReport,
    MachineSpec,
    StateSet,
    feasibility,
    max_uniform_probability,
    synthesize,
    verify_machine,
)
from .qcore import BasisPair, DensityMatrix, Ket, OperatorMatrix, ket_new

__all__ = [
    "BasisPair", "DeletionMachine", "DensityMatrix", "FeasibilityReport", "Ket",
    "MachineSpec", "OperatorMatrix", "StateSet", "feasibility", "ket_new",
    "max_uniform_probability", "synthesize", "verify_machine",
]
