"""Exact simulation of Grover search on four drawers as a sum over histories."""

__version__ = "0.1.0"

from .errors import ContractViolation, DegenerateSumError, ImpossibleOutcomeError, SizeError
from .grover import QueryCounter, diffusion_apply, oracle_apply, run_grover
from .state import (
    BasisIndex,
    RegisterLayout,
    StateVector,
    entanglement_entropy,
    joint_outcome_distribution,
    make_uniform_input,
    measure,
    partial_trace,
)

__all__ = [
    "BasisIndex",
    "ContractViolation",
    "DegenerateSumError",
    "ImpossibleOutcomeError",
    "QueryCounter",
    "RegisterLayout",
    "SizeError",
    "StateVector",
    "diffusion_apply",
    "entanglement_entropy",
    "joint_outcome_distribution",
    "make_uniform_input",
    "measure",
    "oracle_apply",
    "partial_trace",
    "run_grover",
]
