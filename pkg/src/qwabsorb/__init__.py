"""Absorption probabilities of discrete-time quantum walks with absorbing
boundaries: simulation, generating functions, Hadamard-product quadrature and
closed forms, cross-checked against each other."""
from .closed_forms import (AbsorptionQuery, classical_closed, grover3_finite_closed,
                           grover3_semi_closed, two_state_finite_closed,
                           two_state_semi_probability)
from .errors import (BranchError, ConfigurationError, DegenerateCoinError,
                     EnumerationBudgetError, IntegrityError, PoleError, QWalkError)
from .genfun import GenFunHandle
from .hadamard import ContourSpec, hadamard_at_one, taylor_coefficients
from .walk import (AbsorberSet, AbsorptionReport, CoinSpec, DirectionSet, WalkState,
                   brute_force_amplitude, classical_absorption, run_absorbing, step)

__version__ = "0.1.0"

__all__ = [
    "AbsorberSet", "AbsorptionQuery", "AbsorptionReport", "BranchError", "CoinSpec",
    "ConfigurationError", "ContourSpec", "DegenerateCoinError", "DirectionSet",
    "EnumerationBudgetError", "GenFunHandle", "IntegrityError", "PoleError", "QWalkError",
    "WalkState", "brute_force_amplitude", "classical_absorption", "classical_closed",
    "grover3_finite_closed", "grover3_semi_closed", "hadamard_at_one", "run_absorbing",
    "step", "taylor_coefficients", "two_state_finite_closed", "two_state_semi_probability",
]
