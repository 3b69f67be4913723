"""Structured equilibria of the non-myopic informational-cascade game."""
from .game import Gamma, GameParams
from .model import StrategyProfile, ValueTables
from .profiles import delta1_profile, large_delta_profile, myopic_profile, resolve_myopic_row, structural_check
from .solver import SolveConfig, SolveResult, solve
from .verifier import VerificationReport, check_profile, solve_exact_values

__all__ = [
    "Gamma",
    "GameParams",
    "StrategyProfile",
    "ValueTables",
    "SolveConfig",
    "SolveResult",
    "VerificationReport",
    "check_profile",
    "delta1_profile",
    "large_delta_profile",
    "myopic_profile",
    "resolve_myopic_row",
    "solve",
    "solve_exact_values",
    "structural_check",
]
