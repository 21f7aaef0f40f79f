"""Tullock contests over battlefields linked by spillover networks."""

from .core import (
    ContestGame,
    EffortProfile,
    GameError,
    VerificationReport,
    effective_efforts,
    load_game,
    marginal_rates,
    payoffs,
    validate_game,
    win_probabilities,
)
from .design import design_max_effort_equal, design_max_effort_general, design_max_welfare, verify_design
from .endogenous import endogenous_equilibrium, verify_endogenous
from .oracle import TruncationSchedule, best_response, br_dynamics, cross_validate
from .repro import default_corpus, run_all
from .solver import EquilibriumReport, SolverError, kkt_residual, solve
from .sweep import SweepSpec, run_sweep

__all__ = [
    "ContestGame",
    "EffortProfile",
    "EquilibriumReport",
    "GameError",
    "SolverError",
    "SweepSpec",
    "TruncationSchedule",
    "VerificationReport",
    "best_response",
    "br_dynamics",
    "cross_validate",
    "default_corpus",
    "design_max_effort_equal",
    "design_max_effort_general",
    "design_max_welfare",
    "effective_efforts",
    "endogenous_equilibrium",
    "kkt_residual",
    "load_game",
    "marginal_rates",
    "payoffs",
    "run_all",
    "run_sweep",
    "solve",
    "validate_game",
    "verify_design",
    "verify_endogenous",
    "win_probabilities",
]
