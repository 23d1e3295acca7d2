"""Solver for the generalized (arctan-smoothed) Colonel Blotto game."""

from .equilibrium import (
    Equilibrium,
    SolverSettings,
    ThresholdReport,
    asymptote_root,
    build_equilibrium,
    check_gap_feasibility,
    check_thresholds,
    f_k_derivative,
    f_k_eval,
    find_f_minimum,
    game_value,
    lift_gaps,
    solve_gap_root,
)
from .errors import *  # noqa: F401,F403
from .game import (
    Allocation,
    GameInstance,
    GapVector,
    approx_battlefield_payoff,
    approx_utility,
    classical_battlefield_payoff,
    classical_utility,
    validate_instance,
)

__version__ = "0.1.0"
