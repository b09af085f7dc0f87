"""Robust equilibria in weighted concurrent games with mean-payoff objectives."""

from .game import (ConcurrentGame, GameError, LassoPlay, StrategyMachine, coalition_outcome,
                   deviators_move, deviators_of_lasso, lasso_payoff, make_game, outcome)
from .deviator import build_deviator, lift_profile, limit_deviators
from .mdmp import RobustQuery, RobustResult, build_weights, robust_constraints, solve_robustness
from .oracle import best_deviation, is_robust
from .qbf import QbfFormula, compile_game, parse_qdimacs, qbf_eval

__version__ = "0.1.0"

__all__ = [
    "ConcurrentGame", "GameError", "LassoPlay", "StrategyMachine", "coalition_outcome", "deviators_move",
    "deviators_of_lasso", "lasso_payoff", "make_game", "outcome", "build_deviator", "lift_profile",
    "limit_deviators", "RobustQuery", "RobustResult", "build_weights", "robust_constraints",
    "solve_robustness", "best_deviation", "is_robust", "QbfFormula", "compile_game", "parse_qdimacs",
    "qbf_eval",
]
