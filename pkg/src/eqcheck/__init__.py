"""Equilibrium verification for concurrent multi-player games.

Decides whether a game with GF-implication (GR(1)) or mean-payoff player
goals has a Nash equilibrium whose run satisfies a specification, the dual
universal query, equilibrium existence, and social-welfare threshold and
optimization queries, emitting independently checkable witness lassos and
equilibrium transducers.
"""

from .engine import (
    Specification, Verdict, Witness, a_nash, e_nash, e_nash_gr1, e_nash_mp,
    non_emptiness, synthesize_profile, validate_witness,
)
from .model import Arena, Game, Lasso, StrategyProfile, Weights

__all__ = [
    "Arena", "Game", "Lasso", "StrategyProfile", "Weights",
    "Specification", "Verdict", "Witness",
    "a_nash", "e_nash", "e_nash_gr1", "e_nash_mp", "non_emptiness",
    "synthesize_profile", "validate_witness",
]
