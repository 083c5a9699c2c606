"""Threshold-based behavioural distances and distinguishing formulae for
finite quantitative transition systems.

The library decides, exactly and in polynomial time for the supported
branching types, whether one state simulates another up to a deviation
threshold; computes the induced behavioural distance; and extracts
polynomial-size modal formulae certifying that two states are further
apart than a given threshold, in both a two-valued logic with slack
semantics and a quantitative logic.
"""

from .extract import Certificate, extract_quantitative, extract_two_valued, recheck
from .game import GameConfig, GameSolution, check_similar, distance, solve_game
from .logic import eval2, evalQ, parse_formula, print_formula
from .modalities import ModalityId, close_under_duals, default_modalities
from .oracle import exact_distance, greatest_simulation, kantorovich
from .systems import Rel2, System, VRel, load_system, system_to_document
from .values import Value, parse_value

__all__ = [
    "Certificate",
    "GameConfig",
    "GameSolution",
    "ModalityId",
    "Rel2",
    "System",
    "VRel",
    "Value",
    "check_similar",
    "close_under_duals",
    "default_modalities",
    "distance",
    "eval2",
    "evalQ",
    "exact_distance",
    "extract_quantitative",
    "extract_two_valued",
    "greatest_simulation",
    "kantorovich",
    "load_system",
    "parse_formula",
    "parse_value",
    "print_formula",
    "recheck",
    "solve_game",
    "system_to_document",
]

__version__ = "0.1.0"
