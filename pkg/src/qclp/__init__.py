"""Quantitative constraint logic programs over Herbrand equations.

Clauses carry factors in (0,1]; a ground atom's value is the best, over its
proofs, of ``factor (x) aggregate(body values)``.  The package offers a
declarative oracle (minimal fuzzy model by chain iteration), a top-down
solver over min/max trees with alpha-beta pruning, a weighted grammar
frontend and a command-line tool.
"""

from .fixpoint import (ChainTrace, FuzzyInterpretation, consequence_value,
                       minimal_model, model_check)
from .program import (Atom, Goal, Program, QuantClause, parse_program,
                      parse_query, prepare_query, validate)
from .solver import (Answer, ProofNode, SearchOptions, SearchStats, best_proof,
                     enumerate_answers, expand_minmax, iterative_best)
from .terms import Constraint, Fn, Var, solve

__all__ = [
    "Answer", "Atom", "ChainTrace", "Constraint", "Fn", "FuzzyInterpretation", "Goal",
    "Program", "ProofNode", "QuantClause", "SearchOptions", "SearchStats", "Var",
    "best_proof", "consequence_value", "enumerate_answers", "expand_minmax",
    "iterative_best", "minimal_model", "model_check", "parse_program", "parse_query",
    "prepare_query", "solve", "validate",
]

__version__ = "0.1.0"
