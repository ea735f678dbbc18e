"""Agreement checks between the oracle and both search strategies."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .fixpoint import FuzzyInterpretation, consequence_value, minimal_model
from .program import Program
from .randprog import ground_goals
from .solver import (SearchOptions, best_proof, enumerate_answers,
                     iterative_best)

__all__ = ["CheckRow", "check_program", "heuristic_depth"]

ZERO = Fraction(0)


@dataclass
class CheckRow:
    relation: str
    args: tuple
    oracle: Fraction
    alphabeta: Fraction
    exhaustive: Fraction
    nodes_alphabeta: int
    nodes_exhaustive: int
    same_first: bool
    sound: bool
    deepened: Optional[Fraction] = None

    @property
    def atom(self) -> str:
        return f"{self.relation}({','.join(self.args)})" if self.args else self.relation

    @property
    def ok(self) -> bool:
        agree = self.oracle == self.alphabeta == self.exhaustive
        if self.deepened is not None:
            agree = agree and self.deepened == self.oracle
        return (agree and self.same_first and self.sound
                and self.nodes_alphabeta <= self.nodes_exhaustive)


def heuristic_depth(prog: Program, stabilized_at: int) -> int:
    body = max((len(c.body) for c in prog.clauses), default=0)
    return stabilized_at * (body + 1) + 1


def check_program(prog: Program, depth: Optional[int] = None,
                  deepen_to: Optional[int] = None,
                  model: Optional[tuple] = None) -> list[CheckRow]:
    """Three-way comparison on every ground goal of a function-free program.

    ``depth`` defaults to the chain's stabilization step: every value of the
    minimal model is reached by a derivation of at most that height.  With
    ``deepen_to`` the alpha-beta iterative-deepening value is checked as well.
    """
    A, trace = model if model is not None else minimal_model(prog)
    if depth is None:
        depth = trace.stabilized_at
    rows = []
    for rel, args, goal in ground_goals(prog, A.universe):
        ab, s_ab = best_proof(goal, prog, SearchOptions(depth, strategy="alphabeta",
                                                        mode=prog.mode))
        ex, s_ex = best_proof(goal, prog, SearchOptions(depth, strategy="exhaustive",
                                                        mode=prog.mode))
        same = (ab is None) == (ex is None) and (
            ab is None or (ab.value == ex.value and ab.render(goal.variables())
                           == ex.render(goal.variables())))
        sound = _sound(A, goal, prog, depth)
        deep = None
        if deepen_to is not None:
            d, _ = iterative_best(goal, prog, SearchOptions(deepen_to, mode=prog.mode))
            deep = d.value if d else ZERO
        rows.append(CheckRow(rel, args, A.value(rel, args), ab.value if ab else ZERO,
                             ex.value if ex else ZERO, s_ab.nodes_expanded,
                             s_ex.nodes_expanded, same, sound, deep))
    return rows


def _sound(A: FuzzyInterpretation, goal, prog: Program, depth: int) -> bool:
    for ans in enumerate_answers(goal, prog, SearchOptions(depth, mode=prog.mode)):
        if consequence_value(A, goal, ans.constraint) < ans.value:
            return False
    return True
