"""Minimal fuzzy model of a function-free program by chain iteration.

This is the declarative side: interpretations map ground atoms to exact
membership values, the chain starts from the all-zero interpretation and each
step takes, per ground atom, the best ``factor (x) aggregate(body values)``
over every clause instance whose constraint holds.  It enumerates assignments
over a finite constant universe and never calls the unifier, so it can serve
as an independent check on the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .program import Goal, Program
from .terms import Constraint, FragmentError, enumerate_solutions

__all__ = [
    "FuzzyInterpretation", "ChainTrace", "IterationCapError", "aggregate",
    "universe_of", "chain_step", "minimal_model", "model_check",
    "consequence_value", "format_value",
]

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_CAP = 10_000


class IterationCapError(RuntimeError):
    """The chain did not stabilize within the configured step cap."""


def format_value(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def aggregate(values: Iterable[Fraction], mode: str = "min") -> Fraction:
    """Combine body values; the empty aggregate is 1 in both modes."""
    out = ONE
    if mode == "min":
        for v in values:
            if v < out:
                out = v
    elif mode == "product":
        for v in values:
            out *= v
    else:
        raise ValueError(f"unknown combination mode {mode!r}")
    return out


@dataclass(frozen=True)
class FuzzyInterpretation:
    """Membership values of ground atoms; missing entries are 0."""

    mu: Mapping = field(default_factory=dict)
    universe: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "mu", {k: Fraction(v) for k, v in self.mu.items() if v != 0})
        object.__setattr__(self, "universe", tuple(self.universe))
        for v in self.mu.values():
            if not 0 <= v <= 1:
                raise ValueError(f"membership value {v} outside [0,1]")

    def value(self, relation: str, args: tuple) -> Fraction:
        return self.mu.get((relation, tuple(args)), ZERO)

    def __le__(self, other: "FuzzyInterpretation") -> bool:
        return all(v <= other.value(*k) for k, v in self.mu.items())

    def __ge__(self, other: "FuzzyInterpretation") -> bool:
        return other <= self

    def __eq__(self, other):
        return isinstance(other, FuzzyInterpretation) and self.mu == other.mu

    def __hash__(self):
        return hash(frozenset(self.mu.items()))

    def lines(self) -> list[str]:
        """Sorted ``relation(args) = p/q`` lines for nonzero entries."""
        out = []
        for (rel, args), v in sorted(self.mu.items()):
            atom = f"{rel}({','.join(args)})" if args else rel
            out.append(f"{atom} = {format_value(v)}")
        return out


@dataclass(frozen=True)
class ChainTrace:
    steps: tuple
    stabilized_at: int


def universe_of(prog: Program, extra: Iterable[str] = ()) -> tuple:
    """Constants of the program followed by any extra (query) constants."""
    _require_function_free(prog)
    return tuple(dict.fromkeys([*prog.constants(), *extra]))


def _require_function_free(prog: Program):
    for name, arity in prog.constructor_arities.items():
        if arity > 0:
            raise FragmentError(f"function symbol {name}/{arity}: oracle needs a function-free program")


class _Instances:
    """Per clause, the ground instances satisfying its constraint."""

    def __init__(self, prog: Program, universe: tuple):
        _require_function_free(prog)
        self.rows = []
        for c in prog.clauses:
            vars_ = list(dict.fromkeys([*c.head.args, *(v for b in c.body for v in b.args)]))
            sols = enumerate_solutions(c.constraint, vars_, universe)
            ground = []
            for alpha in sols:
                head = tuple(alpha[x] for x in c.head.args)
                body = tuple((b.relation, tuple(alpha[x] for x in b.args)) for b in c.body)
                ground.append((head, body))
            self.rows.append((c, ground))

    def step(self, prev: FuzzyInterpretation, mode: str) -> FuzzyInterpretation:
        mu: dict = {}
        for c, ground in self.rows:
            rel = c.head.relation
            for head, body in ground:
                v = c.factor * aggregate((prev.value(r, a) for r, a in body), mode)
                key = (rel, head)
                if v > mu.get(key, ZERO):
                    mu[key] = v
        return FuzzyInterpretation(mu, prev.universe)


def chain_step(prog: Program, A: FuzzyInterpretation) -> FuzzyInterpretation:
    """One chain step from ``A`` over ``A.universe``."""
    return _Instances(prog, A.universe).step(A, prog.mode)


def minimal_model(prog: Program, universe: Optional[Iterable[str]] = None,
                  cap: int = DEFAULT_CAP) -> tuple[FuzzyInterpretation, ChainTrace]:
    """Iterate the chain from all zeros until two consecutive steps agree.

    Returns the fixpoint and the trace ``A0 .. An`` with ``stabilized_at = n``
    the first index where ``A(n+1) == A(n)``.
    """
    universe = universe_of(prog) if universe is None else tuple(universe)
    inst = _Instances(prog, universe)
    steps = [FuzzyInterpretation({}, universe)]
    for i in range(cap):
        nxt = inst.step(steps[-1], prog.mode)
        if nxt == steps[-1]:
            return steps[-1], ChainTrace(tuple(steps), i)
        steps.append(nxt)
    raise IterationCapError(f"chain not stable after {cap} steps")


def model_check(prog: Program, A: FuzzyInterpretation) -> bool:
    """True iff every clause instance satisfies head >= factor (x) body."""
    inst = _Instances(prog, A.universe)
    for c, ground in inst.rows:
        for head, body in ground:
            need = c.factor * aggregate((A.value(r, a) for r, a in body), prog.mode)
            if A.value(c.head.relation, head) < need:
                return False
    return True


def consequence_value(A: FuzzyInterpretation, goal: Goal, answer: Constraint) -> Fraction:
    """Largest ``v`` with ``A`` a model of ``answer ->v goal``.

    That is the minimum of the goal atom's value over the solutions of
    ``answer`` that also solve the goal constraint (0 if there are none).
    """
    if goal.atom is None:
        raise ValueError("goal has no relational atom")
    args = list(goal.atom.args)
    vars_ = list(dict.fromkeys([*args, *sorted(answer.variables() | goal.constraint.variables(),
                                                key=lambda v: v.id)]))
    if not enumerate_solutions(answer, vars_, A.universe):
        raise ValueError(f"answer {answer} is unsatisfiable over the universe")
    sols = enumerate_solutions(answer & goal.constraint, vars_, A.universe)
    if not sols:
        return ZERO
    return min(A.value(goal.atom.relation, tuple(s[x] for x in args)) for s in sols)
