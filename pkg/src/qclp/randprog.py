"""Random function-free programs for property and agreement testing."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .program import Atom, Goal, Program, QuantClause
from .terms import Constraint, Var, const

__all__ = ["random_program", "ground_goals", "ground_goal"]

CONSTANTS = ("a", "b", "c", "d")
RELATIONS = ("p", "q", "r")


def random_program(rng: random.Random, max_constants: int = 4, max_relations: int = 3,
                   max_arity: int = 2, max_clauses: int = 10, max_body: int = 2,
                   unit_factors: bool = False, mode: str = "min") -> Program:
    """Draw a program with factors in {1/10, ..., 10/10}.

    Clause variables are shared between head, equations and body atoms, so
    bodies often join on variables.  At least one constant always appears.
    """
    consts = CONSTANTS[:rng.randint(1, max_constants)]
    rels = {r: rng.randint(0, max_arity) for r in RELATIONS[:rng.randint(1, max_relations)]}
    names = list(rels)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        pool = [Var(f"X{i}") for i in range(rng.randint(1, 3))]
        pick = lambda: rng.choice(pool)
        head_rel = rng.choice(names)
        head = Atom(head_rel, tuple(Var(f"H{i}") for i in range(rels[head_rel])))
        eqs = [(h, pick()) for h in head.args]
        body = []
        for _ in range(rng.randint(0, max_body)):
            rel = rng.choice(names)
            args = tuple(Var(f"B{len(body)}_{i}") for i in range(rels[rel]))
            eqs += [(x, pick()) for x in args]
            body.append(Atom(rel, args))
        for v in pool:
            if rng.random() < 0.35:
                eqs.append((v, const(rng.choice(consts))))
        if rng.random() < 0.15 and len(pool) > 1:
            eqs.append((pool[0], pool[1]))
        f = Fraction(1) if unit_factors else Fraction(rng.randint(1, 10), 10)
        clauses.append(QuantClause(head, f, Constraint(eqs), tuple(body)))
    if not any(True for c in clauses for e in c.constraint.equations
               if not isinstance(e[1], Var)):
        c = clauses[0]
        x = Var("K")
        clauses[0] = QuantClause(c.head, c.factor,
                                 Constraint(c.constraint.equations + ((x, const(consts[0])),)),
                                 c.body)
    return Program(tuple(clauses), mode=mode)


def ground_goal(relation: str, args: tuple) -> Goal:
    xs = tuple(Var(f"A{i}") for i in range(len(args)))
    return Goal(Atom(relation, xs), Constraint.of(*((x, const(a)) for x, a in zip(xs, args))))


def ground_goals(prog: Program, universe) -> list[tuple[str, tuple, Goal]]:
    """Every ground goal over the program's relations and ``universe``."""
    out = []
    for rel, n in sorted(prog.relation_arities.items()):
        for args in itertools.product(universe, repeat=n):
            out.append((rel, args, ground_goal(rel, args)))
    return out
