"""Independent reference evaluators used as test oracles.

Nothing here calls the package's fixpoint module, unifier or solution
enumerator: clause instances are found by plain brute force over the
constant universe and equations are checked by evaluating both sides.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from qclp.terms import Var


def _value(t, alpha):
    if isinstance(t, Var):
        return alpha[t]
    assert not t.args, "reference evaluators are function-free only"
    return t.name


def _instances(clause, universe):
    vs = {*clause.head.args}
    for b in clause.body:
        vs.update(b.args)
    for a, b in clause.constraint.equations:
        for t in (a, b):
            if isinstance(t, Var):
                vs.add(t)
    vs = sorted(vs, key=lambda v: v.id)
    for combo in itertools.product(universe, repeat=len(vs)):
        alpha = dict(zip(vs, combo))
        if all(_value(a, alpha) == _value(b, alpha) for a, b in clause.constraint.equations):
            head = (clause.head.relation, tuple(alpha[x] for x in clause.head.args))
            body = [(b.relation, tuple(alpha[x] for x in b.args)) for b in clause.body]
            yield head, body


def least_herbrand_model(prog, universe) -> set:
    """Classical least model: ground atoms derivable ignoring factors."""
    rows = [list(_instances(c, universe)) for c in prog.clauses]
    model: set = set()
    changed = True
    while changed:
        changed = False
        for inst in rows:
            for head, body in inst:
                if head not in model and all(b in model for b in body):
                    model.add(head)
                    changed = True
    return model


def derivation_values(prog, universe, height: int, mode: str = "min") -> dict:
    """Best value of derivation trees of height at most ``height``, top-down.

    ``V[h][atom] = max over instances of f (x) aggregate(V[h-1][body])``,
    computed recursively with memoization on (atom, h).
    """
    rows = {}
    for c in prog.clauses:
        for head, body in _instances(c, universe):
            rows.setdefault(head, []).append((c.factor, body))
    memo: dict = {}

    def best(atom, h):
        if h == 0:
            return Fraction(0)
        key = (atom, h)
        if key not in memo:
            v = Fraction(0)
            for f, body in rows.get(atom, ()):
                vals = [best(b, h - 1) for b in body]
                if mode == "min":
                    agg = min(vals, default=Fraction(1))
                else:
                    agg = Fraction(1)
                    for x in vals:
                        agg *= x
                v = max(v, f * agg)
            memo[key] = v
        return memo[key]

    out = {}
    for rel, n in prog.relation_arities.items():
        for args in itertools.product(universe, repeat=n):
            v = best((rel, args), height)
            if v:
                out[(rel, args)] = v
    return out


def repair_to_model(prog, start: dict, universe, mode: str = "min") -> dict:
    """Least model above ``start``: raise heads until every clause instance holds."""
    rows = [(c.factor, head, body) for c in prog.clauses
            for head, body in _instances(c, universe)]
    mu = {k: v for k, v in start.items() if v}
    changed = True
    while changed:
        changed = False
        for f, head, body in rows:
            vals = [mu.get(b, Fraction(0)) for b in body]
            if mode == "min":
                agg = min(vals, default=Fraction(1))
            else:
                agg = Fraction(1)
                for x in vals:
                    agg *= x
            if f * agg > mu.get(head, Fraction(0)):
                mu[head] = f * agg
                changed = True
    return mu
