"""Herbrand terms, equation constraints and a unification-based solver.

Terms are variables or constructor applications (constants are 0-ary
constructors).  A :class:`Constraint` is a conjunction of term equations; its
solved form is an idempotent binding set produced by syntactic unification
with occurs-check.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "Var", "Fn", "Term", "Constraint", "Renaming", "TRUE", "UNSAT",
    "ArityError", "FragmentError", "fresh_var", "const", "term_vars",
    "substitute", "solve", "extend", "project", "conjoin_project",
    "rename_apart", "enumerate_solutions", "format_term",
]


class ArityError(ValueError):
    """Same constructor symbol used with two different arities."""


class FragmentError(ValueError):
    """Input falls outside the function-free fragment."""


# count.__next__ is atomic under the GIL, so ids are never reissued.
_ids = itertools.count(1)


class Var:
    """A logic variable; equality is identity, ``id`` orders by creation."""

    __slots__ = ("id", "name")

    def __init__(self, name: str = "_"):
        self.id = next(_ids)
        self.name = name

    def __lt__(self, other: "Var"):
        return self.id < other.id

    def __repr__(self):
        return f"{self.name}#{self.id}"

    def __str__(self):
        return self.name


def fresh_var(name: str = "_") -> Var:
    return Var(name)


class Fn:
    __slots__ = ("name", "args", "_hash")

    def __init__(self, name: str, args: tuple = ()):
        self.name = name
        self.args = tuple(args)
        self._hash = hash((name, self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def __eq__(self, other):
        return (isinstance(other, Fn) and other._hash == self._hash
                and other.name == self.name and other.args == self.args)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return format_term(self)


Term = Union[Var, Fn]


def const(name: str) -> Fn:
    return Fn(name, ())


def _symbol(name: str) -> str:
    if name and name[0].islower() and all(c.isalnum() or c == "_" for c in name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return _symbol(t.name)
    return f"{_symbol(t.name)}({','.join(format_term(a) for a in t.args)})"


def term_vars(t, out: set | None = None) -> set:
    if out is None:
        out = set()
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t)
        else:
            stack.extend(t.args)
    return out


def _ordered_vars(terms: Iterable) -> list[Var]:
    seen: dict[Var, None] = {}

    def visit(t):
        if isinstance(t, Var):
            seen.setdefault(t)
        else:
            for a in t.args:
                visit(a)

    for t in terms:
        visit(t)
    return list(seen)


def substitute(t, s: Mapping):
    if isinstance(t, Var):
        return s.get(t, t)
    if not t.args:
        return t
    return Fn(t.name, tuple(substitute(a, s) for a in t.args))


UNSOLVED, SOLVED, UNSATISFIABLE = "unsolved", "solved", "unsatisfiable"


class Constraint:
    """Conjunction of term equations.

    In ``solved`` status ``equations`` is a binding set ``(X, t)`` sorted by
    variable id, with every left side distinct and absent from every right
    side.  ``unsatisfiable`` constraints carry no equations.
    """

    __slots__ = ("equations", "status", "_map")

    def __init__(self, equations=(), status: str = UNSOLVED):
        self.equations = tuple(equations)
        self.status = status
        self._map = None

    @classmethod
    def of(cls, *pairs) -> "Constraint":
        return cls(pairs)

    @classmethod
    def from_bindings(cls, bindings: Mapping) -> "Constraint":
        c = cls(sorted(bindings.items(), key=lambda kv: kv[0].id), SOLVED)
        c._map = dict(bindings)
        return c

    @property
    def satisfiable(self) -> bool:
        if self.status == UNSOLVED:
            return solve(self).status == SOLVED
        return self.status == SOLVED

    @property
    def bindings(self) -> dict:
        if self.status != SOLVED:
            raise ValueError(f"bindings of a {self.status} constraint")
        if self._map is None:
            self._map = dict(self.equations)
        return self._map

    def variables(self) -> set:
        """The constrained variables: every variable occurring in an equation."""
        out: set = set()
        for a, b in self.equations:
            term_vars(a, out)
            term_vars(b, out)
        return out

    def __and__(self, other: "Constraint") -> "Constraint":
        if UNSATISFIABLE in (self.status, other.status):
            return UNSAT
        return Constraint(self.equations + other.equations)

    def __eq__(self, other):
        return (isinstance(other, Constraint) and self.status == other.status
                and self.equations == other.equations)

    def __hash__(self):
        return hash((self.status, self.equations))

    def __repr__(self):
        return f"Constraint({self}, {self.status})"

    def __str__(self):
        if self.status == UNSATISFIABLE:
            return "false"
        if not self.equations:
            return "true"
        return " & ".join(f"{format_term(a)} = {format_term(b)}" for a, b in self.equations)


TRUE = Constraint((), SOLVED)
UNSAT = Constraint((), UNSATISFIABLE)


def _walk(t, s):
    while isinstance(t, Var):
        nxt = s.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def _occurs(v: Var, t, s) -> bool:
    stack = [t]
    while stack:
        t = _walk(stack.pop(), s)
        if isinstance(t, Var):
            if t == v:
                return True
        else:
            stack.extend(t.args)
    return False


def _unify(pairs, s: dict) -> bool:
    """Extend triangular substitution ``s`` in place; False on clash."""
    stack = list(reversed(pairs))
    while stack:
        a, b = stack.pop()
        a = _walk(a, s)
        b = _walk(b, s)
        if a is b:
            continue
        if isinstance(a, Var):
            if isinstance(b, Var):
                # the newer variable is bound, the older one stays free
                if a.id < b.id:
                    a, b = b, a
                s[a] = b
                continue
            if _occurs(a, b, s):
                return False
            s[a] = b
        elif isinstance(b, Var):
            if _occurs(b, a, s):
                return False
            s[b] = a
        else:
            if a.name != b.name:
                return False
            if len(a.args) != len(b.args):
                raise ArityError(
                    f"constructor {a.name} used with arities {len(a.args)} and {len(b.args)}")
            if a == b:
                continue
            stack.extend(reversed(list(zip(a.args, b.args))))
    return True


def _resolve(t, s):
    t = _walk(t, s)
    if isinstance(t, Var) or not t.args:
        return t
    return Fn(t.name, tuple(_resolve(a, s) for a in t.args))


def _solved(s: dict) -> Constraint:
    return Constraint.from_bindings({v: _resolve(t, s) for v, t in s.items()})


def solve(phi: Constraint) -> Constraint:
    """Solved form of ``phi`` (same solutions) or :data:`UNSAT`.

    >>> X, Y = Var("X"), Var("Y")
    >>> str(solve(Constraint.of((X, Fn("f", (Y,))), (Y, const("a"))))))
    'X = f(a) & Y = a'
    """
    if phi.status != UNSOLVED:
        return phi
    s: dict = {}
    if not _unify(phi.equations, s):
        return UNSAT
    return _solved(s)


def extend(phi: Constraint, pairs: Iterable) -> Constraint:
    """Conjoin equations onto an already solved constraint."""
    if phi.status == UNSATISFIABLE:
        return UNSAT
    if phi.status == UNSOLVED:
        phi = solve(phi)
        if phi.status == UNSATISFIABLE:
            return UNSAT
    s = dict(phi.bindings)
    if not _unify(list(pairs), s):
        return UNSAT
    return _solved(s)


def project(phi: Constraint, keep, canonical: bool = False) -> Constraint:
    """Restrict a solved constraint to the bindings of ``keep``.

    Dropping the other bindings is exact: in an idempotent binding set no
    bound variable occurs on a right side.  With ``canonical`` the remaining
    variables outside ``keep`` become ``_1, _2, ...`` in first-occurrence order.
    """
    phi = solve(phi)
    if phi.status == UNSATISFIABLE:
        return UNSAT
    kept = {v: t for v, t in phi.bindings.items() if v in keep}
    if canonical:
        names: dict[Var, Var] = {}
        for v in sorted(kept, key=lambda v: v.id):
            for w in _ordered_vars([kept[v]]):
                if w not in keep and w not in names:
                    names[w] = Var(f"_{len(names) + 1}")
        if names:
            kept = {v: substitute(t, names) for v, t in kept.items()}
    return Constraint.from_bindings(kept)


def conjoin_project(phi: Constraint, phi2: Constraint, keep) -> Constraint:
    return project(phi & phi2, set(keep), canonical=True)


class Renaming:
    """Finite injective variable map; identity elsewhere."""

    __slots__ = ("mapping",)

    def __init__(self, mapping: Mapping[Var, Var] | None = None):
        self.mapping = dict(mapping or {})
        if len(set(self.mapping.values())) != len(self.mapping):
            raise ValueError("renaming is not injective")

    def __call__(self, t):
        return substitute(t, self.mapping)

    def __getitem__(self, v: Var) -> Var:
        return self.mapping.get(v, v)

    def inverse(self) -> "Renaming":
        return Renaming({b: a for a, b in self.mapping.items()})

    def constraint(self, phi: Constraint) -> Constraint:
        if phi.status == UNSATISFIABLE:
            return phi
        eqs = tuple((self(a), self(b)) for a, b in phi.equations)
        if phi.status == SOLVED:
            return Constraint(sorted(eqs, key=lambda e: e[0].id), SOLVED)
        return Constraint(eqs)

    def is_identity(self) -> bool:
        return all(a == b for a, b in self.mapping.items())


def rename_apart(vars, avoid, every: bool = False) -> Renaming:
    """Map the members of ``vars`` that clash with ``avoid`` to fresh variables.

    With ``every`` each variable is renamed, which is what the solver uses when
    taking a clause variant.
    """
    avoid = set(avoid)
    return Renaming({v: Var(v.name) for v in vars if every or v in avoid})


def _ground(t, alpha):
    if isinstance(t, Var):
        return alpha[t]
    if t.args:
        raise FragmentError(f"function symbol {t.name}/{len(t.args)} in function-free fragment")
    return t.name


def enumerate_solutions(phi: Constraint, vars, universe) -> list[dict]:
    """Brute-force solutions of a function-free ``phi`` over a finite universe.

    Assignments range over ``vars`` together with the constrained variables of
    ``phi``; results are restricted to ``vars``, deduplicated, in product order.
    Equations are checked directly, without going through unification.
    """
    vars = list(dict.fromkeys(vars))
    universe = list(dict.fromkeys(universe))
    if phi.status == UNSATISFIABLE:
        return []
    for a, b in phi.equations:
        for t in (a, b):
            for sub in _subterms(t):
                if isinstance(sub, Fn) and sub.args:
                    raise FragmentError(
                        f"function symbol {sub.name}/{len(sub.args)} in function-free fragment")
    extra = [v for v in _ordered_vars(t for e in phi.equations for t in e) if v not in vars]
    allv = vars + extra
    seen = set()
    out = []
    for combo in itertools.product(universe, repeat=len(allv)):
        alpha = dict(zip(allv, combo))
        if all(_ground(a, alpha) == _ground(b, alpha) for a, b in phi.equations):
            key = combo[:len(vars)]
            if key not in seen:
                seen.add(key)
                out.append(dict(zip(vars, key)))
    return out


def _subterms(t) -> Iterator:
    stack = [t]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, Fn):
            stack.extend(t.args)
