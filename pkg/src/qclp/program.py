"""Quantitative definite clause programs: data model, parser and normalizer.

Concrete syntax::

    % comment
    p(X) <- 0.7 : X = phi.        % factor 7/10, one equation
    q(X, Y) <- r(X) & s(Y).       % factor 1
    r(a).                         % fact, factor 1
    edge(X, Y) <- 0.8 : X = a & Y = b.

Uppercase- or underscore-initial identifiers are variables, lowercase or
quoted identifiers are constructor symbols.  Atom arguments that are not
distinct variables are flattened into the constraint part.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .terms import (ArityError, Constraint, Fn, TRUE, Var, format_term,
                    term_vars, _symbol)

__all__ = [
    "Atom", "QuantClause", "Program", "Goal", "Query", "Diagnostic",
    "ProgramError", "parse_program", "parse_query", "parse_factor",
    "normalize_clause", "normalize_goal", "validate", "format_clause",
    "format_factor", "prepare_query", "tokenize", "RawAtom", "RawClause",
    "ArityError", "MODES",
]

MODES = ("min", "product")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    severity: str
    message: str

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.message}"


class ProgramError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic], filename: str = "<input>"):
        self.diagnostics = list(diagnostics)
        self.filename = filename
        super().__init__("\n".join(d.format(filename) for d in self.diagnostics))


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set:
        return set(self.args)

    def __str__(self):
        if not self.args:
            return _symbol(self.relation)
        return f"{_symbol(self.relation)}({','.join(format_term(a) for a in self.args)})"


@dataclass(frozen=True)
class QuantClause:
    head: Atom
    factor: Fraction
    constraint: Constraint = TRUE
    body: tuple = ()
    pos: Optional[tuple] = field(default=None, compare=False)

    def variables(self) -> set:
        out = set(self.head.args) | self.constraint.variables()
        for b in self.body:
            out.update(b.args)
        return out

    def __str__(self):
        return format_clause(self)


@dataclass(frozen=True)
class Goal:
    """One relational atom (or none) conjoined with a constraint."""

    atom: Optional[Atom]
    constraint: Constraint = TRUE

    def variables(self) -> set:
        out = self.constraint.variables()
        if self.atom is not None:
            out |= set(self.atom.args)
        return out

    def __str__(self):
        parts = []
        if self.atom is not None:
            parts.append(str(self.atom))
        if self.constraint.equations or not parts:
            parts.append(str(self.constraint))
        return " & ".join(parts)


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    relation_arities: dict = field(default_factory=dict, compare=False)
    constructor_arities: dict = field(default_factory=dict, compare=False)
    mode: str = "min"

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        rels = dict(self.relation_arities)
        cons = dict(self.constructor_arities)
        for c in self.clauses:
            for a in (c.head, *c.body):
                rels.setdefault(a.relation, a.arity)
            for eq in c.constraint.equations:
                for t in eq:
                    _collect_constructors(t, cons)
        object.__setattr__(self, "relation_arities", rels)
        object.__setattr__(self, "constructor_arities", cons)
        index: dict[str, list] = {}
        for i, c in enumerate(self.clauses, 1):
            index.setdefault(c.head.relation, []).append((i, c))
        object.__setattr__(self, "_index", index)

    def clauses_for(self, relation: str) -> list:
        """``(clause id, clause)`` pairs with head ``relation``, in file order."""
        return self._index.get(relation, [])

    def clause(self, cid: int) -> QuantClause:
        return self.clauses[cid - 1]

    def with_clauses(self, extra: Iterable[QuantClause]) -> "Program":
        return Program(self.clauses + tuple(extra), self.relation_arities,
                       self.constructor_arities, self.mode)

    def with_mode(self, mode: str) -> "Program":
        if mode not in MODES:
            raise ValueError(f"unknown combination mode {mode!r}")
        return Program(self.clauses, self.relation_arities, self.constructor_arities, mode)

    def with_factors(self, factor) -> "Program":
        """Copy with every clause factor replaced by ``factor``."""
        return Program(tuple(QuantClause(c.head, Fraction(factor), c.constraint, c.body, c.pos)
                             for c in self.clauses),
                       self.relation_arities, self.constructor_arities, self.mode)

    def constants(self) -> list[str]:
        """Constant symbols in clause constraints, in first-occurrence order."""
        seen: dict[str, None] = {}
        for c in self.clauses:
            for eq in c.constraint.equations:
                for t in eq:
                    _collect_constants(t, seen)
        return list(seen)

    def function_free(self) -> bool:
        return all(n == 0 for n in self.constructor_arities.values())

    def __str__(self):
        return "".join(format_clause(c) + "\n" for c in self.clauses)


def _collect_constructors(t, out: dict):
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Fn):
            out.setdefault(t.name, len(t.args))
            stack.extend(t.args)


def _collect_constants(t, out: dict):
    if isinstance(t, Fn):
        if not t.args:
            out.setdefault(t.name)
        for a in t.args:
            _collect_constants(a, out)


# ---------------------------------------------------------------------------
# formatting

def format_factor(f: Fraction) -> str:
    f = Fraction(f)
    if f.denominator == 1:
        return str(f.numerator)
    if (10 ** 9) % f.denominator == 0:
        digits = 9
        scaled = f * 10 ** digits
        text = f"{scaled.numerator // 10 ** digits}.{scaled.numerator % 10 ** digits:0{digits}d}"
        return text.rstrip("0")
    return f"{f.numerator}/{f.denominator}"


def format_clause(c: QuantClause) -> str:
    items = [f"{format_term(a)} = {format_term(b)}" for a, b in c.constraint.equations]
    items += [str(b) for b in c.body]
    head = str(c.head)
    if c.factor == 1:
        return f"{head} <- {' & '.join(items)}." if items else f"{head}."
    if not items:
        return f"{head} <- {format_factor(c.factor)}."
    return f"{head} <- {format_factor(c.factor)} : {' & '.join(items)}."


# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<punct><-|->|[()=&,.:@])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ProgramError([Diagnostic(line, i - start + 1, "error",
                                           f"unexpected character {text[i]!r}")])
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tok = m.group()
            if kind == "quoted":
                tok = re.sub(r"\\(.)", r"\1", tok[1:-1])
                kind = "quoted_dq" if m.group()[0] == '"' else "quoted"
            out.append(Token(kind, tok, line, i - start + 1))
        i = m.end()
    out.append(Token("eof", "", line, i - start + 1))
    return out


# ---------------------------------------------------------------------------
# raw syntax

@dataclass
class RawAtom:
    name: str
    args: tuple
    pos: tuple = (0, 0)


@dataclass
class RawClause:
    head: RawAtom
    factor: Fraction = Fraction(1)
    equations: list = field(default_factory=list)
    atoms: list = field(default_factory=list)
    pos: tuple = (0, 0)
    factor_pos: tuple = (0, 0)


class _SyntaxError(Exception):
    def __init__(self, tok: Token, msg: str):
        self.diag = Diagnostic(tok.line, tok.col, "error", msg)


def parse_factor(text: str) -> Fraction:
    """Exact rational from a decimal (at most 9 fractional digits) or ``p/q``."""
    if "." in text and len(text.split(".")[1].split("/")[0]) > 9:
        raise ValueError(f"factor {text} has more than 9 fractional digits")
    return Fraction(text)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0
        self.scope: dict[str, Var] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("punct",):
            raise _SyntaxError(self.tok, f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def at(self, text: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == text

    def term(self):
        t = self.tok
        if t.kind == "var":
            self.next()
            if t.text == "_":
                return Var("_")
            if t.text not in self.scope:
                self.scope[t.text] = Var(t.text)
            return self.scope[t.text]
        if t.kind in ("lower", "quoted", "num"):
            self.next()
            if self.at("("):
                return Fn(t.text, tuple(self.args()))
            return Fn(t.text, ())
        raise _SyntaxError(t, f"expected a term, found {t.text or 'end of input'!r}")

    def args(self) -> list:
        self.expect("(")
        out = [self.term()]
        while self.at(","):
            self.next()
            out.append(self.term())
        self.expect(")")
        return out

    def atom(self) -> RawAtom:
        t = self.tok
        term = self.term()
        if not isinstance(term, Fn) or t.kind == "num":
            raise _SyntaxError(t, f"expected an atom, found {t.text!r}")
        return RawAtom(term.name, term.args, (t.line, t.col))

    def body(self, raw: RawClause, stop=(".",)):
        while True:
            t = self.tok
            if t.kind == "lower" and t.text == "true" and not (
                    self.peek().kind == "punct" and self.peek().text in ("(", "=")):
                self.next()
            else:
                lhs = self.term()
                if self.at("="):
                    self.next()
                    raw.equations.append((lhs, self.term()))
                elif isinstance(lhs, Fn) and t.kind != "num":
                    raw.atoms.append(RawAtom(lhs.name, lhs.args, (t.line, t.col)))
                else:
                    raise _SyntaxError(t, f"expected an atom or equation, found {t.text!r}")
            if self.at("&"):
                self.next()
                continue
            return

    def clause(self) -> RawClause:
        self.scope = {}
        start = self.tok
        raw = RawClause(self.atom(), pos=(start.line, start.col))
        if self.at("<-"):
            self.next()
            t = self.tok
            if t.kind == "num" and self.peek().kind == "punct" and self.peek().text in (":", "."):
                self.next()
                try:
                    raw.factor = parse_factor(t.text)
                except (ValueError, ZeroDivisionError) as e:
                    raise _SyntaxError(t, str(e))
                raw.factor_pos = (t.line, t.col)
                if self.at(":"):
                    self.next()
                    self.body(raw)
            else:
                self.body(raw)
        self.expect(".")
        return raw

    def skip_clause(self):
        while self.tok.kind != "eof" and not self.at("."):
            self.next()
        if self.at("."):
            self.next()


def _fresh_name(taken: set, counter: list) -> str:
    while True:
        counter[0] += 1
        name = f"_N{counter[0]}"
        if name not in taken:
            taken.add(name)
            return name


def _flatten(raw: RawAtom, equations: list, taken: set, counter: list) -> Atom:
    args, seen = [], set()
    for t in raw.args:
        if isinstance(t, Var) and t not in seen:
            seen.add(t)
            args.append(t)
        else:
            y = Var(_fresh_name(taken, counter))
            equations.append((y, t))
            args.append(y)
    return Atom(raw.name, tuple(args))


def normalize_clause(raw: RawClause) -> QuantClause:
    """Flatten non-variable and repeated atom arguments into equations.

    ``p(f(X)) <- ...`` becomes ``p(Y) <- Y = f(X) & ...`` and ``p(X, X).``
    becomes ``p(X, Y) <- X = Y`` with ``Y`` a fresh variable.
    """
    taken = {v.name for v in _raw_vars(raw)}
    counter = [0]
    extra: list = []
    head = _flatten(raw.head, extra, taken, counter)
    body = tuple(_flatten(a, extra, taken, counter) for a in raw.atoms)
    eqs = list(raw.equations) + extra
    return QuantClause(head, Fraction(raw.factor), Constraint(eqs), body, raw.pos)


def _raw_vars(raw: RawClause) -> set:
    out: set = set()
    for a in (raw.head, *raw.atoms):
        for t in a.args:
            term_vars(t, out)
    for a, b in raw.equations:
        term_vars(a, out)
        term_vars(b, out)
    return out


def _check_signature(items, rels: dict, cons: dict, diags: list):
    """items: (kind, name, arity, pos) records in source order."""
    for kind, name, arity, pos in items:
        table = rels if kind == "relation" else cons
        if name not in table:
            table[name] = arity
        elif table[name] != arity:
            diags.append(Diagnostic(pos[0], pos[1], "error",
                                    f"{kind} {name} used with arity {arity}, "
                                    f"first used with arity {table[name]}"))


def _term_symbols(t, pos, out: list):
    if isinstance(t, Fn):
        out.append(("constructor", t.name, len(t.args), pos))
        for a in t.args:
            _term_symbols(a, pos, out)


def _raw_symbols(raw: RawClause) -> list:
    out: list = []
    for a in (raw.head, *raw.atoms):
        out.append(("relation", a.name, len(a.args), a.pos))
        for t in a.args:
            _term_symbols(t, a.pos, out)
    for a, b in raw.equations:
        _term_symbols(a, raw.pos, out)
        _term_symbols(b, raw.pos, out)
    return out


def parse_program(text: str, filename: str = "<input>", mode: str = "min") -> Program:
    """Parse, validate and normalize a program; raise :class:`ProgramError`."""
    try:
        tokens = tokenize(text)
    except ProgramError as e:
        raise ProgramError(e.diagnostics, filename) from None
    p = _Parser(tokens)
    diags: list[Diagnostic] = []
    raws: list[RawClause] = []
    while p.tok.kind != "eof":
        try:
            raws.append(p.clause())
        except _SyntaxError as e:
            diags.append(e.diag)
            p.skip_clause()
    rels: dict = {}
    cons: dict = {}
    for raw in raws:
        if not (0 < raw.factor <= 1):
            line, col = raw.factor_pos
            diags.append(Diagnostic(line, col, "error",
                                    f"factor {format_factor(raw.factor)} outside (0,1]"))
        _check_signature(_raw_symbols(raw), rels, cons, diags)
    if diags:
        raise ProgramError(sorted(diags, key=lambda d: (d.line, d.col)), filename)
    return Program(tuple(normalize_clause(r) for r in raws), rels, cons, mode)


@dataclass(frozen=True)
class Query:
    atoms: tuple
    constraint: Constraint
    variables: tuple  # user-visible variables, first-occurrence order

    def goal(self, prog: Program) -> tuple[Program, Goal]:
        return normalize_goal(list(self.atoms), self.constraint, prog)


def parse_query(text: str, prog: Optional[Program] = None) -> Query:
    """Parse a query in clause-body syntax, flattening atom arguments."""
    try:
        tokens = tokenize(text)
        p = _Parser(tokens)
        raw = RawClause(RawAtom("?", ()))
        p.body(raw)
        if p.at("."):
            p.next()
        if p.tok.kind != "eof":
            raise _SyntaxError(p.tok, f"unexpected {p.tok.text!r} after query")
    except _SyntaxError as e:
        raise ProgramError([e.diag], "<query>") from None
    except ProgramError as e:
        raise ProgramError(e.diagnostics, "<query>") from None
    diags: list[Diagnostic] = []
    rels = dict(prog.relation_arities) if prog else {}
    cons = dict(prog.constructor_arities) if prog else {}
    _check_signature(_raw_symbols(raw)[1:], rels, cons, diags)
    if diags:
        raise ProgramError(diags, "<query>")
    taken = {v.name for v in _raw_vars(raw)}
    counter = [0]
    extra: list = []
    atoms = tuple(_flatten(a, extra, taken, counter) for a in raw.atoms)
    visible = [v for v in p.scope.values() if not v.name.startswith("_")]
    return Query(atoms, Constraint(list(raw.equations) + extra), tuple(visible))


def normalize_goal(goals: Sequence[Atom], phi: Constraint, prog: Program) -> tuple[Program, Goal]:
    """Reduce a compound goal to a single atom on a fresh predicate.

    Goals with at most one atom come back unchanged.  Otherwise the program
    gains ``goalN(V1..Vk) <-1 phi & A1 & ... & An`` over all goal variables
    and the query becomes ``goalN(V1..Vk)``.
    """
    goals = list(goals)
    if len(goals) <= 1:
        return prog, Goal(goals[0] if goals else None, phi)
    seen: dict[Var, None] = {}
    for a in goals:
        for v in a.args:
            seen.setdefault(v)
    for a, b in phi.equations:
        for v in sorted(term_vars(a) | term_vars(b), key=lambda v: v.id):
            seen.setdefault(v)
    n = 0
    while f"goal{n}" in prog.relation_arities:
        n += 1
    head = Atom(f"goal{n}", tuple(seen))
    clause = QuantClause(head, Fraction(1), phi, tuple(goals))
    return prog.with_clauses([clause]), Goal(head, TRUE)


def prepare_query(text: str, prog: Program) -> tuple[Program, Goal, tuple]:
    q = parse_query(text, prog)
    prog2, goal = q.goal(prog)
    return prog2, goal, q.variables


def validate(prog: Program) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    rels: dict = {}
    cons: dict = {}
    if prog.mode not in MODES:
        diags.append(Diagnostic(0, 0, "error", f"unknown combination mode {prog.mode!r}"))
    for i, c in enumerate(prog.clauses, 1):
        line, col = c.pos or (0, 0)
        if not isinstance(c.factor, (Fraction, int)) or not (0 < c.factor <= 1):
            diags.append(Diagnostic(line, col, "error",
                                    f"clause {i}: factor {c.factor} outside (0,1]"))
        items = []
        for a in (c.head, *c.body):
            items.append(("relation", a.relation, a.arity, (line, col)))
            if not all(isinstance(x, Var) for x in a.args):
                diags.append(Diagnostic(line, col, "error",
                                        f"clause {i}: atom {a} has a non-variable argument"))
            elif len(set(a.args)) != len(a.args):
                diags.append(Diagnostic(line, col, "error",
                                        f"clause {i}: atom {a} repeats a variable"))
        for a, b in c.constraint.equations:
            _term_symbols(a, (line, col), items)
            _term_symbols(b, (line, col), items)
        _check_signature(items, rels, cons, diags)
    return diags

