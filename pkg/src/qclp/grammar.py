"""Weighted phrase-structure grammars compiled into quantitative programs.

Grammar files hold one rule per line::

    % comment
    s  -> np vp @ 0.9 .
    np -> n .                 % weight 1
    n  -> "john" .
    e  -> .                   % empty right side

A rule ``C -> X1 .. Xn @ w`` becomes ``c(S0,Sn) <-w x1(S0,S1) & .. & xn(S(n-1),Sn)``
over difference lists, where a terminal ``"t"`` at position i contributes the
equation ``S(i-1) = cons(t, Si)``.  Parsing a sentence is then an ordinary
query ``start(S, E) & S = cons(t1, .. nil) & E = nil`` for the general solver,
and each proof tree maps back onto a derivation tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .fixpoint import aggregate, format_value
from .program import (Atom, Diagnostic, Goal, Program, ProgramError,
                      QuantClause, parse_factor, tokenize)
from .solver import Answer, ProofNode, SearchOptions, enumerate_answers
from .terms import Constraint, Fn, Var, const

__all__ = [
    "Terminal", "WeightedRule", "Grammar", "Derivation", "ParseAnalysis",
    "parse_grammar", "check_grammar", "compile_grammar", "encode_tokens",
    "parse_sentence", "recompute_value",
]

CONS, NIL = "cons", "nil"


@dataclass(frozen=True)
class Terminal:
    token: str

    def __str__(self):
        return f'"{self.token}"'


@dataclass(frozen=True)
class WeightedRule:
    lhs: str
    rhs: tuple  # category names (str) and Terminal items
    weight: Fraction = Fraction(1)
    line: int = 0

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))
        object.__setattr__(self, "rhs", tuple(self.rhs))
        if not 0 < self.weight <= 1:
            raise ValueError(f"rule weight {self.weight} outside (0,1]")

    def categories(self) -> list[str]:
        return [x for x in self.rhs if isinstance(x, str)]

    def __str__(self):
        rhs = " ".join(str(x) for x in self.rhs)
        w = "" if self.weight == 1 else f" @ {format_value(self.weight)}"
        return f"{self.lhs} -> {rhs}{w} ."


@dataclass(frozen=True)
class Grammar:
    rules: tuple
    start: str

    @property
    def categories(self) -> list[str]:
        return list(dict.fromkeys(r.lhs for r in self.rules))


def parse_grammar(text: str, filename: str = "<grammar>", start: Optional[str] = None) -> Grammar:
    """Read a grammar file; the start category defaults to the first left side."""
    try:
        toks = tokenize(text)
    except ProgramError as e:
        raise ProgramError(e.diagnostics, filename) from None
    rules, diags = [], []
    i = 0

    def fail(tok, msg):
        diags.append(Diagnostic(tok.line, tok.col, "error", msg))

    while toks[i].kind != "eof":
        first = toks[i]
        if first.kind not in ("lower", "quoted"):
            fail(first, f"expected a category, found {first.text!r}")
            while toks[i].kind != "eof" and toks[i].text != ".":
                i += 1
            i += toks[i].kind != "eof"
            continue
        lhs, i = first.text, i + 1
        if toks[i].text != "->":
            fail(toks[i], f"expected '->', found {toks[i].text or 'end of input'!r}")
            while toks[i].kind != "eof" and toks[i].text != ".":
                i += 1
            i += toks[i].kind != "eof"
            continue
        i += 1
        rhs: list[Union[str, Terminal]] = []
        weight = Fraction(1)
        ok = True
        while toks[i].kind in ("lower", "quoted", "quoted_dq"):
            t = toks[i]
            rhs.append(Terminal(t.text) if t.kind == "quoted_dq" else t.text)
            i += 1
        if toks[i].text == "@":
            i += 1
            t = toks[i]
            try:
                if t.kind != "num":
                    raise ValueError(f"expected a weight, found {t.text or 'end of input'!r}")
                weight = parse_factor(t.text)
                if not 0 < weight <= 1:
                    raise ValueError(f"weight {t.text} outside (0,1]")
                i += 1
            except (ValueError, ZeroDivisionError) as e:
                fail(t, str(e))
                ok = False
        if toks[i].text != ".":
            if ok:
                fail(toks[i], f"expected '.', found {toks[i].text or 'end of input'!r}")
            while toks[i].kind != "eof" and toks[i].text != ".":
                i += 1
            ok = False
        i += toks[i].kind != "eof"
        if ok:
            rules.append(WeightedRule(lhs, tuple(rhs), weight, first.line))
    if not diags and not rules:
        diags.append(Diagnostic(1, 1, "error", "grammar has no rules"))
    if diags:
        raise ProgramError(diags, filename)
    g = Grammar(tuple(rules), start or rules[0].lhs)
    diags = check_grammar(g)
    if diags:
        raise ProgramError(diags, filename)
    return g


def check_grammar(g: Grammar) -> list[Diagnostic]:
    defined = set(g.categories)
    diags = []
    if g.start not in defined:
        diags.append(Diagnostic(0, 0, "error", f"start category {g.start} has no rules"))
    for r in g.rules:
        for c in r.categories():
            if c not in defined:
                diags.append(Diagnostic(r.line, 0, "error",
                                        f"category {c} is used but has no rules"))
        for x in r.rhs:
            if isinstance(x, Terminal) and x.token in (CONS, NIL):
                diags.append(Diagnostic(r.line, 0, "error",
                                        f"terminal {x} clashes with the list encoding"))
    return diags


def compile_grammar(g: Grammar, mode: str = "min") -> Program:
    """One clause per rule, in rule order, so clause ``i`` is rule ``i``."""
    diags = check_grammar(g)
    if diags:
        raise ProgramError(diags, "<grammar>")
    clauses = []
    for r in g.rules:
        s = [Var(f"S{i}") for i in range(len(r.rhs) + 1)]
        eqs, body = [], []
        for i, x in enumerate(r.rhs):
            if isinstance(x, Terminal):
                eqs.append((s[i], Fn(CONS, (const(x.token), s[i + 1]))))
            else:
                body.append(Atom(x, (s[i], s[i + 1])))
        if r.rhs:
            head = Atom(r.lhs, (s[0], s[-1]))
        else:
            s1 = Var("S1")
            head = Atom(r.lhs, (s[0], s1))
            eqs.append((s[0], s1))
        clauses.append(QuantClause(head, r.weight, Constraint(eqs), tuple(body)))
    return Program(tuple(clauses), mode=mode)


def encode_tokens(tokens: Sequence[str]):
    t = const(NIL)
    for tok in reversed(tokens):
        t = Fn(CONS, (const(tok), t))
    return t


@dataclass(frozen=True)
class Derivation:
    """Derivation tree node: the rule used and one child per right-side item."""

    rule: int  # 1-based rule index
    category: str
    children: tuple  # Derivation or token str
    value: Fraction

    def bracketed(self, values: bool = True) -> str:
        inner = " ".join(c if isinstance(c, str) else c.bracketed(values)
                         for c in self.children)
        head = f"{self.category}:{format_value(self.value)}" if values else self.category
        return f"[{head} {inner}]" if inner else f"[{head}]"

    def to_dict(self) -> dict:
        return {"category": self.category, "rule": self.rule,
                "value": format_value(self.value),
                "children": [c if isinstance(c, str) else c.to_dict() for c in self.children]}


@dataclass(frozen=True)
class ParseAnalysis:
    tree: Derivation
    value: Fraction
    answer: Answer


def _derivation(node: ProofNode, g: Grammar) -> Derivation:
    if node.kind != "max" or len(node.children) != 1 or node.children[0].kind != "min":
        raise ValueError("not a proof tree of a compiled grammar")
    mn = node.children[0]
    rule = g.rules[mn.clause - 1]
    subs = iter(c for c in mn.children if c.kind == "max")
    kids = []
    for x in rule.rhs:
        kids.append(x.token if isinstance(x, Terminal) else _derivation(next(subs), g))
    return Derivation(mn.clause, rule.lhs, tuple(kids), node.value)


def recompute_value(d: Derivation, g: Grammar, mode: str = "min") -> Fraction:
    """Bottom-up value of a derivation tree from the rule weights alone."""
    rule = g.rules[d.rule - 1]
    sub = [recompute_value(c, g, mode) for c in d.children if isinstance(c, Derivation)]
    return rule.weight * aggregate(sub, mode)


def parse_sentence(g: Grammar, tokens: Sequence[str],
                   opts: SearchOptions = SearchOptions(),
                   prog: Optional[Program] = None) -> list[ParseAnalysis]:
    """All analyses of ``tokens`` within the depth limit, best first."""
    if not tokens:
        raise ValueError("empty token list")
    prog = prog if prog is not None else compile_grammar(g, opts.mode)
    s, e = Var("S"), Var("E")
    goal = Goal(Atom(g.start, (s, e)),
                Constraint.of((s, encode_tokens(tokens)), (e, const(NIL))))
    out = []
    for ans in enumerate_answers(goal, prog, opts, keep={s, e}):
        out.append(ParseAnalysis(_derivation(ans.proof, g), ans.value, ans))
    return out
