"""Goal reduction, min/max trees, proof-tree enumeration and best-proof search.

A max-node is labeled by a goal ``r(x) & phi`` and takes the best of its
clause alternatives; a min-node is labeled by a clause and its resolvent and
is worth ``factor (x) aggregate(children)``.  Success nodes are worth 1 and
failure nodes 0.

Proof trees are enumerated depth-first with the body atoms of a clause solved
left to right, each one under the constraint produced by its left siblings, so
every emitted answer constraint is satisfiable.  :func:`expand_minmax` builds
the literal min/max tree instead, where siblings are expanded independently
under the shared resolvent constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .fixpoint import aggregate, format_value
from .program import MODES, Atom, Goal, Program, QuantClause
from .terms import (SOLVED, TRUE, Constraint, Var, extend, project,
                    solve, substitute, term_vars)

__all__ = [
    "SearchOptions", "SearchStats", "ProofNode", "Answer", "reduce", "reduce_all",
    "expand_minmax", "iter_answers", "enumerate_answers", "best_proof",
    "iterative_best", "relation_bounds", "decimal6", "format_tree", "render_constraint",
]

ZERO = Fraction(0)
ONE = Fraction(1)
STRATEGIES = ("exhaustive", "alphabeta")


def decimal6(v: Fraction) -> str:
    q = round(Fraction(v) * 10 ** 6)
    return f"{q // 10 ** 6}.{q % 10 ** 6:06d}"


@dataclass(frozen=True)
class SearchOptions:
    depth_limit: int = 64
    epsilon: Fraction = ZERO
    strategy: str = "alphabeta"
    mode: str = "min"
    dedupe: bool = False

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.depth_limit < 0:
            raise ValueError("depth_limit must be >= 0")
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown combination mode {self.mode!r}")


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    pruned: int = 0
    loop_cuts: int = 0
    truncated: bool = False
    depth_limit: int = 0


@dataclass(eq=False, slots=True)
class ProofNode:
    """Node of a min/max tree or proof tree.

    ``kind`` is ``max``, ``min``, ``success`` or ``failure``.  Labels are
    rendered lazily from ``atom``/``constraint`` projected onto ``scope``;
    nodes read back from JSON carry a literal ``text`` label instead.
    """

    kind: str
    value: Fraction
    children: tuple = ()
    atom: Optional[Atom] = None
    constraint: Optional[Constraint] = None
    clause: Optional[int] = None
    factor: Optional[Fraction] = None
    body: tuple = ()
    scope: frozenset = frozenset()
    truncated: bool = False
    cut: Optional[str] = None
    text: Optional[str] = None

    @property
    def label(self) -> str:
        if self.text is not None:
            return self.text
        if self.kind == "failure":
            return {"depth": "depth limit", "loop": "repeated goal"}.get(self.cut, "false")
        c = render_constraint(self.constraint or TRUE, self.scope)
        if self.kind == "success":
            return c
        parts = [str(self.atom)] if self.atom is not None else []
        parts += [str(b) for b in self.body]
        if c != "true" or not parts:
            parts.append(c)
        text = " & ".join(parts)
        return f"{self.clause}, {text}" if self.kind == "min" else text

    @property
    def incomplete(self) -> bool:
        """True if this node or any descendant was cut by depth or loop check."""
        return self.truncated or any(ch.incomplete for ch in self.children)

    def walk(self) -> Iterator["ProofNode"]:
        yield self
        for ch in self.children:
            yield from ch.walk()

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "label": self.label, "value": format_value(self.value),
             "truncated": self.truncated, "children": [c.to_dict() for c in self.children]}
        if self.clause is not None:
            d["clause"] = self.clause
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProofNode":
        return cls(kind=d["kind"], value=Fraction(d["value"]),
                   children=tuple(cls.from_dict(c) for c in d.get("children", ())),
                   clause=d.get("clause"), truncated=d.get("truncated", False),
                   text=d["label"])


def format_tree(node: ProofNode, indent: int = 0) -> str:
    """Indented text rendering, one node per line."""
    lines = []

    def rec(n: ProofNode, depth: int):
        flag = " (truncated)" if n.truncated else ""
        lines.append(f"{'  ' * depth}{n.kind} {n.label}  [{format_value(n.value)}]{flag}")
        for ch in n.children:
            rec(ch, depth + 1)

    rec(node, indent)
    return "\n".join(lines)


def render_constraint(c: Constraint, visible) -> str:
    return str(project(c, set(visible), canonical=True))


@dataclass(frozen=True, eq=False)
class Answer:
    constraint: Constraint
    value: Fraction
    proof: ProofNode

    def render(self, visible) -> str:
        return render_constraint(self.constraint, visible)

    def to_dict(self, visible) -> dict:
        return {"constraint": self.render(visible), "value": format_value(self.value),
                "decimal": decimal6(self.value), "proof": self.proof.to_dict()}


# ---------------------------------------------------------------------------
# inference rules

def _clause_vars(clause: QuantClause) -> tuple:
    return tuple(sorted(clause.variables(), key=lambda v: v.id))


def _resolve(atom: Atom, c: Constraint, clause: QuantClause, cvars: tuple = None):
    """Rename ``clause`` apart, equate heads and solve; returns (body, constraint)."""
    m = {v: Var(v.name) for v in (cvars if cvars is not None else _clause_vars(clause))}
    pairs = list(zip(atom.args, [m[v] for v in clause.head.args]))
    pairs += [(substitute(a, m), substitute(b, m)) for a, b in clause.constraint.equations]
    body = tuple(Atom(b.relation, tuple(m[v] for v in b.args)) for b in clause.body)
    return body, extend(c, pairs)


def reduce(goal: Goal, clause: QuantClause, avoid=()) -> Optional[Goal]:
    """One reduction step followed by constraint solving.

    Returns the resolvent when the body has at most one atom: the renamed body
    atom (or none) with the combined solved constraint projected onto the
    variables still relevant.  An unsatisfiable combination yields a goal with
    an unsatisfiable constraint (a failure branch).  Returns ``None`` when the
    clause does not apply to the goal.  Longer bodies go through
    :func:`reduce_all`.
    """
    r = reduce_all(goal, clause, avoid)
    if r is None:
        return None
    atoms, c = r
    if len(atoms) > 1:
        raise ValueError("resolvent has several atoms; use reduce_all")
    return Goal(atoms[0] if atoms else None, c)


def reduce_all(goal: Goal, clause: QuantClause, avoid=()) -> Optional[tuple[tuple, Constraint]]:
    """Like :func:`reduce` but returns ``(body atoms, constraint)`` for any body."""
    if goal.atom is None or goal.atom.relation != clause.head.relation \
            or goal.atom.arity != clause.head.arity:
        return None
    body, c = _resolve(goal.atom, solve(goal.constraint), clause)
    if c.status != SOLVED:
        return body, c
    keep = set(goal.atom.args) | goal.constraint.variables() | set(avoid)
    keep |= _vars_of(body)
    return body, project(c, keep, canonical=True)


# ---------------------------------------------------------------------------
# repeated-goal detection

def _state_key(atom: Atom, c: Constraint, context: frozenset):
    """Variant-invariant key of a goal relative to fixed context variables.

    Atom arguments outside the context are numbered by position, context
    variables keep their identity and any other variable is numbered in order
    of appearance.  Equal keys mean the goals are variants under a renaming
    that fixes the context.  Ground goals are keyed by their arguments alone.
    """
    b = c.bindings
    ground = tuple(b.get(v) for v in atom.args)
    if all(t is not None and not term_vars(t) for t in ground):
        # a ground goal's proofs bind nothing outside themselves
        return (atom.relation, ground)
    pos = {v: i for i, v in enumerate(atom.args) if v not in context}
    keep = context.union(atom.args)
    exist: dict = {}

    def enc_var(v: Var):
        if v in pos:
            return (0, pos[v])
        if v in keep:
            return (1, v.id)
        if v not in exist:
            exist[v] = len(exist)
        return (2, exist[v])

    def enc(t):
        if isinstance(t, Var):
            return enc_var(t)
        return (3, t.name, tuple(enc(a) for a in t.args))

    bound = sorted(((enc_var(v), t) for v, t in b.items() if v in keep),
                   key=lambda e: e[0])
    return (atom.relation, tuple(enc_var(v) for v in atom.args),
            tuple((k, enc(t)) for k, t in bound))


def _vars_of(atoms) -> set:
    out: set = set()
    for a in atoms:
        out.update(a.args)
    return out


# ---------------------------------------------------------------------------
# literal min/max tree

def expand_minmax(goal: Goal, prog: Program, opts: SearchOptions = SearchOptions(),
                  keep=None) -> ProofNode:
    """Build the min/max tree of ``goal`` down to ``opts.depth_limit``.

    Every max-node gets one min-node per clause for its relation (file order);
    every min-node gets one max-node per body atom under the solved combined
    constraint, or a single success/failure leaf when the body is empty or the
    constraint unsatisfiable.  Goals cut by the depth limit or by the
    repeated-goal check become failure nodes flagged ``truncated``.

    Siblings are expanded independently, so a min-node may combine child
    values whose best proofs disagree on shared variables; the root value is
    then larger than the best proof tree value.
    """
    query = frozenset(goal.variables() if keep is None else keep)
    c0 = solve(goal.constraint)
    if goal.atom is None:
        if c0.status == SOLVED:
            return ProofNode("success", ONE, constraint=c0, scope=query)
        return ProofNode("failure", ZERO, constraint=c0)
    if c0.status != SOLVED:
        return ProofNode("max", ZERO, (ProofNode("failure", ZERO),), goal.atom, c0,
                         scope=frozenset(goal.atom.args))
    return _expand(prog, opts, goal.atom, c0, 0, frozenset(), query)


def _expand(prog, opts, atom, c, depth, ancestors, query) -> ProofNode:
    scope = frozenset(atom.args)
    key = _state_key(atom, c, query)
    if key in ancestors:
        return ProofNode("failure", ZERO, atom=atom, constraint=c, scope=scope,
                         truncated=True, cut="loop")
    if depth >= opts.depth_limit:
        return ProofNode("failure", ZERO, atom=atom, constraint=c, scope=scope,
                         truncated=True, cut="depth")
    ancestors = ancestors | {key}
    kids = []
    for cid, clause in prog.clauses_for(atom.relation):
        body, c2 = _resolve(atom, c, clause)
        if c2.status != SOLVED:
            leaf = ProofNode("failure", ZERO)
            kids.append(ProofNode("min", ZERO, (leaf,), clause=cid, factor=clause.factor,
                                  body=body, constraint=c2, scope=scope))
            continue
        body_vars = _vars_of(body)
        if not body:
            leaf = ProofNode("success", ONE, constraint=c2, scope=scope)
            kids.append(ProofNode("min", clause.factor * ONE, (leaf,), clause=cid,
                                  factor=clause.factor, constraint=c2, scope=scope))
            continue
        sub = []
        for b in body:
            cb = project(c2, query | set(b.args))
            sub.append(_expand(prog, opts, b, cb, depth + 1, ancestors, query))
        value = clause.factor * aggregate((s.value for s in sub), opts.mode)
        kids.append(ProofNode("min", value, tuple(sub), clause=cid, factor=clause.factor,
                              body=body, constraint=project(c2, scope | body_vars),
                              scope=scope | body_vars))
    value = max((k.value for k in kids), default=ZERO)
    return ProofNode("max", value, tuple(kids), atom, c, scope=scope)


# ---------------------------------------------------------------------------
# proof-tree search

Lift = Callable[[Fraction], Fraction]


def _identity(v: Fraction) -> Fraction:
    return v


def relation_bounds(prog: Program) -> dict:
    """Per relation, an upper bound on the value of any of its atoms.

    This is the minimal model of the program with arguments and constraints
    erased: each proof maps onto an erased proof of the same value.  An
    optimal erased proof never repeats a relation along a branch, so the
    chain is stable after at most one step per relation.
    """
    ub = {r: ZERO for r in prog.relation_arities}
    for _ in range(len(ub) + 2):
        nxt = {r: ZERO for r in ub}
        for c in prog.clauses:
            v = c.factor * aggregate((ub[b.relation] for b in c.body), prog.mode)
            if v > nxt[c.head.relation]:
                nxt[c.head.relation] = v
        if nxt == ub:
            return ub
        ub = nxt
    return {r: ONE for r in ub}


class _Search:
    def __init__(self, prog: Program, opts: SearchOptions, query: frozenset):
        self.prog = prog
        self.opts = opts
        self.mode = opts.mode
        self.query = query
        self.alphabeta = opts.strategy == "alphabeta"
        self.best: Optional[Fraction] = None
        self.stats = SearchStats(depth_limit=opts.depth_limit)
        self.cvars = {cid: _clause_vars(cl) for cid, cl in enumerate(prog.clauses, 1)}
        self.ub = relation_bounds(prog.with_mode(opts.mode))
        self.clause_ub = {cid: cl.factor * aggregate((self.ub[b.relation] for b in cl.body),
                                                     opts.mode)
                          for cid, cl in enumerate(prog.clauses, 1)}

    def bounded(self) -> bool:
        return self.opts.epsilon > 0 or (self.alphabeta and self.best is not None)

    def viable(self, ceiling: Fraction) -> bool:
        """False when a branch whose root value cannot exceed ``ceiling`` is pruned."""
        if ceiling < self.opts.epsilon:
            self.stats.pruned += 1
            return False
        if self.alphabeta and self.best is not None and ceiling <= self.best:
            self.stats.pruned += 1
            return False
        return True

    def atom(self, atom: Atom, c: Constraint, pending: tuple, depth: int,
             ancestors: frozenset, lift: Lift) -> Iterator[tuple]:
        """Yield ``(constraint, value, max-node)`` per proof of ``atom``."""
        if self.bounded() and not self.viable(lift(self.ub[atom.relation])):
            return
        self.stats.nodes_expanded += 1
        if not self.ub[atom.relation]:
            # no clause chain for this relation bottoms out in a fact
            return
        context = self.query.union(_vars_of(pending))
        key = _state_key(atom, c, context)
        if key in ancestors:
            self.stats.loop_cuts += 1
            return
        if depth >= self.opts.depth_limit:
            self.stats.truncated = True
            return
        ancestors = ancestors | {key}
        scope = frozenset(atom.args)
        for cid, clause in self.prog.clauses_for(atom.relation):
            f = clause.factor
            if not self.clause_ub[cid]:
                continue
            if self.bounded() and not self.viable(lift(self.clause_ub[cid])):
                continue
            self.stats.nodes_expanded += 1
            body, c2 = _resolve(atom, c, clause, self.cvars[cid])
            if c2.status != SOLVED:
                continue
            body_vars = _vars_of(body)
            c2 = project(c2, context | scope | body_vars)
            for c_out, vals, kids in self.body(body, c2, pending, depth + 1, ancestors,
                                                lift, f):
                value = f * aggregate(vals, self.mode)
                if not kids:
                    self.stats.nodes_expanded += 1
                    kids = (ProofNode("success", ONE, constraint=c2, scope=scope),)
                mn = ProofNode("min", value, kids, clause=cid, factor=f, body=body,
                               constraint=c2, scope=scope | body_vars)
                yield c_out, value, ProofNode("max", value, (mn,), atom, c, scope=scope)

    def body(self, atoms: tuple, c: Constraint, pending: tuple, depth: int,
             ancestors: frozenset, parent: Lift, f: Fraction, done: tuple = ()):
        if not atoms:
            yield c, done, ()
            return
        first, rest = atoms[0], atoms[1:]
        mode = self.mode
        later = tuple(self.ub[b.relation] for b in rest)

        def lift(v, done=done):
            return parent(f * aggregate(done + (v,) + later, mode))

        for c1, v1, n1 in self.atom(first, c, rest + pending, depth, ancestors, lift):
            for c2, vals, kids in self.body(rest, c1, pending, depth, ancestors, parent, f,
                                            done + (v1,)):
                yield c2, vals, (n1,) + kids

    def run(self, goal: Goal) -> Iterator[Answer]:
        c0 = solve(goal.constraint)
        if c0.status != SOLVED:
            return
        if goal.atom is None:
            self.stats.nodes_expanded += 1
            yield Answer(project(c0, self.query, canonical=True), ONE,
                         ProofNode("success", ONE, constraint=c0, scope=self.query))
            return
        for c, v, node in self.atom(goal.atom, c0, (), 0, frozenset(), _identity):
            yield Answer(project(c, self.query, canonical=True), v, node)


def _query_vars(goal: Goal, keep) -> frozenset:
    return frozenset(goal.variables() if keep is None else keep)


def iter_answers(goal: Goal, prog: Program, opts: SearchOptions = SearchOptions(),
                 keep=None, stats: Optional[SearchStats] = None) -> Iterator[Answer]:
    """Proof trees within the depth limit, lazily, in discovery order."""
    opts = SearchOptions(opts.depth_limit, opts.epsilon, "exhaustive", opts.mode, opts.dedupe)
    s = _Search(prog, opts, _query_vars(goal, keep))
    if stats is not None:
        s.stats = stats
        stats.depth_limit = opts.depth_limit
    yield from s.run(goal)


def enumerate_answers(goal: Goal, prog: Program, opts: SearchOptions = SearchOptions(),
                      keep=None, stats: Optional[SearchStats] = None) -> list[Answer]:
    """All answers within bounds, by value descending then discovery order."""
    out = list(iter_answers(goal, prog, opts, keep, stats))
    if opts.dedupe:
        seen, uniq = set(), []
        for a in out:
            k = (str(a.constraint), a.value)
            if k not in seen:
                seen.add(k)
                uniq.append(a)
        out = uniq
    out.sort(key=lambda a: -a.value)
    return out


def best_proof(goal: Goal, prog: Program, opts: SearchOptions = SearchOptions(),
               keep=None, floor: Optional[Fraction] = None
               ) -> tuple[Optional[Answer], SearchStats]:
    """Maximum-value answer (first one found among equals) and search statistics.

    With ``floor`` under alphabeta, only answers strictly better than ``floor``
    are sought; ``None`` then means nothing beats it within the depth limit.
    """
    s = _Search(prog, opts, _query_vars(goal, keep))
    if floor is not None and s.alphabeta:
        s.best = Fraction(floor)
    best: Optional[Answer] = None
    for a in s.run(goal):
        if floor is not None and a.value <= floor:
            continue
        if best is None or a.value > best.value:
            best = a
            s.best = a.value
    return best, s.stats


def _ceiling(goal: Goal, prog: Program, mode: str) -> Fraction:
    if goal.atom is None:
        return ONE
    return relation_bounds(prog.with_mode(mode)).get(goal.atom.relation, ZERO)


def iterative_best(goal: Goal, prog: Program, opts: SearchOptions = SearchOptions(),
                   keep=None) -> tuple[Optional[Answer], SearchStats]:
    """Best proof by iterative deepening up to ``opts.depth_limit``.

    Under alphabeta each deeper pass only looks for answers strictly better
    than the best so far, which is safe because raising the depth limit only
    adds proof trees.  Deepening stops once a pass finishes without any depth
    cut, or the best value reaches the static bound of the goal's relation.
    Node counts are cumulative.
    """
    total = 0
    best: Optional[Answer] = None
    top = _ceiling(goal, prog, opts.mode)
    st = SearchStats()
    for d in range(0, opts.depth_limit + 1):
        o = SearchOptions(d, opts.epsilon, opts.strategy, opts.mode, opts.dedupe)
        floor = best.value if best is not None else None
        ans, st = best_proof(goal, prog, o, keep, floor)
        total += st.nodes_expanded
        if ans is not None and (best is None or ans.value > best.value):
            best = ans
        if not st.truncated or (best is not None and best.value >= top):
            break
    st.nodes_expanded = total
    return best, st
