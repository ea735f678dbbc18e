import random
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qclp.grammar import (Grammar, Terminal, WeightedRule, compile_grammar,
                          parse_grammar, parse_sentence, recompute_value)
from qclp.program import ProgramError, validate
from qclp.solver import SearchOptions

F = Fraction

TOY = """\
s -> a b @ 0.8 .
a -> "x" .
b -> "y" .
"""


def believes(vp_s="0.9", np3="0.4"):
    return parse_grammar(f"""
s  -> np vp .
vp -> v s @ {vp_s} .
vp -> v np .
np -> n .
np -> n n n @ {np3} .
n  -> "john" .
n  -> "peter" .
n  -> "mary" .
n  -> "saw" .
v  -> "believes" .
v  -> "saw" .
""")


SENTENCE = "john believes peter saw mary".split()


def chart_value(g: Grammar, tokens, mode="min"):
    """Best derivation value by a span chart, independent of the solver."""
    tokens = tuple(tokens)

    @lru_cache(maxsize=None)
    def cat(c, i, j):
        best = F(0)
        for r in g.rules:
            if r.lhs == c:
                best = max(best, r.weight * seq(r.rhs, i, j))
        return best

    @lru_cache(maxsize=None)
    def seq(items, i, j):
        if not items:
            return F(1) if i == j else F(0)
        head, rest = items[0], items[1:]
        best = F(0)
        for k in range(i + 1, j - len(rest) + 1):
            if isinstance(head, Terminal):
                v = F(1) if k == i + 1 and tokens[i] == head.token else F(0)
            else:
                v = cat(head, i, k)
            if v:
                r = seq(rest, k, j)
                if r:
                    best = max(best, min(v, r) if mode == "min" else v * r)
        return best

    return cat(g.start, 0, len(tokens))


class TestCompile:
    def test_category_rule(self):
        prog = compile_grammar(parse_grammar("s -> np vp @ 0.9 .\nnp -> \"a\" .\nvp -> \"b\" ."))
        assert str(prog.clauses[0]) == "s(S0,S2) <- 0.9 : np(S0,S1) & vp(S1,S2)."

    def test_terminal_rule(self):
        prog = compile_grammar(parse_grammar('n -> "saw" @ 0.3 .'))
        assert str(prog.clauses[0]) == "n(S0,S1) <- 0.3 : S0 = cons(saw,S1)."

    def test_empty_rule(self):
        prog = compile_grammar(parse_grammar("s -> .\n"))
        (c,) = prog.clauses
        assert str(c.constraint) == "S0 = S1" and c.body == ()

    def test_compiled_grammar_validates(self):
        assert validate(compile_grammar(believes())) == []

    def test_rule_order_is_clause_order(self):
        g = believes()
        prog = compile_grammar(g)
        assert [c.head.relation for c in prog.clauses] == [r.lhs for r in g.rules]


class TestDiagnostics:
    def test_undefined_category(self):
        with pytest.raises(ProgramError) as e:
            parse_grammar("s -> np vp .\nnp -> \"a\" .", "g.grm")
        assert "vp" in str(e.value)

    def test_weight_out_of_range(self):
        with pytest.raises(ProgramError):
            parse_grammar("s -> \"a\" @ 1.5 .")

    def test_reserved_terminal(self):
        with pytest.raises(ProgramError):
            parse_grammar("s -> \"cons\" .")

    def test_rule_objects_check_weights(self):
        with pytest.raises(ValueError):
            WeightedRule("s", (), F(0))


class TestParse:
    def test_single_analysis(self):
        g = parse_grammar(TOY)
        (a,) = parse_sentence(g, ["x", "y"])
        assert a.value == F(4, 5)
        assert a.tree.bracketed(values=False) == "[s [a x] [b y]]"

    def test_unknown_tokens_have_no_parse(self):
        assert parse_sentence(parse_grammar(TOY), ["x", "z"]) == []

    def test_wrong_length_has_no_parse(self):
        assert parse_sentence(parse_grammar(TOY), ["x"]) == []

    def test_empty_sentence_is_rejected(self):
        with pytest.raises(ValueError):
            parse_sentence(parse_grammar(TOY), [])

    def test_both_readings_of_the_ambiguous_sentence(self):
        g = believes()
        analyses = parse_sentence(g, SENTENCE)
        shapes = [a.tree.bracketed(values=False) for a in analyses]
        assert [a.value for a in analyses] == [F(9, 10), F(2, 5)]
        assert shapes[0].startswith("[s [np [n john]] [vp [v believes] [s ")
        assert shapes[1].startswith("[s [np [n john]] [vp [v believes] [np [n peter] [n saw]")

    def test_ranking_flips_with_the_weights(self):
        analyses = parse_sentence(believes("0.3", "0.8"), SENTENCE)
        assert [a.value for a in analyses] == [F(4, 5), F(3, 10)]
        assert "[np [n peter] [n saw] [n mary]]" in analyses[0].tree.bracketed(values=False)

    def test_values_agree_with_bottom_up_recomputation(self):
        g = believes()
        for mode in ("min", "product"):
            analyses = parse_sentence(g, SENTENCE, SearchOptions(mode=mode))
            for a in analyses:
                assert recompute_value(a.tree, g, mode) == a.value
            assert analyses[0].value == chart_value(g, SENTENCE, mode)

    def test_derivation_children_follow_the_rule(self):
        g = believes()
        tree = parse_sentence(g, SENTENCE)[0].tree
        assert g.rules[tree.rule - 1].lhs == tree.category == "s"
        d = tree.to_dict()
        assert d["category"] == "s" and d["value"] == "9/10"


# ---------------------------------------------------------------------------
# properties

WORDS = ["x", "y"]
CATS = ["s", "a", "b"]


def random_grammar(rng):
    rules = [WeightedRule("a", (Terminal("x"),), F(rng.randint(1, 10), 10)),
             WeightedRule("b", (Terminal("y"),), F(rng.randint(1, 10), 10)),
             WeightedRule("s", ("a", "b"), F(rng.randint(1, 10), 10))]
    for _ in range(rng.randint(0, 4)):
        lhs = rng.choice(CATS)
        # binary or preterminal rules only, so no unary cycles
        if rng.random() < 0.5:
            rhs = (Terminal(rng.choice(WORDS)),)
        else:
            rhs = tuple(rng.choice(CATS) for _ in range(2))
        rules.append(WeightedRule(lhs, rhs, F(rng.randint(1, 10), 10)))
    return rules


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.lists(st.sampled_from(WORDS), min_size=1, max_size=3))
def test_best_analysis_matches_the_chart(seed, tokens):
    g = Grammar(tuple(random_grammar(random.Random(seed))), "s")
    analyses = parse_sentence(g, tokens, SearchOptions(depth_limit=2 * len(tokens) + 2))
    best = analyses[0].value if analyses else F(0)
    assert best == chart_value(g, tokens)
    for a in analyses:
        assert recompute_value(a.tree, g) == a.value


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.lists(st.sampled_from(WORDS), min_size=1, max_size=3))
def test_adding_a_rule_never_removes_analyses(seed, tokens):
    rng = random.Random(seed)
    rules = random_grammar(rng)
    extra = WeightedRule(rng.choice(CATS), (Terminal(rng.choice(WORDS)),), F(1, 2))
    opts = SearchOptions(depth_limit=2 * len(tokens) + 2)
    before = parse_sentence(Grammar(tuple(rules), "s"), tokens, opts)
    after = parse_sentence(Grammar(tuple(rules + [extra]), "s"), tokens, opts)
    shapes = {a.tree.bracketed() for a in after}
    assert {a.tree.bracketed() for a in before} <= shapes
