"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or as a script.
"""

import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qclp.fixpoint import (FuzzyInterpretation, consequence_value, minimal_model,
                           model_check)
from qclp.grammar import parse_grammar, parse_sentence, recompute_value
from qclp.harness import heuristic_depth
from qclp.program import parse_program, prepare_query
from qclp.randprog import ground_goals, random_program
from qclp.solver import (SearchOptions, best_proof, enumerate_answers,
                         expand_minmax, iterative_best)

from reference import least_herbrand_model, repair_to_model

F = Fraction
DATA = Path(__file__).resolve().parents[1] / "src" / "qclp" / "data"
SUITE_SEED = 0
SUITE_SIZE = 200


def report(name: str, ok: bool, detail: str, capsys):
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def suite(unit_factors=False):
    rng = random.Random(SUITE_SEED)
    progs = [random_program(rng, unit_factors=unit_factors) for _ in range(SUITE_SIZE)]
    return [(p, *minimal_model(p)) for p in progs]


@pytest.fixture(scope="module")
def weighted_suite():
    return suite()


def test_example_1_oracle(capsys):
    t = time.perf_counter()
    A, trace = minimal_model(parse_program((DATA / "ex1.qclp").read_text()))
    dt = time.perf_counter() - t
    ok = A.value("p", ("phi",)) == F(7, 10) and trace.stabilized_at == 1 and dt < 1
    report("1 example oracle", ok,
           f"p(phi) = {A.value('p', ('phi',))}, stabilized at {trace.stabilized_at}, "
           f"{dt:.3f}s", capsys)


def test_example_2_tree_and_answers(capsys):
    t = time.perf_counter()
    prog = parse_program((DATA / "ex1.qclp").read_text())
    prog, goal, vis = prepare_query("p(X) & X = phi", prog)
    root = expand_minmax(goal, prog)
    answers = enumerate_answers(goal, prog)
    best, _ = best_proof(goal, prog)
    dt = time.perf_counter() - t
    kids = [c.value for c in root.children]
    failures = [c for c in root.children if c.children and c.children[0].kind == "failure"]
    ok = (root.value == F(7, 10) and kids == [F(7, 10), F(1, 2), 0]
          and [a.value for a in answers] == [F(7, 10), F(1, 2)]
          and len(failures) == 1 and failures[0].value == 0
          and f"{best.render(vis)} @ {best.value}" == "X = phi @ 7/10" and dt < 1)
    report("2 example tree", ok,
           f"root {root.value} = max{{{', '.join(map(str, kids))}}}, "
           f"answers {[str(a.value) for a in answers]}, best {best.render(vis)} @ "
           f"{best.value}, {dt:.3f}s", capsys)


def test_search_matches_the_oracle(weighted_suite, capsys):
    t = time.perf_counter()
    goals = mismatches = unsound = 0
    for prog, A, trace in weighted_suite:
        bound = heuristic_depth(prog, trace.stabilized_at)
        for rel, args, goal in ground_goals(prog, A.universe):
            goals += 1
            ans, _ = iterative_best(goal, prog, SearchOptions(depth_limit=bound))
            if (ans.value if ans else 0) != A.value(rel, args):
                mismatches += 1
            for a in enumerate_answers(goal, prog,
                                       SearchOptions(depth_limit=trace.stabilized_at)):
                if a.value > consequence_value(A, goal, a.constraint):
                    unsound += 1
    dt = time.perf_counter() - t
    ok = mismatches == 0 and unsound == 0 and dt < 60
    report("3 soundness/completeness", ok,
           f"{SUITE_SIZE} programs, {goals} ground goals, {mismatches} mismatches, "
           f"{unsound} unsound answers, {dt:.1f}s", capsys)


def test_classical_reduction(capsys):
    t = time.perf_counter()
    bad_values = mismatched = 0
    for prog, A, trace in suite(unit_factors=True):
        values = set(A.mu.values())
        for rel, args, goal in ground_goals(prog, A.universe):
            ans, _ = best_proof(goal, prog, SearchOptions(depth_limit=trace.stabilized_at))
            values.add(ans.value if ans else F(0))
        bad_values += not values <= {0, 1}
        ones = {k for k, v in A.mu.items() if v == 1}
        mismatched += ones != least_herbrand_model(prog, A.universe)
    dt = time.perf_counter() - t
    ok = bad_values == 0 and mismatched == 0 and dt < 30
    report("4 classical reduction", ok,
           f"{bad_values} programs with values outside {{0,1}}, {mismatched} "
           f"differing from the unweighted least model, {dt:.1f}s", capsys)


def test_pruning_safety_and_benefit(weighted_suite, capsys):
    queries = agree = costlier = eligible = strictly = 0
    for prog, A, trace in weighted_suite:
        d = trace.stabilized_at
        for rel, args, goal in ground_goals(prog, A.universe):
            ab, s_ab = best_proof(goal, prog, SearchOptions(depth_limit=d))
            ex, s_ex = best_proof(goal, prog,
                                  SearchOptions(depth_limit=d, strategy="exhaustive"))
            queries += 1
            agree += (ab is None and ex is None) or (
                ab is not None and ex is not None and ab.value == ex.value
                and str(ab.constraint) == str(ex.constraint))
            costlier += s_ab.nodes_expanded > s_ex.nodes_expanded
            if len(prog.clauses_for(rel)) >= 2:
                eligible += 1
                strictly += s_ab.nodes_expanded < s_ex.nodes_expanded
    share = strictly / eligible if eligible else 0.0
    ok = agree == queries and costlier == 0 and share >= 0.30
    report("5 pruning safety", ok,
           f"{agree}/{queries} agree, {costlier} with more nodes, strictly fewer nodes "
           f"on {strictly}/{eligible} multi-clause queries ({share:.0%})", capsys)


def test_chain_and_model_checks(weighted_suite, capsys):
    rng = random.Random(1)
    nonmonotone = not_models = perturbed = not_below = distinct = 0
    for prog, A, trace in weighted_suite:
        nonmonotone += any(not lo <= hi for lo, hi in zip(trace.steps, trace.steps[1:]))
        not_models += not model_check(prog, A)
    for prog, A, _ in weighted_suite[:50]:
        start = {k: F(rng.randint(0, 10), 10) for k in A.mu if rng.random() < 0.7}
        for rel, n in prog.relation_arities.items():
            args = tuple(rng.choice(A.universe) for _ in range(n))
            start[(rel, args)] = F(rng.randint(0, 10), 10)
        B = FuzzyInterpretation(repair_to_model(prog, start, A.universe), A.universe)
        if model_check(prog, B):
            perturbed += 1
            not_below += not A <= B
            distinct += B != A
    ok = (nonmonotone == 0 and not_models == 0 and perturbed == 50 and not_below == 0
          and distinct > 0)
    report("6 chain and model checks", ok,
           f"{nonmonotone} non-monotone chains, {not_models} fixpoints failing the model "
           f"check, fixpoint below {perturbed - not_below}/{perturbed} perturbed models "
           f"({distinct} differ from it)",
           capsys)


def test_grammar_disambiguation(capsys):
    t = time.perf_counter()
    text = (DATA / "believes.grm").read_text()
    tokens = "john believes peter saw mary".split()

    def analyses(vp_s, np3):
        g = parse_grammar(text.replace("v s @ 0.9", f"v s @ {vp_s}")
                          .replace("n n n @ 0.4", f"n n n @ {np3}"))
        return g, parse_sentence(g, tokens)

    def reading(a):
        return "np-compound" if "[np [n peter] [n saw] [n mary]]" in \
            a.tree.bracketed(values=False) else "s-complement"

    g1, first = analyses("0.9", "0.4")
    g2, flipped = analyses("0.3", "0.8")
    recomputed = all(recompute_value(a.tree, g, "min") == a.value
                     for g, group in ((g1, first), (g2, flipped)) for a in group)
    dt = time.perf_counter() - t
    ok = ([reading(a) for a in first] == ["s-complement", "np-compound"]
          and [reading(a) for a in flipped] == ["np-compound", "s-complement"]
          and [a.value for a in first] == [F(9, 10), F(2, 5)]
          and [a.value for a in flipped] == [F(4, 5), F(3, 10)]
          and recomputed and dt < 5)
    report("7 grammar disambiguation", ok,
           f"{' > '.join(f'{reading(a)} {a.value}' for a in first)}; flipped: "
           f"{' > '.join(f'{reading(a)} {a.value}' for a in flipped)}; "
           f"bottom-up values agree: {recomputed}, {dt:.2f}s", capsys)


if __name__ == "__main__":
    weighted = suite()
    checks = [lambda: test_example_1_oracle(None),
              lambda: test_example_2_tree_and_answers(None),
              lambda: test_search_matches_the_oracle(weighted, None),
              lambda: test_classical_reduction(None),
              lambda: test_pruning_safety_and_benefit(weighted, None),
              lambda: test_chain_and_model_checks(weighted, None),
              lambda: test_grammar_disambiguation(None)]
    failed = 0
    for fn in checks:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
