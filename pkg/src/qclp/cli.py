"""Command-line interface: ``qclp solve|best|oracle|check|parse|validate``.

Exit status is 0 on success with at least one answer (or a clean oracle,
check or validate run), 1 when there is no answer or a check fails, and 2 on
usage, input or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .fixpoint import IterationCapError, format_value, minimal_model
from .grammar import compile_grammar, parse_grammar, parse_sentence
from .program import ProgramError, parse_program, prepare_query, validate
from .solver import (ProofNode, SearchOptions, decimal6, enumerate_answers,
                     format_tree, iterative_best)
from .terms import ArityError, FragmentError

__all__ = ["main", "run", "build_parser", "read_json_result"]

EXIT_OK, EXIT_NONE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _depth(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError("depth must be >= 0")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=_depth, default=None,
                        help="depth limit for proof search (default 64)")
    common.add_argument("--epsilon", type=_fraction, default=Fraction(0),
                        help="prune branches that cannot reach this value, e.g. 1/10")
    common.add_argument("--mode", choices=("min", "product"), default="min",
                        help="combination of body values")
    common.add_argument("--strategy", choices=("exhaustive", "alphabeta"), default="alphabeta")
    common.add_argument("--trace", action="store_true", help="print proof trees")
    common.add_argument("--format", choices=("text", "json"), default="text")
    which = common.add_mutually_exclusive_group()
    which.add_argument("--all", dest="only_best", action="store_false",
                       help="print every answer (default for solve and parse)")
    which.add_argument("--best", dest="only_best", action="store_true",
                       help="print only the top answer")
    common.set_defaults(only_best=False)

    p = argparse.ArgumentParser(prog="qclp", description=(
        "Quantitative constraint logic programs: weighted proof search, minimal fuzzy "
        "models and weighted grammar parsing."))
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "print all answers of a query"),
                       ("best", "print the best answer and search statistics")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("program", type=Path)
        s.add_argument("-q", "--query", required=True)
    s = sub.add_parser("oracle", parents=[common],
                       help="print the minimal model of a function-free program")
    s.add_argument("program", type=Path)
    s.add_argument("--report", type=Path, help="write chain.csv and chain.png here")
    s = sub.add_parser("check", parents=[common],
                       help="oracle / alpha-beta / exhaustive agreement on every ground goal")
    s.add_argument("program", type=Path)
    s.add_argument("--report", type=Path, help="write check.csv and nodes.png here")
    s = sub.add_parser("parse", parents=[common], help="rank the analyses of a sentence")
    s.add_argument("grammar", type=Path)
    s.add_argument("--sentence", required=True)
    s.add_argument("--start", help="start category (default: first rule's left side)")
    s = sub.add_parser("validate", parents=[common],
                       help="report diagnostics for a program or grammar (.grm)")
    s.add_argument("program", type=Path)
    return p


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}")


def _options(args, depth_default: int = 64) -> SearchOptions:
    try:
        return SearchOptions(depth_default if args.depth is None else args.depth,
                             args.epsilon, args.strategy, args.mode)
    except ValueError as e:
        raise UsageError(str(e))


def _value(v: Fraction) -> str:
    return f"{format_value(v)} ({decimal6(v)})"


def _emit_json(doc: dict, out):
    json.dump(doc, out, indent=2)
    out.write("\n")


def _load_program(args):
    return parse_program(_read(args.program), str(args.program), args.mode)


def _solve(args, out) -> int:
    prog = _load_program(args)
    try:
        prog2, goal, visible = prepare_query(args.query, prog)
    except ArityError as e:
        raise UsageError(str(e))
    opts = _options(args)
    if args.command == "best" or args.only_best:
        ans, stats = iterative_best(goal, prog2, opts)
        answers = [ans] if ans else []
    else:
        answers = enumerate_answers(goal, prog2, opts)
        stats = None
    if args.format == "json":
        doc = {"query": args.query, "answers": [a.to_dict(visible) for a in answers]}
        if stats is not None:
            doc["stats"] = vars(stats)
        _emit_json(doc, out)
    else:
        for a in answers:
            print(f"{a.render(visible)} @ {_value(a.value)}", file=out)
            if args.trace:
                print(format_tree(a.proof, 1), file=out)
        if stats is not None:
            print(f"% nodes expanded: {stats.nodes_expanded}, pruned: {stats.pruned}, "
                  f"loop cuts: {stats.loop_cuts}, truncated: {str(stats.truncated).lower()}, "
                  f"depth limit: {stats.depth_limit}", file=out)
        if not answers:
            print("no answers", file=out)
    return EXIT_OK if answers else EXIT_NONE


def _oracle(args, out) -> int:
    prog = _load_program(args)
    A, trace = minimal_model(prog)
    if args.report:
        from .report import write_chain_report
        write_chain_report(trace, args.report)
    if args.format == "json":
        _emit_json({"stabilized_at": trace.stabilized_at, "universe": list(A.universe),
                    "model": {line.split(" = ")[0]: line.split(" = ")[1]
                              for line in A.lines()}}, out)
    else:
        for (rel, a), v in sorted(A.mu.items()):
            name = f"{rel}({','.join(a)})" if a else rel
            print(f"{name} = {_value(v)}", file=out)
        print(f"% chain stabilized at step {trace.stabilized_at}", file=out)
    return EXIT_OK


def _check(args, out) -> int:
    from .harness import check_program
    prog = _load_program(args)
    rows = check_program(prog, depth=args.depth)
    if args.report:
        from .report import write_check_report
        write_check_report(rows, args.report)
    if args.format == "json":
        _emit_json({"rows": [{"atom": r.atom, "oracle": format_value(r.oracle),
                              "alphabeta": format_value(r.alphabeta),
                              "exhaustive": format_value(r.exhaustive),
                              "nodes_alphabeta": r.nodes_alphabeta,
                              "nodes_exhaustive": r.nodes_exhaustive,
                              "same_first": r.same_first, "sound": r.sound, "ok": r.ok}
                             for r in rows]}, out)
    else:
        for r in rows:
            print(f"{'PASS' if r.ok else 'FAIL'} {r.atom}: oracle {format_value(r.oracle)}, "
                  f"alphabeta {format_value(r.alphabeta)}, exhaustive "
                  f"{format_value(r.exhaustive)}, nodes {r.nodes_alphabeta}/"
                  f"{r.nodes_exhaustive}{'' if r.sound else ', UNSOUND answer'}", file=out)
        bad = sum(not r.ok for r in rows)
        print(f"% {len(rows) - bad}/{len(rows)} ground goals agree", file=out)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_NONE


def _parse(args, out) -> int:
    g = parse_grammar(_read(args.grammar), str(args.grammar), args.start)
    tokens = args.sentence.split()
    if not tokens:
        raise UsageError("empty sentence")
    opts = _options(args)
    result = parse_sentence(g, tokens, opts, compile_grammar(g, opts.mode))
    if args.only_best:
        result = result[:1]
    if args.format == "json":
        _emit_json({"sentence": tokens, "analyses": [
            {"value": format_value(a.value), "decimal": decimal6(a.value),
             "tree": a.tree.to_dict(), "proof": a.answer.proof.to_dict()} for a in result]}, out)
    else:
        for a in result:
            print(f"{_value(a.value)} {a.tree.bracketed()}", file=out)
            if args.trace:
                print(format_tree(a.answer.proof, 1), file=out)
        if not result:
            print("no parse", file=out)
    return EXIT_OK if result else EXIT_NONE


def _validate(args, out) -> int:
    text = _read(args.program)
    if args.program.suffix == ".grm":
        g = parse_grammar(text, str(args.program))
        diags = validate(compile_grammar(g, args.mode))
        what = f"{len(g.rules)} rules"
    else:
        prog = _load_program(args)
        diags = validate(prog)
        what = f"{len(prog.clauses)} clauses"
    for d in diags:
        print(d.format(str(args.program)), file=out)
    if not diags:
        print(f"ok: {what}", file=out)
    return EXIT_USAGE if diags else EXIT_OK


_COMMANDS = {"solve": _solve, "best": _solve, "oracle": _oracle, "check": _check,
             "parse": _parse, "validate": _validate}


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, out)
    except ProgramError as e:
        print(str(e), file=err)
    except (UsageError, FragmentError, IterationCapError, ArityError) as e:
        print(f"qclp: error: {e}", file=err)
    return EXIT_USAGE


def read_json_result(text: str) -> list[tuple[str, Fraction, ProofNode]]:
    """Read back the answers of ``solve``/``best --format json``."""
    doc = json.loads(text)
    return [(a["constraint"], Fraction(a["value"]), ProofNode.from_dict(a["proof"]))
            for a in doc["answers"]]


def main() -> None:
    sys.exit(run())
