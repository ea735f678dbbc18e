"""CSV tables and matplotlib figures for ``check`` and ``oracle`` runs."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .fixpoint import ChainTrace, format_value  # noqa: E402

__all__ = ["write_check_report", "write_chain_report"]


def write_check_report(rows, outdir) -> list[Path]:
    """``check.csv`` plus ``nodes.png`` comparing expanded-node counts."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    table = out / "check.csv"
    with table.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom", "oracle", "alphabeta", "exhaustive", "nodes_alphabeta",
                    "nodes_exhaustive", "same_first", "sound", "status"])
        for r in rows:
            w.writerow([r.atom, format_value(r.oracle), format_value(r.alphabeta),
                        format_value(r.exhaustive), r.nodes_alphabeta, r.nodes_exhaustive,
                        r.same_first, r.sound, "pass" if r.ok else "FAIL"])

    fig, ax = plt.subplots(figsize=(5, 5))
    ex = [r.nodes_exhaustive for r in rows]
    ab = [r.nodes_alphabeta for r in rows]
    colors = ["tab:blue" if r.ok else "tab:red" for r in rows]
    ax.scatter(ex, ab, c=colors, s=18)
    top = max(ex + ab + [1])
    ax.plot([0, top], [0, top], color="gray", lw=0.8, ls="--")
    ax.set_xlabel("nodes expanded, exhaustive")
    ax.set_ylabel("nodes expanded, alpha-beta")
    ax.set_title("search effort per ground goal")
    fig.tight_layout()
    figure = out / "nodes.png"
    fig.savefig(figure, dpi=100)
    plt.close(fig)
    return [table, figure]


def write_chain_report(trace: ChainTrace, outdir) -> list[Path]:
    """``chain.csv`` (atom, step, value) plus ``chain.png`` with one line per atom."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    atoms = sorted({k for step in trace.steps for k in step.mu})
    table = out / "chain.csv"
    with table.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom", "step", "value"])
        for rel, args in atoms:
            name = f"{rel}({','.join(args)})" if args else rel
            for i, step in enumerate(trace.steps):
                w.writerow([name, i, format_value(step.value(rel, args))])

    fig, ax = plt.subplots(figsize=(6, 4))
    steps = range(len(trace.steps))
    for rel, args in atoms:
        name = f"{rel}({','.join(args)})" if args else rel
        ax.plot(steps, [float(s.value(rel, args)) for s in trace.steps], marker="o", label=name)
    ax.set_xlabel("chain step")
    ax.set_ylabel("membership value")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"chain stabilizes at step {trace.stabilized_at}")
    if 0 < len(atoms) <= 12:
        ax.legend(fontsize=7)
    fig.tight_layout()
    figure = out / "chain.png"
    fig.savefig(figure, dpi=100)
    plt.close(fig)
    return [table, figure]
