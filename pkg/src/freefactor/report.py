"""Report rendering: cover figures (matplotlib, written to files) next to
tab-delimited tables of lift data and cost bookkeeping."""

from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrowPatch

from .covers import CoverGraph, dumps_cover
from .lifts import CompleteLift, LedgerReport, cost_ledger
from .words import format_word, generator_name

_COLORS = ["#c0392b", "#2471a3", "#1e8449", "#9b59b6", "#b7950b", "#34495e"]


def render_cover_figure(cover: CoverGraph, path: str, title: Optional[str] = None):
    """Draw the labeled cover graph: vertices on a circle, one curved
    arrow per positive edge, one color per generator."""
    n = cover.n_vertices
    pos = {
        v: (math.cos(2 * math.pi * v / n - math.pi / 2), math.sin(2 * math.pi * v / n - math.pi / 2))
        for v in range(n)
    }
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.set_aspect("equal")
    ax.axis("off")
    for v, (x, y) in pos.items():
        face = "#f5b041" if v == cover.base else "white"
        ax.add_patch(plt.Circle((x, y), 0.09, facecolor=face, edgecolor="black", zorder=3))
        ax.text(x, y, str(v), ha="center", va="center", fontsize=9, zorder=4)
    rank = cover.alphabet.rank
    for src, gen, dst in sorted(cover.edges(), key=lambda e: (e[1], e[0])):
        color = _COLORS[(gen - 1) % len(_COLORS)]
        if src == dst:
            x, y = pos[src]
            loop = plt.Circle((x * 1.22, y * 1.22), 0.12, fill=False, edgecolor=color, zorder=2)
            ax.add_patch(loop)
        else:
            arrow = FancyArrowPatch(
                pos[src],
                pos[dst],
                connectionstyle="arc3,rad=0.18",
                arrowstyle="-|>",
                mutation_scale=12,
                color=color,
                shrinkA=10,
                shrinkB=10,
                zorder=2,
            )
            ax.add_patch(arrow)
    handles = [
        plt.Line2D([], [], color=_COLORS[(g - 1) % len(_COLORS)], label=generator_name(g, rank))
        for g in range(1, rank + 1)
    ]
    ax.legend(handles=handles, loc="upper right", fontsize=8, frameon=False)
    if title:
        ax.set_title(title, fontsize=10)
    ax.set_xlim(-1.5, 1.5)
    ax.set_ylim(-1.5, 1.5)
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def lift_table(lift: CompleteLift) -> str:
    """Tab-delimited lift entries."""
    rows = ["entry\trepresentative\tmultiplicity\tlift_word\tlength"]
    for i, e in enumerate(lift.entries):
        rep = format_word(e.rep) or "1"
        rows.append(f"{i}\t{rep}\t{e.mult}\t{format_word(e.word)}\t{len(e.word)}")
    return "\n".join(rows) + "\n"


def ledger_table(report: LedgerReport) -> str:
    rows = [
        "index\tlifts\tmu_x\tgraphing_side\tsection_side\ttarget\tequal",
        "\t".join(
            [
                str(report.index),
                str(report.lift_count),
                str(report.mu_x),
                str(report.graphing_side),
                str(report.section_side),
                str(report.target),
                "yes" if report.equal else "NO",
            ]
        ),
    ]
    return "\n".join(rows) + "\n"


def write_report_bundle(cover: CoverGraph, lift: CompleteLift, out_dir: str) -> list[str]:
    """The CLI report path: figure + delimited tables + the cover JSON.

    Returns the file names written, in a fixed order.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "cover.json")
    with open(path, "w") as fh:
        fh.write(dumps_cover(cover))
    written.append(path)

    path = os.path.join(out_dir, "lift.tsv")
    with open(path, "w") as fh:
        fh.write(lift_table(lift))
    written.append(path)

    ledger = cost_ledger(lift.index, len(lift.entries), Fraction(1, lift.index))
    path = os.path.join(out_dir, "ledger.tsv")
    with open(path, "w") as fh:
        fh.write(ledger_table(ledger))
    written.append(path)

    path = os.path.join(out_dir, "cover.png")
    title = f"index-{cover.n_vertices} cover, lifting {format_word(lift.base_word)}"
    render_cover_figure(cover, path, title=title)
    written.append(path)
    return written
