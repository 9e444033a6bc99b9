"""Figure rendering for evaluation and cost reports.

Charts are written straight to image files; no interactive backend is
ever touched, so this works in headless environments.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .costmodel import CostReport


def render_f1_figure(rows: list, path) -> None:
    """Grouped bar chart of F1 per patient and classifier.

    ``rows`` holds mappings with ``patient``, ``classifier``, and ``f1``
    keys, one per evaluated pair.
    """
    patients = sorted({row["patient"] for row in rows})
    classifiers = sorted({row["classifier"] for row in rows})
    scores = {(row["patient"], row["classifier"]): row["f1"] for row in rows}

    x = np.arange(len(patients))
    width = 0.8 / max(len(classifiers), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * len(patients)), 4.0))
    for i, clf in enumerate(classifiers):
        heights = [scores.get((p, clf), 0.0) for p in patients]
        ax.bar(x + (i - (len(classifiers) - 1) / 2) * width, heights, width, label=clf)
    ax.set_xticks(x)
    ax.set_xticklabels(patients, rotation=30, ha="right")
    ax.set_ylabel("F1")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Seizure detection F1 by patient")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_cost_figure(report: CostReport, path) -> None:
    """Bar charts of the memory and computation ratios relative to LR."""
    kinds = [k for k in report.entries if report.entries[k].memory_ratio_vs_lr is not None]
    mem = [report.entries[k].memory_ratio_vs_lr for k in kinds]
    ops = [report.entries[k].computation_ratio_vs_lr for k in kinds]

    fig, (ax_mem, ax_ops) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    labels = [k.upper() for k in kinds]
    for ax, values, title in (
        (ax_mem, mem, "Memory vs LR"),
        (ax_ops, ops, "Computation vs LR"),
    ):
        ax.bar(labels, values)
        ax.set_yscale("log")
        ax.set_title(title)
        ax.grid(axis="y", alpha=0.3)
        for i, v in enumerate(values):
            ax.text(i, v, f"{v:.2f}", ha="center", va="bottom", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
