"""Figure rendering for evaluation reports.

Each function writes one PNG next to the CSV it mirrors. Uses the Agg
backend so runs work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .classifier import ClassCatalog
from .evaluation import DiversityReport, HomogeneityRow


def plot_curve(curve: list[tuple[float, float]], path: str,
               random_level: float | None = None) -> None:
    """Accuracy vs tau line plot; optional dashed random-guess baseline."""
    taus = [t for t, _ in curve]
    accs = [a for _, a in curve]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(taus, accs, marker="o", color="tab:blue", label="weighted lenses")
    if random_level is not None:
        ax.axhline(random_level, color="gray", linestyle="--", linewidth=1,
                   label=f"random = {random_level:.3f}")
    ax.set_xlabel("threshold tau")
    ax.set_ylabel("mean node accuracy")
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_reward(matrix: np.ndarray, catalog: ClassCatalog, path: str) -> None:
    """Heatmap of the confusion-reward matrix, annotated when small."""
    c = len(catalog)
    fig, ax = plt.subplots(figsize=(1.2 * c + 3, 1.0 * c + 2.5))
    image = ax.imshow(matrix, cmap="viridis")
    ax.set_xticks(range(c), catalog.names, rotation=45, ha="right")
    ax.set_yticks(range(c), catalog.names)
    ax.set_xlabel("assigned label")
    ax.set_ylabel("true class")
    if c <= 12:
        threshold = matrix.max() / 2 if matrix.max() > 0 else 0.5
        for i in range(c):
            for j in range(c):
                color = "white" if matrix[i, j] < threshold else "black"
                ax.text(j, i, f"{matrix[i, j]:g}", ha="center", va="center",
                        color=color, fontsize=8)
    fig.colorbar(image, ax=ax, label="total reward")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_diversity(report: DiversityReport, path: str) -> None:
    """Bars for top-label accuracy per diversity, lines for weight/entropy."""
    divs = [b.diversity for b in report.buckets]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.bar(divs, [b.top_correct_pct for b in report.buckets], width=0.6,
           color="tab:blue", alpha=0.6, label="top label correct (%)")
    ax.set_xlabel("node diversity (distinct classes in closed neighborhood)")
    ax.set_ylabel("top label correct (%)")
    ax.set_xticks(divs)
    ax2 = ax.twinx()
    ax2.plot(divs, [b.mean_top_weight for b in report.buckets], marker="o",
             color="tab:red", label="mean top weight")
    ax2.plot(divs, [b.mean_entropy for b in report.buckets], marker="s",
             color="tab:green", label="mean entropy")
    ax2.set_ylabel("weight / entropy")
    ax2.set_ylim(0, 1.05)
    handles1, labels1 = ax.get_legend_handles_labels()
    handles2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(handles1 + handles2, labels1 + labels2, loc="upper right",
              fontsize=8)
    title = (f"corr(diversity, top weight) = {report.corr_top_weight:.4f}, "
             f"corr(diversity, entropy) = {report.corr_entropy:.4f}")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_homogeneity(rows: list[HomogeneityRow], path: str) -> None:
    """Peak accuracy per single-class network, annotated with the mode."""
    names = [r.name for r in rows]
    peaks = [r.peak_accuracy for r in rows]
    fig, ax = plt.subplots(figsize=(1.4 * len(rows) + 3, 4.2))
    bars = ax.bar(names, peaks, color="tab:blue", alpha=0.8)
    for bar, row in zip(bars, rows):
        note = row.incorrect_mode if row.incorrect_mode else "none"
        ax.text(bar.get_x() + bar.get_width() / 2, bar.get_height() + 0.01,
                f"{row.peak_accuracy:.3f}\nmode: {note}", ha="center",
                va="bottom", fontsize=8)
    ax.set_ylabel("peak accuracy over tau")
    ax.set_ylim(0, 1.15)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
