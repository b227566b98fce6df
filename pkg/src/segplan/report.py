"""Figure rendering for report-style outputs.

Every renderer writes a PNG next to the machine-readable output so results
can be eyeballed without extra tooling. Matplotlib runs headless.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evalselect import EvaluationResult, RankDistribution


def render_rank_distribution(dist: RankDistribution, path: str | Path) -> Path:
    """Histogram panel of bootstrap ranks, one subplot per algorithm."""
    path = Path(path)
    n = len(dist.algorithms)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.0), sharey=True, squeeze=False)
    n_ranks = dist.rank_matrix.shape[1]
    bins = np.arange(0.75, n_ranks + 1.26, 0.5)
    for ax, name, idx in zip(axes[0], dist.algorithms, range(n)):
        ax.hist(dist.rank_matrix[:, idx], bins=bins, color="#4878d0", edgecolor="black")
        ax.set_title(f"{name}\nmean rank {dist.mean_ranks[idx]:.2f}", fontsize=9)
        ax.set_xlabel("rank")
    axes[0][0].set_ylabel("replicates")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_evaluation(result: EvaluationResult, path: str | Path, title: str = "") -> Path:
    """Per-class Dice as box plots over cases, with the pooled mean marked."""
    path = Path(path)
    classes = sorted({c for scores in result.per_case.values() for c in scores})
    data = [
        [scores[c] for scores in result.per_case.values() if c in scores]
        for c in classes
    ]
    fig, ax = plt.subplots(figsize=(1.2 * max(len(classes), 3) + 2, 3.2))
    ax.boxplot(data, tick_labels=[f"class {c}" for c in classes])
    ax.axhline(result.mean_foreground_dice, color="firebrick", linestyle="--",
               label=f"mean foreground Dice {result.mean_foreground_dice:.4f}")
    ax.set_ylabel("Dice")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_patch_preview(patch: np.ndarray, path: str | Path, title: str = "") -> Path:
    """Center slices of a (channels, *spatial) patch, one row per channel."""
    path = Path(path)
    n_channels = patch.shape[0]
    spatial = patch.shape[1:]
    fig, axes = plt.subplots(
        n_channels, 1, figsize=(4.0, 3.2 * n_channels), squeeze=False
    )
    for c in range(n_channels):
        img = patch[c]
        if img.ndim == 3:
            img = img[img.shape[0] // 2]
        axes[c][0].imshow(img, cmap="gray", interpolation="nearest")
        axes[c][0].set_title(f"channel {c} (shape {spatial})", fontsize=9)
        axes[c][0].axis("off")
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
