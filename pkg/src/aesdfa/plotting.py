"""Figures for attack reports."""

from __future__ import annotations

import logging
import pathlib
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import AttackResult, output_positions  # noqa: E402

log = logging.getLogger(__name__)


def convergence_figure(result: AttackResult, figure_path: Union[str, pathlib.Path],
                       title: Optional[str] = None) -> pathlib.Path:
    """Candidate count of every key byte against pairs consumed, one panel per column group."""
    figure_path = pathlib.Path(figure_path)
    fig, axes = plt.subplots(2, 2, figsize=(8, 6), sharex=True, sharey=True)
    pairs = range(1, result.pairs_used + 1)
    for j, ax in enumerate(axes.flat):
        for pos in output_positions(j):
            history = result.per_byte[pos].history
            ax.step(pairs, history, where="post", label=f"byte {pos}")
        ax.set_yscale("log", base=2)
        ax.set_ylim(0.8, 300)
        ax.set_title(f"MixColumns column {j}", fontsize="medium")
        ax.legend(fontsize="small", frameon=False)
    for ax in axes[1]:
        ax.set_xlabel("pairs consumed")
    for ax in axes[:, 0]:
        ax.set_ylabel("candidates")
    fig.suptitle(title or f"AES-{result.variant} last round key: {result.status}")
    fig.tight_layout()
    figure_path.parent.mkdir(parents=True, exist_ok=True)
    log.info("saving figure to %s", figure_path)
    fig.savefig(figure_path)
    plt.close(fig)
    return figure_path


def pairs_histogram(pairs_needed: Sequence[int], figure_path: Union[str, pathlib.Path],
                    xlabel: str = "pairs per column group") -> pathlib.Path:
    """Histogram of pair counts, e.g. from a Monte-Carlo sweep."""
    figure_path = pathlib.Path(figure_path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if pairs_needed:
        lo, hi = min(pairs_needed), max(pairs_needed)
        ax.hist(pairs_needed, bins=range(lo, hi + 2), align="left", rwidth=0.85)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    fig.tight_layout()
    figure_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(figure_path)
    plt.close(fig)
    return figure_path
