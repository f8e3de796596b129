"""Figures written next to the CSV reports."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import EvaluationReport  # noqa: E402

PSNR_CEILING = 60.0


def _finite(values):
    return [PSNR_CEILING if math.isinf(v) else v for v in values]


def plot_psnr_per_frame(curves: dict[str, EvaluationReport], path, title: str = "") -> None:
    """Per-frame PSNR of each labelled report; perfect frames are drawn at 60 dB."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for label, report in curves.items():
        frames, psnr = report.per_frame()
        ax.plot([t + 1 for t in frames], _finite(psnr), label=label, linewidth=1.0)
    ax.set_xlabel("Frame")
    ax.set_ylabel("PSNR [dB]")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_weights(w: np.ndarray, path, title: str = "") -> None:
    """Surface view of a weighting function over the projection area."""
    M, N = w.shape
    fig = plt.figure(figsize=(5, 4))
    ax = fig.add_subplot(projection="3d")
    mm, nn = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    ax.plot_surface(nn, mm, w, cmap="viridis", linewidth=0)
    ax.set_xlabel("n")
    ax.set_ylabel("m")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
