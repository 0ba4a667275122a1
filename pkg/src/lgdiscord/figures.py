"""Figure rendering for the report outputs.

Each writer saves one PNG next to the delimited/report files the pipeline
emits. Rendering is headless (Agg) so the CLI works without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_mode_gallery(path, entries) -> None:
    """Grid of labelled intensity images; entries are (title, 2-D array)."""
    cols = 2
    rows = (len(entries) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 3.0 * rows))
    axes = np.atleast_1d(axes).ravel()
    for ax, (title, img) in zip(axes, entries):
        im = ax.imshow(np.asarray(img, dtype=float), origin="lower", cmap="inferno")
        ax.set_title(title, fontsize=9)
        ax.axis("off")
        fig.colorbar(im, ax=ax, fraction=0.046)
    for ax in axes[len(entries) :]:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_run_profiles(path, measured, expected, recovered, record) -> None:
    """Three-panel measured / expected / recovered profile comparison."""
    panels = [("measured", measured), ("expected", expected), ("recovered", recovered)]
    vmax = max(float(m.values.max()) for _, m in panels)
    fig, axes = plt.subplots(1, 3, figsize=(9.6, 3.4))
    for ax, (title, m) in zip(axes, panels):
        im = ax.imshow(m.values, origin="lower", cmap="inferno", vmin=0.0, vmax=vmax)
        ax.set_title(title, fontsize=10)
        ax.axis("off")
    fig.colorbar(im, ax=axes, fraction=0.02)
    fig.suptitle(
        f"required D = {record.required_discord:.4f}   "
        f"measured D = {record.discord_measured:.4f}   "
        f"lambda0: set {record.lambda0_set:.4f} / recovered {record.lambda0_rec:.4f}",
        fontsize=9,
    )
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_scatter(path, records) -> None:
    """Measured vs required discord with the equality diagonal."""
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    if records:
        req = [r.required_discord for r in records]
        meas = [r.discord_measured for r in records]
        ax.scatter(req, meas, s=14, alpha=0.7, label="runs")
        lim = max(max(req), max(meas), 0.01) * 1.1
    else:
        lim = 0.1
    ax.plot([0, lim], [0, lim], "k--", linewidth=1, label="equality")
    ax.set_xlabel("required discord")
    ax.set_ylabel("measured discord")
    ax.set_xlim(0, lim)
    ax.set_ylim(0, lim)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
