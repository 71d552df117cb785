"""Render archive files as publication-style figures.

Rendering is deterministic: the same inputs and options produce identical
image bytes, so figures can be regenerated and diffed. Empty inputs (an
archive without runs, a grid without reachable cells) produce a warning
panel instead of an error; malformed inputs raise SchemaError.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib import mlab
from matplotlib.patches import Rectangle

from .io import (SchemaError, read_archive_runs, read_grid, read_qmi,
                 read_sequence)

DPI = 150
BASE_VIOLIN_WIDTH = 0.8
DEGENERATE_SPREAD = 1e-12


def frame_cells(pairs):
    """Both matrix cells of every pair, the (i, j) one and its mirror."""
    cells = []
    for a, b in pairs:
        i, j = (a, b) if a < b else (b, a)
        cells.append((i, j))
        cells.append((j, i))
    return cells


def render_qmi(qmi_path, out_path, sequence_path=None, title=""):
    """Heatmap of the normalized mutual information on a fixed 0-1 scale.

    With a sequence document, every selected pair is framed on both sides
    of the diagonal. Returns the matrix as drawn.
    """
    _, normalized = read_qmi(qmi_path)
    n = normalized.shape[0]
    fig, ax = plt.subplots(figsize=(5.4, 4.4))
    image = ax.imshow(normalized, vmin=0.0, vmax=1.0, cmap="viridis")
    fig.colorbar(image, ax=ax, label="normalized mutual information")
    ax.set_xticks(range(n))
    ax.set_yticks(range(n))
    ax.tick_params(labelsize=7)
    ax.set_xlabel("qubit")
    ax.set_ylabel("qubit")
    if title:
        ax.set_title(title, fontsize=11)
    if sequence_path is not None:
        pairs, seq_qubits = read_sequence(sequence_path)
        if seq_qubits != n:
            raise SchemaError(
                f"{sequence_path}: sequence spans {seq_qubits} qubits, "
                f"matrix has {n}")
        for i, j in frame_cells(pairs):
            ax.add_patch(Rectangle((j - 0.5, i - 0.5), 1.0, 1.0,
                                   fill=False, edgecolor="crimson",
                                   linewidth=1.6))
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return normalized


def _warning_panel(out_path, message):
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.set_axis_off()
    ax.text(0.5, 0.5, message, ha="center", va="center",
            fontsize=11, color="0.35")
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def _panel_widths(groups):
    """Violin widths scaled to the densest distribution of one panel.

    Degenerate groups (fewer than two points, or zero spread) get the
    base width; they are drawn as flat markers, not violins.
    """
    peaks = []
    for pcts in groups:
        if pcts.size < 2 or float(np.ptp(pcts)) < DEGENERATE_SPREAD:
            peaks.append(None)
            continue
        kde = mlab.GaussianKDE(pcts)
        grid = np.linspace(float(pcts.min()), float(pcts.max()), 128)
        peaks.append(float(np.max(kde(grid))))
    top = max((p for p in peaks if p is not None), default=None)
    return [BASE_VIOLIN_WIDTH if p is None or top is None
            else BASE_VIOLIN_WIDTH * p / top
            for p in peaks]


def render_violin(archive, out_path, depths=None, labels=None):
    """Per-depth distribution panels of %E_c, one violin per family.

    Widths are comparable only within a panel; the densest violin of each
    panel takes the base width. Returns the (depth, label) keys drawn; an
    archive with no matching runs produces a warning panel and an empty
    list.
    """
    table = read_archive_runs(archive)
    if labels:
        table = {label: by_depth for label, by_depth in table.items()
                 if label in labels}
    panel_depths = sorted({d for by_depth in table.values()
                           for d in by_depth})
    if depths:
        panel_depths = [d for d in panel_depths if d in depths]
    if not table or not panel_depths:
        _warning_panel(out_path, "no optimization runs to draw")
        return []

    order = sorted(table)
    fig, axes = plt.subplots(
        1, len(panel_depths),
        figsize=(2.8 * len(panel_depths) + 0.8, 3.8),
        sharey=True, squeeze=False)
    drawn = []
    for ax, depth in zip(axes[0], panel_depths):
        groups = [(label, table[label][depth]) for label in order
                  if depth in table[label]]
        widths = _panel_widths([pcts for _, pcts in groups])
        for pos, ((label, pcts), width) in enumerate(zip(groups, widths)):
            if pcts.size >= 2 and float(np.ptp(pcts)) >= DEGENERATE_SPREAD:
                parts = ax.violinplot([pcts], positions=[pos],
                                      widths=[width], showmedians=True)
                for body in parts["bodies"]:
                    body.set_alpha(0.65)
            else:
                ax.plot([pos - 0.25, pos + 0.25],
                        [float(pcts.mean())] * 2, lw=2.0, color="C0")
            drawn.append((depth, label))
        ax.set_xticks(range(len(groups)))
        ax.set_xticklabels([label for label, _ in groups],
                           rotation=40, ha="right", fontsize=8)
        ax.set_title(f"depth {depth}", fontsize=10)
        ax.grid(axis="y", alpha=0.3)
    axes[0][0].set_ylabel("% of correlation energy")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return drawn


def render_resource(grid_path, out_path):
    """Heatmap of expected best %E_c over CNOT and restart budgets.

    Unreachable cells stay blank; each filled cell is annotated with its
    value and winning family. Returns the value matrix as drawn (restart
    budgets along rows), or None when nothing is reachable.
    """
    xs, ys, values, winners = read_grid(grid_path)
    if np.isnan(values).all():
        _warning_panel(out_path, "resource grid holds no reachable cells")
        return None
    plot = np.ma.masked_invalid(values.T)
    cmap = matplotlib.colormaps["magma"].copy()
    cmap.set_bad("0.92")
    fig, ax = plt.subplots(
        figsize=(0.75 * len(xs) + 2.6, 0.55 * len(ys) + 1.9))
    image = ax.imshow(plot, vmin=0.0, vmax=100.0, cmap=cmap,
                      origin="lower", aspect="auto")
    fig.colorbar(image, ax=ax, label="expected best %E_c")
    ax.set_xticks(range(len(xs)), labels=[str(x) for x in xs])
    ax.set_yticks(range(len(ys)), labels=[str(y) for y in ys])
    ax.set_xlabel("CNOT budget")
    ax.set_ylabel("restart budget")
    for i in range(len(xs)):
        for j in range(len(ys)):
            if math.isnan(values[i, j]):
                continue
            shade = "white" if values[i, j] < 60.0 else "black"
            ax.text(i, j, f"{values[i, j]:.0f}\n{winners[i][j][:9]}",
                    ha="center", va="center", fontsize=6, color=shade)
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return values.T
