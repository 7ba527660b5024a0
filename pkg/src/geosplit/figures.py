"""Matplotlib rendering of report data to image files.

The CLI report commands call these when ``--figures`` is passed, writing PNGs
next to the delimited outputs. All figures are drawn from the same data the
CSV/JSON exports carry; PNG metadata is stripped so repeated runs produce
identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SET_COLORS = {"train": "tab:green", "val": "tab:orange", "test": "tab:red"}
_SAVE_KW = dict(dpi=120, bbox_inches="tight", metadata={"Software": None})


def save_distance_curve_figure(curve, path) -> None:
    """Overlap ratio against distance threshold for val and test."""
    fig, ax = plt.subplots(figsize=(6, 4))
    thresholds = [entry[0] for entry in curve]
    for idx, name in ((1, "val"), (2, "test")):
        ratios = [entry[idx] for entry in curve]
        if all(r is None for r in ratios):
            continue
        ax.plot(thresholds, [0.0 if r is None else r for r in ratios],
                marker="o", markersize=3, label=name, color=_SET_COLORS[name])
    ax.set_xlabel("distance to nearest train sample [m]")
    ax.set_ylabel("ratio of samples within distance")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_heatmap_figure(heatmap: dict, path) -> None:
    """Sample counts per cell for one map (from spatial.heatmap_export)."""
    counts = np.asarray(heatmap["counts"])
    cs = heatmap["cell_size"]
    i0, j0 = heatmap["i0"], heatmap["j0"]
    fig, ax = plt.subplots(figsize=(6, 5))
    extent = (i0 * cs, (i0 + counts.shape[0]) * cs, j0 * cs, (j0 + counts.shape[1]) * cs)
    im = ax.imshow(counts.T, origin="lower", extent=extent, aspect="equal",
                   interpolation="nearest", cmap="viridis")
    fig.colorbar(im, ax=ax, label="samples per cell")
    ax.set_title(heatmap["map_id"])
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_balance_figure(balance, path) -> None:
    """Per-set attribute ratios as bars with a dashed full-dataset line."""
    attrs = [a for a in balance.attributes if a.ratios]
    if not attrs:
        fig, ax = plt.subplots(figsize=(4, 2))
        ax.text(0.5, 0.5, "no attributes", ha="center", va="center")
        ax.axis("off")
        fig.savefig(path, **_SAVE_KW)
        plt.close(fig)
        return
    fig, axes = plt.subplots(1, len(attrs), figsize=(4 * len(attrs), 3.5), squeeze=False)
    sets = ("train", "val", "test")
    for ax, attr in zip(axes[0], attrs):
        values = list(attr.ratios)
        width = 0.8 / len(sets)
        for si, name in enumerate(sets):
            heights = [attr.ratios[v].get(name) or 0.0 for v in values]
            offsets = [i + (si - 1) * width for i in range(len(values))]
            ax.bar(offsets, heights, width=width, label=name, color=_SET_COLORS[name])
        for i, v in enumerate(values):
            full = attr.ratios[v].get("full")
            if full is not None:
                ax.hlines(full, i - 0.45, i + 0.45, colors="black", linestyles="dashed",
                          linewidth=1.0)
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels(values, rotation=20)
        ax.set_ylim(0, 1.05)
        ax.set_title(attr.key)
        ax.set_ylabel("ratio within set")
    axes[0][0].legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_eval_figure(report, path) -> None:
    """Per-class AP at each Chamfer threshold."""
    fig, ax = plt.subplots(figsize=(6, 4))
    classes = [c for c in report.ap if any(a is not None for a in report.ap[c])]
    width = 0.8 / max(1, len(report.thresholds))
    for ti, tau in enumerate(report.thresholds):
        heights = [report.ap[c][ti] or 0.0 for c in classes]
        offsets = [i + (ti - (len(report.thresholds) - 1) / 2) * width
                   for i in range(len(classes))]
        ax.bar(offsets, heights, width=width, label=f"{tau:g} m")
    ax.set_xticks(range(len(classes)))
    ax.set_xticklabels(classes)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("AP")
    ax.legend(title="threshold")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
