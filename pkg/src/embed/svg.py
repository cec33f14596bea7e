"""
SVG figures drawn with matplotlib: node scatter plots and line charts.

Rendering uses the Agg backend with a fixed svg.hashsalt and no Date
metadata, so the same inputs always produce the same bytes.
"""

import io
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.utils.errors import ValidationError  # noqa: E402
from src.utils.file_manager import FileManager  # noqa: E402

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
DEFAULT_COLOR = PALETTE[0]
MARGIN = 0.05
NODE_GROUP = "nodes"
SVG_HASH_SALT = "featnet"
SVG_RC = {"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}


def _save(fig, path) -> Path:
    buffer = io.BytesIO()
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    return FileManager.atomic_write_bytes(path, buffer.getvalue())


def label_color(label: int) -> str:
    return PALETTE[int(label) % len(PALETTE)]


def node_groups(n: int, labels: Optional[Sequence[int]] = None):
    """
    Split node indices by group id.

    Returns:
        list: (group id, color, node indices); group id is None without labels
    """
    if labels is None or not len(labels):
        return [(None, DEFAULT_COLOR, np.arange(n))]
    labels = np.asarray(labels, dtype=np.int64)
    return [(int(g), label_color(g), np.flatnonzero(labels == g)) for g in np.unique(labels)]


def scatter_svg(coords: np.ndarray, path, labels: Optional[Sequence[int]] = None,
                title: Optional[str] = None) -> Path:
    """
    Write one circular marker per node, colored by group id.

    Each group is drawn as its own line with gid "nodes" (no labels) or
    "nodes-<group id>". Axis limits carry a 5% margin around the data.

    Args:
        coords: n x 2 coordinates
        path: Output file
        labels: Optional group id per node; none gives a single color
        title: Optional figure title

    Returns:
        Path: The written file
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] < 2 or coords.shape[0] < 1:
        raise ValidationError(f"Scatter needs n x 2 coordinates, got shape {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise ValidationError("Coordinates must be finite")
    if labels is not None and len(labels) and len(labels) != coords.shape[0]:
        raise ValidationError(f"{len(labels)} labels for {coords.shape[0]} points")

    fig, ax = plt.subplots(figsize=(6.4, 6.4))
    ax.margins(MARGIN)
    ax.set_axis_off()
    for group, color, members in node_groups(coords.shape[0], labels):
        ax.plot(
            coords[members, 0], coords[members, 1],
            linestyle="none", marker="o", markersize=5,
            markerfacecolor=color, markeredgewidth=0, color=color,
            gid=NODE_GROUP if group is None else f"{NODE_GROUP}-{group}",
        )
    if title:
        ax.set_title(title)
    return _save(fig, path)


def line_chart_svg(x: np.ndarray, series: dict, path, title: Optional[str] = None,
                   xlabel: str = "log(1 + theta)") -> Path:
    """
    Write one line per named series over a shared x axis.

    Args:
        x: Shared abscissa
        series: Mapping name -> y values; the name is also the line's gid
        path: Output file
        title: Optional chart title
        xlabel: x axis label

    Returns:
        Path: The written file
    """
    x = np.asarray(x, dtype=np.float64)
    ys = {name: np.asarray(values, dtype=np.float64) for name, values in series.items()}
    if not ys or any(v.shape != x.shape for v in ys.values()):
        raise ValidationError("Every series must match the x axis length")

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for index, (name, values) in enumerate(ys.items()):
        ax.plot(x, values, color=PALETTE[index % len(PALETTE)], label=name, gid=name)
    ax.set_xlabel(xlabel)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
