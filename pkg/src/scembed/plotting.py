"""Minimal SVG renderers for embeddings and reordered similarity matrices."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

import numpy as np

from .core import SparseAffinity
from .evaluation import block_density

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
)
DEFAULT_COLOR = "#1f3a93"
MARGIN = 10.0


@dataclass(frozen=True)
class PlotSpec:
    width: int = 800
    height: int = 800
    point_radius: float = 1.0
    color_by_label: bool = True
    subsample_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("canvas dimensions must be positive")
        if not 0.0 < self.subsample_fraction <= 1.0:
            raise ValueError("subsample_fraction must lie in (0, 1]")
        if self.point_radius <= 0:
            raise ValueError("point_radius must be positive")


def _subsample(n, spec):
    if spec.subsample_fraction >= 1.0:
        return np.arange(n)
    rng = np.random.default_rng(spec.seed)
    keep = max(1, int(round(spec.subsample_fraction * n)))
    return np.sort(rng.choice(n, size=keep, replace=False))


def canvas_positions(coords, width, height, margin=MARGIN):
    """Map 2-D coordinates into the canvas, same scale on both axes, centered.

    The SVG y axis points down, so the data y axis is flipped.
    """
    coords = np.asarray(coords, dtype=np.float64)[:, :2]
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    span = hi - lo
    inner_w, inner_h = width - 2 * margin, height - 2 * margin
    limits = [inner_w / span[0] if span[0] > 0 else np.inf,
              inner_h / span[1] if span[1] > 0 else np.inf]
    scale = min(limits)
    if not np.isfinite(scale):
        scale = 0.0
    center = (lo + hi) / 2.0
    x = width / 2.0 + (coords[:, 0] - center[0]) * scale
    y = height / 2.0 - (coords[:, 1] - center[1]) * scale
    return np.column_stack([x, y])


def _svg(width, height, body):
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
    )
    return head + "".join(body) + "</svg>\n"


def scatter_svg(coords, labels=None, spec: PlotSpec = PlotSpec()) -> str:
    """One circle per (subsampled) point, colored by label when requested."""
    coords = np.asarray(coords, dtype=np.float64)
    n = coords.shape[0]
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (n,):
            raise ValueError(f"expected {n} labels, got {labels.shape[0]}")
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(n)])
    idx = _subsample(n, spec)
    pos = canvas_positions(coords, spec.width, spec.height)
    body = []
    for k in idx:
        if spec.color_by_label and labels is not None:
            color = PALETTE[labels[k] % len(PALETTE)]
        else:
            color = DEFAULT_COLOR
        body.append(
            f'<circle cx="{pos[k, 0]:.2f}" cy="{pos[k, 1]:.2f}" r="{spec.point_radius:g}" '
            f"fill={quoteattr(color)}/>\n"
        )
    return _svg(spec.width, spec.height, body)


def spy_svg(P: SparseAffinity, labels, spec: PlotSpec = PlotSpec()) -> str:
    """Nonzeros of P with rows and columns sorted by cluster label.

    Cluster boundaries are drawn as thin grey lines. Subsampling keeps a
    uniform subset of items (rows and columns alike).
    """
    blocks = block_density(P, labels)
    n = P.n
    kept = np.zeros(n, dtype=bool)
    kept[_subsample(n, spec)] = True
    # position of each item in the reordered, subsampled matrix
    order = blocks.permutation[kept[blocks.permutation]]
    rank = np.full(n, -1, dtype=np.int64)
    rank[order] = np.arange(order.size)
    m = order.size

    sx = (spec.width - 2 * MARGIN) / m
    sy = (spec.height - 2 * MARGIN) / m
    body = []
    _, counts = np.unique(np.asarray(labels)[order], return_counts=True)
    edges = np.cumsum(counts)[:-1]
    for e in edges:
        x = MARGIN + e * sx
        y = MARGIN + e * sy
        body.append(f'<line x1="{x:.2f}" y1="{MARGIN}" x2="{x:.2f}" y2="{spec.height - MARGIN}" '
                    'stroke="#cccccc" stroke-width="0.5"/>\n')
        body.append(f'<line x1="{MARGIN}" y1="{y:.2f}" x2="{spec.width - MARGIN}" y2="{y:.2f}" '
                    'stroke="#cccccc" stroke-width="0.5"/>\n')
    r, c = rank[P.rows], rank[P.cols]
    visible = (r >= 0) & (c >= 0)
    for i, j in zip(r[visible].tolist(), c[visible].tolist()):
        body.append(
            f'<circle cx="{MARGIN + (j + 0.5) * sx:.2f}" cy="{MARGIN + (i + 0.5) * sy:.2f}" '
            f'r="{spec.point_radius:g}" fill="{DEFAULT_COLOR}"/>\n'
        )
    return _svg(spec.width, spec.height, body)
