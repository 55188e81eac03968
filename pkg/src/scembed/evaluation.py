"""Cluster quality of an embedding, judged against the input similarities."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import adjusted_rand_score

from . import objective
from .core import ClusterReport, ScaleState, SparseAffinity


@dataclass(frozen=True)
class BlockStructure:
    permutation: np.ndarray
    cluster_sizes: np.ndarray
    within_density: float
    between_density: float

    @property
    def ratio(self) -> float:
        if self.between_density == 0:
            return np.inf
        return self.within_density / self.between_density


def kmeans(Y, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """Lloyd's k-means, best of ``restarts`` k-means++ starts by inertia.

    Empty clusters are reseeded at the point farthest from its center.
    """
    X = np.asarray(getattr(Y, "coords", Y), dtype=np.float64)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k must lie in [1, {X.shape[0]}], got {k}")
    if k == 1:
        return np.zeros(X.shape[0], dtype=np.int64)
    model = KMeans(n_clusters=k, n_init=restarts, max_iter=300, random_state=seed % (2**32))
    with warnings.catch_warnings():
        # degenerate inputs (fewer distinct points than k) are still labeled
        warnings.simplefilter("ignore", ConvergenceWarning)
        return model.fit_predict(X).astype(np.int64)


def adjusted_rand_index(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"label arrays differ in length: {a.shape[0]} vs {b.shape[0]}")
    return float(adjusted_rand_score(a, b))


def block_density(P: SparseAffinity, labels) -> BlockStructure:
    """Densities of P's nonzeros inside and outside the label blocks.

    Areas count ordered off-diagonal pairs, so a cluster of size ``c`` owns
    ``c (c - 1)`` within-block cells.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = P.n
    if labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got {labels.shape[0]}")
    _, inverse, sizes = np.unique(labels, return_inverse=True, return_counts=True)
    within_area = float(np.sum(sizes * (sizes - 1.0)))
    if within_area == 0:
        raise ValueError("every cluster is a singleton; within-cluster density is undefined")
    between_area = n * (n - 1.0) - within_area

    same = inverse[P.rows] == inverse[P.cols]
    n_within = int(np.count_nonzero(same))
    within = n_within / within_area
    between = (P.nnz - n_within) / between_area if between_area > 0 else 0.0
    permutation = np.lexsort((np.arange(n), labels))
    return BlockStructure(permutation, sizes, within, between)


def quality_report(P: SparseAffinity, Y, k: int, state: Optional[ScaleState] = None,
                   reference_labels=None, seed: int = 0, restarts: int = 10) -> ClusterReport:
    """Cluster the embedding and score it against ``P``.

    The I-divergence uses ``state``'s scale; without a state it falls back to
    the exact SCE scale with ``alpha = 0.5``.
    """
    coords = np.asarray(getattr(Y, "coords", Y), dtype=np.float64)
    labels = kmeans(coords, k, seed=seed, restarts=restarts)
    blocks = block_density(P, labels)
    s = state.s if state is not None else objective.sce_scale_exact(P, coords, 0.5)
    ari = None
    if reference_labels is not None:
        ari = adjusted_rand_index(reference_labels, labels)
    return ClusterReport(
        labels=labels,
        block_density_ratio=blocks.ratio,
        kl_divergence=objective.kl_divergence(P, coords),
        i_divergence=objective.i_divergence(P, coords, s),
        within_density=blocks.within_density,
        between_density=blocks.between_density,
        ari=ari,
    )
