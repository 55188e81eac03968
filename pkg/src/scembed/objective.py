"""Exact divergences, scales and gradients for the Student-t output kernel.

These are O(N^2) reference computations. The stochastic optimizer never
calls them in its inner loop; they exist to check it and to report on
finished embeddings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import SparseAffinity

MAX_EXACT_N = 20_000


@dataclass(frozen=True)
class ObjectiveBreakdown:
    attraction: float
    repulsion: float
    constant: float
    total: float


def _coords(Y):
    Y = np.ascontiguousarray(getattr(Y, "coords", Y), dtype=np.float64)
    if Y.ndim != 2:
        raise ValueError("Y must be an (n, d) array")
    return Y


def _check_pair(P: SparseAffinity, Y: np.ndarray):
    if Y.shape[0] != P.n:
        raise ValueError(f"embedding has {Y.shape[0]} points but affinity has n={P.n}")
    if P.n > MAX_EXACT_N:
        raise ValueError(f"exact computation refused for n={P.n} > {MAX_EXACT_N}")


def student_t_kernel(y_i, y_j) -> float:
    """Return ``1 / (1 + ||y_i - y_j||^2)``."""
    y_i = np.asarray(y_i, dtype=np.float64)
    y_j = np.asarray(y_j, dtype=np.float64)
    if y_i.shape != y_j.shape:
        raise ValueError(f"dimension mismatch: {y_i.shape} vs {y_j.shape}")
    diff = y_i - y_j
    return 1.0 / (1.0 + float(diff @ diff))


@numba.njit(cache=True, nogil=True)
def _dense_q_sum(Y):
    # sum over ordered off-diagonal pairs = 2 * sum over i < j
    n, d = Y.shape
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dist = 0.0
            for k in range(d):
                diff = Y[i, k] - Y[j, k]
                dist += diff * diff
            total += 1.0 / (1.0 + dist)
    return 2.0 * total


@numba.njit(cache=True, nogil=True)
def _pair_q(Y, rows, cols):
    out = np.empty(rows.shape[0])
    d = Y.shape[1]
    for e in range(rows.shape[0]):
        i = rows[e]
        j = cols[e]
        dist = 0.0
        for k in range(d):
            diff = Y[i, k] - Y[j, k]
            dist += diff * diff
        out[e] = 1.0 / (1.0 + dist)
    return out


@numba.njit(cache=True, nogil=True)
def _dense_repulsion_grad(Y, s):
    n, d = Y.shape
    grad = np.zeros((n, d))
    for i in range(n):
        for j in range(i + 1, n):
            dist = 0.0
            for k in range(d):
                diff = Y[i, k] - Y[j, k]
                dist += diff * diff
            q = 1.0 / (1.0 + dist)
            # both orientations (i, j) and (j, i) contribute -2 s q^2 (y_i - y_j)
            c = -4.0 * s * q * q
            for k in range(d):
                g = c * (Y[i, k] - Y[j, k])
                grad[i, k] += g
                grad[j, k] -= g
    return grad


def q_sum(Y) -> float:
    """Sum of Student-t similarities over all ordered off-diagonal pairs."""
    return float(_dense_q_sum(_coords(Y)))


def _xlogx_sum(values):
    return float(np.sum(values * np.log(values)))


def i_divergence(P: SparseAffinity, Y, s: float) -> float:
    """Non-normalized KL divergence between ``P`` and ``s * q``.

    The ``P ln(P / sq) - P`` part runs over the stored entries of ``P``; the
    ``s q`` part runs over every ordered off-diagonal pair.
    """
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    Y = _coords(Y)
    _check_pair(P, Y)
    q = _pair_q(Y, P.rows, P.cols)
    sparse_part = float(np.sum(P.values * (np.log(P.values) - np.log(s * q)) - P.values))
    return sparse_part + s * q_sum(Y)


def kl_divergence(P: SparseAffinity, Y) -> float:
    """KL divergence from ``P`` to the matrix-wise normalized ``Q``."""
    Y = _coords(Y)
    _check_pair(P, Y)
    q = _pair_q(Y, P.rows, P.cols)
    log_z = math.log(q_sum(Y))
    return float(np.sum(P.values * (np.log(P.values) - np.log(q) + log_z)))


def sne_scale(Y) -> float:
    """Scale at which the I-divergence optimum coincides with t-SNE: ``1 / sum q``."""
    Y = _coords(Y)
    if Y.shape[0] < 2:
        raise ValueError("need at least two points")
    return 1.0 / q_sum(Y)


def exaggerated_scale(Y, beta: float) -> float:
    """Early-exaggeration scale ``1 / (beta * sum q)``."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    return sne_scale(Y) / beta


def cluster_weights(P: SparseAffinity, alpha: float) -> np.ndarray:
    """Sparse part of the pair weights, ``alpha * N (N - 1) * P_ij`` per stored entry.

    The full weight is this plus ``1 - alpha`` on every off-diagonal pair.
    """
    n = P.n
    return alpha * n * (n - 1) * P.values


def weight_sum(P: SparseAffinity, alpha: float) -> float:
    """Sum of ``w_ij = alpha N (N-1) P_ij + (1 - alpha)`` over all off-diagonal pairs."""
    n = P.n
    return float(np.sum(cluster_weights(P, alpha))) + (1.0 - alpha) * n * (n - 1)


def sce_scale_exact(P: SparseAffinity, Y, alpha: float) -> float:
    """Adaptive scale ``1 / sum_ij w_ij q_ij`` mixing P-weighted and uniform pairs."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    Y = _coords(Y)
    _check_pair(P, Y)
    q = _pair_q(Y, P.rows, P.cols)
    weighted = float(np.sum(cluster_weights(P, alpha) * q))
    if alpha < 1.0:
        weighted += (1.0 - alpha) * q_sum(Y)
    return 1.0 / weighted


def objective_breakdown(P: SparseAffinity, Y, s: float) -> ObjectiveBreakdown:
    """Split the I-divergence into attraction, repulsion and a q-independent constant.

    The constant assumes ``sum P = 1``, which every validated affinity satisfies.
    """
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    Y = _coords(Y)
    _check_pair(P, Y)
    q = _pair_q(Y, P.rows, P.cols)
    attraction = -float(np.sum(P.values * np.log(q)))
    repulsion = s * q_sum(Y)
    constant = -math.log(s) - 1.0 + _xlogx_sum(P.values)
    return ObjectiveBreakdown(attraction, repulsion, constant, i_divergence(P, Y, s))


def exact_gradient(P: SparseAffinity, Y, s: float) -> np.ndarray:
    """Derivative of the I-divergence with respect to every coordinate.

    Returns the true gradient (ascent direction); descent steps subtract it.
    """
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    Y = _coords(Y)
    _check_pair(P, Y)
    grad = _dense_repulsion_grad(Y, s)
    q = _pair_q(Y, P.rows, P.cols)
    # each stored entry (i, j) contributes 2 P_ij q_ij (y_i - y_j) to y_i and the
    # negation to y_j; its mirror (j, i) is stored separately.
    coef = (2.0 * P.values * q)[:, None] * (Y[P.rows] - Y[P.cols])
    np.add.at(grad, P.rows, coef)
    np.add.at(grad, P.cols, -coef)
    return grad
