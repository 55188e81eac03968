"""Input similarity construction: symmetrized k-NN adjacency and entropic affinity.

Distances are squared Euclidean throughout and neighbour search is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .core import SparseAffinity, validate_affinity

PRECISION_BOUNDS = (1e-20, 1e20)
MAX_BISECTIONS = 100
PERPLEXITY_TOL = 1e-5
DROP_THRESHOLD = 1e-12
_CHUNK = 2048


class CalibrationError(ValueError):
    """A row's target perplexity could not be reached."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class Dataset:
    rows: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError("data must be a 2-D array")
        if not np.all(np.isfinite(rows)):
            raise ValueError("data contains non-finite values")
        object.__setattr__(self, "rows", rows)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (rows.shape[0],):
                raise ValueError(f"expected {rows.shape[0]} labels, got {labels.shape[0]}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class AffinityRecipe:
    kind: str
    perplexity: float = 30.0
    k: int = 10

    def __post_init__(self):
        if self.kind not in ("entropic", "knn"):
            raise ValueError(f"unknown recipe kind {self.kind!r}")

    def build(self, data) -> SparseAffinity:
        if self.kind == "knn":
            return symmetrize_normalize(knn_graph(data, self.k))
        return entropic_affinity(data, self.perplexity)


def _as_rows(data):
    if isinstance(data, Dataset):
        return data.rows
    return Dataset(data).rows


def _sq_distances(X, start, stop, sq_norms):
    block = X[start:stop]
    d = sq_norms[start:stop, None] - 2.0 * (block @ X.T) + sq_norms[None, :]
    np.maximum(d, 0.0, out=d)
    d[np.arange(stop - start), np.arange(start, stop)] = 0.0
    return d


def knn_graph(data, k: int) -> sp.csr_matrix:
    """Directed 0/1 adjacency linking each point to its ``k`` nearest others.

    Ties go to the lower index.
    """
    X = _as_rows(data)
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n={n}, got {k}")
    sq_norms = np.einsum("ij,ij->i", X, X)
    indices = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d = _sq_distances(X, start, stop, sq_norms)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        # stable sort keeps lower indices first among equal distances
        indices[start:stop] = np.argsort(d, axis=1, kind="stable")[:, :k]
    indptr = np.arange(0, n * k + 1, k)
    return sp.csr_matrix((np.ones(n * k), indices.ravel(), indptr), shape=(n, n))


def symmetrize_normalize(adj) -> SparseAffinity:
    """Logical-OR symmetrization of a directed adjacency, scaled to unit sum."""
    adj = sp.csr_matrix(adj)
    if adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency must be square")
    if adj.diagonal().any():
        raise ValueError("adjacency must have a zero diagonal")
    b = ((adj != 0) + (adj.T != 0)).astype(np.float64).tocsr()
    b.eliminate_zeros()
    if b.nnz == 0:
        raise ValueError("adjacency has no edges")
    b.data[:] = 1.0 / b.nnz
    P = SparseAffinity.from_sparse(b)
    validate_affinity(P)
    return P


def _row_entropy_bits(d, beta):
    """Perplexity bookkeeping for one row: returns (probabilities, entropy in bits)."""
    logits = -beta * d
    logits -= logits.max()
    w = np.exp(logits)
    z = w.sum()
    p = w / z
    nats = np.log(z) - np.sum(p * logits)
    return p, nats / np.log(2.0)


def entropic_row(distances, perplexity: float) -> np.ndarray:
    """Gaussian conditional probabilities with the bandwidth set by perplexity.

    Parameters
    ----------
    distances : array of shape (m,)
        Squared distances from one point to the ``m`` others.
    perplexity : float
        Target ``2 ** H`` with ``H`` the row entropy in bits.

    Returns
    -------
    p : array of shape (m,)
        ``p_j ∝ exp(-beta * d_j)`` summing to one, where the precision
        ``beta = 1 / (2 sigma^2)`` is found by geometric bisection.

    Raises
    ------
    CalibrationError
        If ``perplexity >= m + 1`` or the target cannot be reached.
    """
    d = np.asarray(distances, dtype=np.float64)
    m = d.shape[0]
    if not 0 < perplexity < m + 1:
        raise CalibrationError(f"perplexity {perplexity} must lie in (0, {m + 1})")
    d = d - d.min()
    target = np.log2(perplexity)
    tol = PERPLEXITY_TOL / (perplexity * np.log(2.0))

    lo, hi = np.log(PRECISION_BOUNDS[0]), np.log(PRECISION_BOUNDS[1])
    best_p, best_err = None, np.inf
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        p, h = _row_entropy_bits(d, np.exp(mid))
        err = abs(h - target)
        if err < best_err:
            best_p, best_err = p, err
        if err < tol:
            return p
        # entropy falls as precision grows
        if h > target:
            lo = mid
        else:
            hi = mid
    closest = perplexity_of(best_p)[0]
    if abs(closest - perplexity) < PERPLEXITY_TOL:
        return best_p
    raise CalibrationError(f"perplexity {perplexity} unreachable, closest was {closest:.6g}")


def _row_perplexities(X, perplexity):
    """Calibrated conditional rows as a dense (n, n) array with zero diagonal."""
    n = X.shape[0]
    if not 0 < perplexity < n:
        raise CalibrationError(f"perplexity {perplexity} must lie in (0, {n})")
    sq_norms = np.einsum("ij,ij->i", X, X)
    cond = np.zeros((n, n))
    others = np.ones(n, dtype=bool)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        block = _sq_distances(X, start, stop, sq_norms)
        for r in range(stop - start):
            i = start + r
            others[i] = False
            try:
                cond[i, others] = entropic_row(block[r, others], perplexity)
            except CalibrationError as exc:
                raise CalibrationError(str(exc), row=i) from None
            others[i] = True
    return cond


def conditional_affinity(data, perplexity: float = 30.0) -> np.ndarray:
    """Dense matrix whose row ``i`` holds the calibrated ``P_{j|i}``."""
    return _row_perplexities(_as_rows(data), perplexity)


def entropic_affinity(data, perplexity: float = 30.0) -> SparseAffinity:
    """Symmetric entropic affinity ``(P_{j|i} + P_{i|j}) / (2N)``.

    Entries below ``1e-12`` are dropped and the remainder renormalized.
    """
    X = _as_rows(data)
    n = X.shape[0]
    cond = _row_perplexities(X, perplexity)
    joint = (cond + cond.T) / (2.0 * n)
    np.fill_diagonal(joint, 0.0)
    joint[joint < DROP_THRESHOLD] = 0.0
    r, c = np.nonzero(np.triu(joint, 1))
    v = joint[r, c]
    v = v / (2.0 * v.sum())
    P = SparseAffinity.from_upper(n, r, c, v)
    validate_affinity(P)
    return P


def perplexity_of(rows) -> np.ndarray:
    """``2 ** H`` (bits) of each row of a row-stochastic array."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(rows > 0, rows * np.log2(rows), 0.0)
    return 2.0 ** (-terms.sum(axis=1))
