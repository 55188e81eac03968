"""Shared domain types for the embedding pipeline.

All index arrays are 0-based. Pairwise sums run over off-diagonal pairs only.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp

NORMALIZATION_TOL = 1e-9

Mode = Literal["sce", "sne", "exaggerated"]
MODES = ("sce", "sne", "exaggerated")


class AffinityError(ValueError):
    """A similarity matrix violates one of the SparseAffinity invariants.

    ``invariant`` names the violated property: one of ``"shape"``,
    ``"diagonal"``, ``"negative"``, ``"duplicate"``, ``"asymmetric"``,
    ``"normalization"``.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant


@dataclass(frozen=True)
class SparseAffinity:
    """Normalized input similarity matrix in coordinate form.

    Both orientations ``(i, j)`` and ``(j, i)`` are stored. Construction does
    not validate; call :func:`validate_affinity` (the loaders and builders in
    this package always do).
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", np.ascontiguousarray(self.rows, dtype=np.int64))
        object.__setattr__(self, "cols", np.ascontiguousarray(self.cols, dtype=np.int64))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float64))
        for arr in (self.rows, self.cols, self.values):
            arr.setflags(write=False)

    @classmethod
    def from_entries(cls, n, entries):
        """Build from an iterable of ``(i, j, value)`` triples, taken as given."""
        entries = list(entries)
        if not entries:
            return cls(n, np.empty(0), np.empty(0), np.empty(0))
        i, j, v = zip(*entries)
        return cls(n, np.array(i), np.array(j), np.array(v, dtype=np.float64))

    @classmethod
    def from_upper(cls, n, rows, cols, values):
        """Mirror strictly-upper-triangle entries into a symmetric matrix."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        return cls(
            n,
            np.concatenate([rows, cols]),
            np.concatenate([cols, rows]),
            np.concatenate([values, values]),
        )

    @classmethod
    def from_sparse(cls, matrix):
        coo = sp.coo_matrix(matrix)
        order = np.lexsort((coo.col, coo.row))
        return cls(coo.shape[0], coo.row[order], coo.col[order], coo.data[order])

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    def upper(self):
        """Entries with ``i < j`` as ``(rows, cols, values)``, sorted by row then column."""
        mask = self.rows < self.cols
        r, c, v = self.rows[mask], self.cols[mask], self.values[mask]
        order = np.lexsort((c, r))
        return r[order], c[order], v[order]

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, (self.rows, self.cols)), shape=(self.n, self.n))


def validate_affinity(P: SparseAffinity) -> None:
    """Check every SparseAffinity invariant, raising on the first violation.

    Raises
    ------
    AffinityError
        With ``invariant`` set to the failed check.
    """
    n = P.n
    rows, cols, values = P.rows, P.cols, P.values
    if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
        raise AffinityError("shape", "rows, cols and values must be equal-length vectors")
    if n < 2:
        raise AffinityError("shape", f"need at least 2 items, got n={n}")
    if values.size == 0:
        raise AffinityError("normalization", "affinity has no entries")
    if rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n:
        raise AffinityError("shape", f"entry index outside [0, {n})")
    diag = np.flatnonzero(rows == cols)
    if diag.size:
        k = diag[0]
        raise AffinityError("diagonal", f"diagonal entry ({rows[k]}, {cols[k]})")
    bad = np.flatnonzero(~(values > 0) | ~np.isfinite(values))
    if bad.size:
        k = bad[0]
        raise AffinityError(
            "negative", f"entry ({rows[k]}, {cols[k]}) = {values[k]!r} is not a positive real"
        )

    keys = rows * n + cols
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    dup = np.flatnonzero(np.diff(sorted_keys) == 0)
    if dup.size:
        k = order[dup[0]]
        raise AffinityError("duplicate", f"entry ({rows[k]}, {cols[k]}) stored twice")

    mirror = cols * n + rows
    pos = np.searchsorted(sorted_keys, mirror)
    pos = np.minimum(pos, sorted_keys.size - 1)
    found = sorted_keys[pos] == mirror
    missing = np.flatnonzero(~found)
    if missing.size:
        k = missing[0]
        raise AffinityError("asymmetric", f"entry ({rows[k]}, {cols[k]}) has no mirror")
    mismatch = np.flatnonzero(values[order[pos]] != values)
    if mismatch.size:
        k = mismatch[0]
        raise AffinityError(
            "asymmetric",
            f"P[{rows[k]}, {cols[k]}] = {values[k]!r} but "
            f"P[{cols[k]}, {rows[k]}] = {values[order[pos[k]]]!r}",
        )

    total = float(np.sum(values))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise AffinityError("normalization", f"entries sum to {total!r}, expected 1")


@dataclass
class Embedding:
    """Mapped coordinates, one row per item."""

    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if self.coords.ndim != 2:
            raise ValueError("coords must be a 2-D array")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("embedding contains non-finite coordinates")

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class ScaleState:
    """Running estimate of the inverse scale and the current epoch's accumulators.

    ``xi`` is the weighted sum of observed q values and ``omega`` the
    matching weight count.
    """

    s_inv: float
    xi: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if not self.s_inv > 0 or not np.isfinite(self.s_inv):
            raise ValueError(f"s_inv must be a positive finite real, got {self.s_inv!r}")
        if self.xi < 0 or self.omega < 0:
            raise ValueError("accumulators must be nonnegative")
        if self.omega == 0 and self.xi != 0:
            raise ValueError("xi must be 0 when omega is 0")

    @property
    def s(self) -> float:
        return 1.0 / self.s_inv

    def replace(self, **changes) -> "ScaleState":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`scembed.optimizer.embed`.

    ``beta`` is only read in ``"exaggerated"`` mode; ``alpha`` only in
    ``"sce"`` mode.
    """

    alpha: float = 0.5
    mode: Mode = "sce"
    beta: float = 1.0
    total_iterations: int = 100
    base_step: float = 1.0
    workers: int = 1
    seed: int = 0
    output_dim: int = 2
    trace_every: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta < 1.0:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if self.total_iterations < 0:
            raise ValueError("total_iterations must be nonnegative")
        if not self.base_step > 0:
            raise ValueError("base_step must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.output_dim < 1:
            raise ValueError("output_dim must be >= 1")
        if self.trace_every < 0:
            raise ValueError("trace_every must be nonnegative")

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.mode == "sce" else 0.0

    @property
    def scale_multiplier(self) -> float:
        return self.beta if self.mode == "exaggerated" else 1.0


@dataclass
class ClusterReport:
    labels: np.ndarray
    block_density_ratio: float
    kl_divergence: float
    i_divergence: float
    within_density: float = field(default=np.nan)
    between_density: float = field(default=np.nan)
    ari: Optional[float] = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if not self.block_density_ratio > 0:
            raise ValueError("block_density_ratio must be positive")

    def to_lines(self) -> list[str]:
        lines = [
            f"n {self.labels.shape[0]}",
            f"clusters {np.unique(self.labels).size}",
            f"within_density {self.within_density:.17g}",
            f"between_density {self.between_density:.17g}",
            f"block_density_ratio {self.block_density_ratio:.17g}",
            f"kl_divergence {self.kl_divergence:.17g}",
            f"i_divergence {self.i_divergence:.17g}",
        ]
        if self.ari is not None:
            lines.append(f"ari {self.ari:.17g}")
        return lines
