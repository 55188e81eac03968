"""Plain-text file formats.

* vectors / embeddings: CSV, one row per item, no header
* labels: one integer per line
* affinity: first line ``n nnz``, then ``nnz`` lines ``i j value`` for the
  strict upper triangle (0-based); the lower triangle is mirrored on load
* trace and report: whitespace-separated text lines

Reals are written with 17 significant digits so that reading them back
reproduces the same doubles.
"""

from __future__ import annotations

import numpy as np

from .core import AffinityError, SparseAffinity, validate_affinity

REAL = "%.17g"


def read_vectors(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite values")
    return data


def write_vectors(path, array) -> None:
    array = np.asarray(array, dtype=np.float64)
    np.savetxt(path, np.atleast_2d(array), delimiter=",", fmt=REAL)


read_embedding = read_vectors
write_embedding = write_vectors


def read_labels(path) -> np.ndarray:
    return np.atleast_1d(np.loadtxt(path, dtype=np.int64))


def write_labels(path, labels) -> None:
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt="%d")


def write_affinity(path, P: SparseAffinity) -> None:
    rows, cols, values = P.upper()
    with open(path, "w") as fh:
        fh.write(f"{P.n} {rows.shape[0]}\n")
        for i, j, v in zip(rows.tolist(), cols.tolist(), values.tolist()):
            fh.write(f"{i} {j} {v:.17g}\n")


def read_affinity(path, validate: bool = True) -> SparseAffinity:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise AffinityError("shape", f"{path}: header must be 'n nnz'")
        n, nnz = int(header[0]), int(header[1])
        body = np.loadtxt(fh, ndmin=2) if nnz else np.empty((0, 3))
    if body.shape != (nnz, 3):
        raise AffinityError("shape", f"{path}: header announces {nnz} entries, found {body.shape[0]}")
    rows = body[:, 0].astype(np.int64)
    cols = body[:, 1].astype(np.int64)
    if np.any(rows > cols):
        raise AffinityError("shape", f"{path}: entries must lie in the upper triangle (i <= j)")
    P = SparseAffinity.from_upper(n, rows, cols, body[:, 2])
    if validate:
        validate_affinity(P)
    return P


def write_lines(path, lines) -> None:
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")
