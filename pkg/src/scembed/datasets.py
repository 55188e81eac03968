"""Synthetic and bundled datasets used by the demos and tests."""

from __future__ import annotations

import numpy as np

from .affinity import Dataset


def gaussian_blobs(n: int = 600, dim: int = 10, centers: int = 3, separation: float = 10.0,
                   std: float = 1.0, seed: int = 0) -> Dataset:
    """Isotropic Gaussian clusters of (nearly) equal size.

    Centers are drawn uniformly from a cube of side ``2 * separation``.
    """
    rng = np.random.default_rng(seed)
    means = rng.uniform(-separation, separation, size=(centers, dim))
    labels = np.arange(n) % centers
    rows = means[labels] + std * rng.standard_normal((n, dim))
    return Dataset(rows, labels)


def digits(n: int = 5000, noise: float = 1.0, seed: int = 0) -> Dataset:
    """Handwritten-digit images, padded out to ``n`` samples by small distortions.

    The 1797 scikit-learn 8x8 digits are kept as they are; further samples are
    random originals with Gaussian pixel noise of standard deviation ``noise``
    (pixel range is 0 to 16).
    """
    from sklearn.datasets import load_digits

    base = load_digits()
    images = base.images.astype(np.float64)
    labels = base.target.astype(np.int64)
    if n <= len(images):
        return Dataset(images[:n].reshape(n, -1), labels[:n])

    rng = np.random.default_rng(seed)
    extra = n - len(images)
    picks = rng.integers(0, len(images), size=extra)
    out = images[picks] + rng.normal(0.0, noise, size=(extra, 8, 8))
    np.clip(out, 0.0, 16.0, out=out)
    rows = np.concatenate([images.reshape(len(images), -1), out.reshape(extra, -1)])
    return Dataset(rows, np.concatenate([labels, labels[picks]]))
