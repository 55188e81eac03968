import numpy as np
import pytest

from scembed.affinity import knn_graph, symmetrize_normalize
from scembed.core import SparseAffinity
from scembed.datasets import gaussian_blobs
from scembed.objective import i_divergence
from scembed.optimizer import attraction_step, repulsion_step

ACCEPTANCE_LINES = []


def random_affinity(rng, n, density=1.0):
    """Random symmetric positive P over a random support, normalized to unit sum.

    Every item keeps at least one partner so that no row is empty.
    """
    upper = np.triu(rng.random((n, n)) < density, 1)
    for i in range(n - 1):
        if not upper[i].any() and not upper[:, i].any():
            upper[i, i + 1] = True
    r, c = np.nonzero(upper)
    v = rng.uniform(0.1, 1.0, size=r.size)
    v /= 2.0 * v.sum()
    return SparseAffinity.from_upper(n, r, c, v)


def dense(P):
    return P.to_csr().toarray()


def central_differences(P, Y, s, h=1e-5):
    fd = np.zeros_like(Y)
    for idx in np.ndindex(Y.shape):
        up = Y.copy()
        down = Y.copy()
        up[idx] += h
        down[idx] -= h
        fd[idx] = (i_divergence(P, up, s) - i_divergence(P, down, s)) / (2 * h)
    return fd


def expected_update(P, Y, s, eta):
    """Average displacement of one update unit, by enumerating both samplers' supports."""
    n = P.n
    total = np.zeros_like(Y)
    for i, j, p in zip(P.rows, P.cols, P.values):
        Z = Y.copy()
        attraction_step(Z, i, j, eta)
        total += p * (Z - Y)
    for i in range(n):
        for j in range(n):
            if i != j:
                Z = Y.copy()
                repulsion_step(Z, i, j, eta, s, n)
                total += (Z - Y) / (n * (n - 1))
    return total


def within_four_sigma(counts, probs, draws):
    sigma = np.sqrt(draws * probs * (1 - probs))
    return np.all(np.abs(counts - draws * probs) <= 4 * sigma)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blobs():
    return gaussian_blobs(n=600, dim=10, centers=3, seed=0)


@pytest.fixture(scope="session")
def blob_affinity(blobs):
    return symmetrize_normalize(knn_graph(blobs, 10))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
