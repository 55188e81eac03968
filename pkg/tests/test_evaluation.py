from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scembed.core import OptimizerConfig, ScaleState, SparseAffinity
from scembed.evaluation import adjusted_rand_index, block_density, kmeans, quality_report
from scembed.optimizer import embed


def ari_from_contingency(a, b):
    """Hubert-Arabie ARI written out from pair counts."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    ua, ub = np.unique(a), np.unique(b)
    table = np.array([[np.sum((a == x) & (b == y)) for y in ub] for x in ua])
    index = sum(comb(int(v), 2) for v in table.ravel())
    rows = sum(comb(int(v), 2) for v in table.sum(1))
    cols = sum(comb(int(v), 2) for v in table.sum(0))
    expected = rows * cols / comb(n, 2)
    maximum = (rows + cols) / 2
    if maximum == expected:
        return 1.0
    return (index - expected) / (maximum - expected)


def two_blocks():
    # items {0, 1} and {2, 3}, P supported only inside the blocks
    return SparseAffinity.from_upper(4, [0, 2], [1, 3], [0.25, 0.25])


class TestARI:
    def test_identical(self):
        assert adjusted_rand_index([0, 0, 1, 2], [0, 0, 1, 2]) == 1.0

    def test_relabeled(self):
        assert adjusted_rand_index([0, 0, 1, 1, 2], [5, 5, 3, 3, 9]) == pytest.approx(1.0)

    def test_pinned(self):
        # pair counts: index 0, row and column sums 2 each, C(4,2) = 6
        assert ari_from_contingency([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
        assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([0, 1], [0, 1, 1])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=3, max_size=30), st.randoms())
    def test_against_contingency_oracle(self, a, rnd):
        b = [rnd.randint(0, 2) for _ in a]
        assert adjusted_rand_index(a, b) == pytest.approx(ari_from_contingency(a, b), abs=1e-12)
        assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_index(b, a), abs=1e-12)


class TestKmeans:
    def test_single_cluster(self, rng):
        assert np.all(kmeans(rng.normal(size=(20, 2)), 1) == 0)

    def test_two_groups(self):
        Y = np.array([[0.0, 0.0]] * 5 + [[10.0, 10.0]] * 5)
        labels = kmeans(Y, 2)
        assert adjusted_rand_index(labels, [0] * 5 + [1] * 5) == 1.0

    def test_deterministic(self, rng):
        Y = rng.normal(size=(100, 2))
        np.testing.assert_array_equal(kmeans(Y, 4, seed=3), kmeans(Y, 4, seed=3))

    def test_too_many_clusters(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((3, 2)), 4)

    def test_blobs(self, blobs):
        assert adjusted_rand_index(kmeans(blobs.rows, 3), blobs.labels) >= 0.95


class TestBlockDensity:
    def test_block_diagonal(self):
        b = block_density(two_blocks(), [0, 0, 1, 1])
        assert b.between_density == 0.0
        assert b.within_density == 1.0
        assert b.ratio == np.inf
        assert b.cluster_sizes.tolist() == [2, 2]

    def test_single_cluster(self):
        P = two_blocks()
        b = block_density(P, [0, 0, 0, 0])
        assert b.within_density == pytest.approx(4 / 12)
        assert b.between_density == 0.0

    def test_mixed(self):
        b = block_density(two_blocks(), [0, 1, 0, 1])
        assert b.within_density == 0.0
        assert b.between_density == pytest.approx(4 / 8)

    def test_all_singletons(self):
        with pytest.raises(ValueError):
            block_density(two_blocks(), [0, 1, 2, 3])

    def test_permutation(self):
        b = block_density(two_blocks(), [1, 0, 1, 0])
        assert b.permutation.tolist() == [1, 3, 0, 2]

    def test_relabel_invariance(self, blob_affinity, blobs):
        a = block_density(blob_affinity, blobs.labels)
        b = block_density(blob_affinity, (blobs.labels + 1) % 3 + 7)
        assert (a.within_density, a.between_density) == (b.within_density, b.between_density)

    def test_ground_truth_blocks(self, blob_affinity, blobs):
        b = block_density(blob_affinity, blobs.labels)
        assert b.within_density > 0 and b.between_density == 0


class TestReport:
    def test_blobs(self, blob_affinity, blobs):
        Y, _, state = embed(blob_affinity, OptimizerConfig(total_iterations=30), return_state=True)
        report = quality_report(blob_affinity, Y, 3, state=state, reference_labels=blobs.labels)
        assert report.block_density_ratio > 1
        assert report.ari >= 0.95
        assert report.kl_divergence >= 0 and report.i_divergence >= 0
        if np.isfinite(report.block_density_ratio):
            assert report.block_density_ratio == pytest.approx(report.within_density / report.between_density)

    def test_coincident(self, blob_affinity, blobs):
        report = quality_report(blob_affinity, np.zeros((600, 2)), 3, state=ScaleState(1000.0),
                                reference_labels=blobs.labels)
        assert abs(report.ari) < 0.05
        assert report.labels.shape == (600,)

    def test_without_state(self, blob_affinity):
        Y, _ = embed(blob_affinity, OptimizerConfig(total_iterations=5))
        report = quality_report(blob_affinity, Y, 3)
        assert report.ari is None
        assert np.isfinite(report.i_divergence)
