"""
Scale modes
===========

Same affinity, three choices of repulsion scale. Exaggeration divides the
t-SNE scale by beta, which draws each cluster into a tighter clump.
"""
import numpy as np

from scembed import OptimizerConfig, embed, knn_graph, symmetrize_normalize
from scembed.datasets import gaussian_blobs

data = gaussian_blobs(n=600, dim=10, centers=3, seed=0)
P = symmetrize_normalize(knn_graph(data, 10))
same = data.labels[:, None] == data.labels[None, :]
np.fill_diagonal(same, False)

for mode in ("sne", "sce", "exaggerated"):
    Y, _ = embed(P, OptimizerConfig(mode=mode, beta=12.0, total_iterations=100))
    D = np.linalg.norm(Y.coords[:, None] - Y.coords[None], axis=-1)
    print(f"{mode:12s} within {D[same].mean():10.5f}   between {D[~same].mean():8.3f}")
