"""
Drawing pairs
=============

Attractive pairs come from an alias table over the stored entries of P,
repulsive pairs uniformly from all ordered pairs. Streams are reproducible.
"""
import numpy as np

from scembed import SparseAffinity
from scembed.sampler import SplitMix64, build_alias, draw_repulsion, sample_entries

P = SparseAffinity.from_upper(4, [0, 1, 2], [1, 2, 3], [0.3, 0.15, 0.05])
table = build_alias(P)

draws = 100_000
counts = np.bincount(sample_entries(table, SplitMix64(0), draws), minlength=P.nnz)
for i, j, p, c in zip(P.rows, P.cols, P.values, counts):
    print(f"({i},{j})  target {p:.3f}  observed {c / draws:.3f}")

rng = SplitMix64(7)
print([draw_repulsion(4, rng) for _ in range(5)])
