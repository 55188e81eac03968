"""
Digits
======

5000 8x8 digit images. Parallel workers update the shared map without
locks, so the result varies slightly between runs when workers > 1.
"""
import time

from scembed import OptimizerConfig, embed, knn_graph, quality_report, symmetrize_normalize
from scembed.datasets import digits
from scembed.plotting import PlotSpec, scatter_svg

data = digits(n=5000)
P = symmetrize_normalize(knn_graph(data, 10))

for workers in (1, 4):
    start = time.perf_counter()
    Y, _, state = embed(P, OptimizerConfig(total_iterations=100, workers=workers), return_state=True)
    took = time.perf_counter() - start
    report = quality_report(P, Y, k=10, state=state, reference_labels=data.labels)
    print(f"workers={workers}  {took:.1f}s  ARI={report.ari:.3f}  density ratio={report.block_density_ratio:.0f}")

with open("digits.svg", "w") as fh:
    fh.write(scatter_svg(Y.coords, data.labels, PlotSpec(subsample_fraction=0.5)))
