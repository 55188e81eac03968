"""
Three blobs, end to end
=======================

Build a k-NN affinity, embed it, then cluster the map and check that the
clusters agree with both the truth and the affinity's block structure.
"""
from scembed import OptimizerConfig, embed, knn_graph, objective, quality_report, symmetrize_normalize
from scembed.datasets import gaussian_blobs
from scembed.plotting import scatter_svg, spy_svg

data = gaussian_blobs(n=600, dim=10, centers=3, seed=0)
P = symmetrize_normalize(knn_graph(data, 10))
print("items", P.n, "stored entries", P.nnz)

Y, trace, state = embed(P, OptimizerConfig(total_iterations=100, trace_every=25), return_state=True)
for record in trace:
    if record.i_divergence is not None:
        print(record)

report = quality_report(P, Y, k=3, state=state, reference_labels=data.labels)
print("\n".join(report.to_lines()))

with open("blobs.svg", "w") as fh:
    fh.write(scatter_svg(Y.coords, report.labels))
with open("blobs_spy.svg", "w") as fh:
    fh.write(spy_svg(P, report.labels))

# The learned scale is below 1 / sum q: repulsion is weaker than in t-SNE.
print("s =", state.s, "  1/sum q =", objective.sne_scale(Y))
