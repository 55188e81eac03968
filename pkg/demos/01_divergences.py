"""
The I-divergence and its scale
==============================

Three points, uniform affinity. The non-normalized divergence depends on a
scale s; its minimum over s is the ordinary KL divergence.
"""
import numpy as np

from scembed import SparseAffinity, objective

n = 3
P = SparseAffinity.from_entries(n, [(i, j, 1 / 6) for i in range(n) for j in range(n) if i != j])
Y = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

print("KL:", objective.kl_divergence(P, Y))
s_best = objective.sne_scale(Y)
for s in (0.1, 0.25, s_best, 0.5, 1.0):
    print(f"s={s:.4f}  I-div={objective.i_divergence(P, Y, s):.10f}")

# Split into the part that pulls neighbours together and the part that pushes
# everything apart.
parts = objective.objective_breakdown(P, Y, 1.0)
print(parts)

# With a uniform P every alpha gives the same scale. Put the weight on one
# pair and the scale shrinks as alpha grows, since that pair is the closest.
P = SparseAffinity.from_upper(n, [0, 0, 1], [1, 2, 2], [0.4, 0.05, 0.05])
Y = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 3.0]])
for alpha in (0.0, 0.5, 1.0):
    print(alpha, objective.sce_scale_exact(P, Y, alpha))
