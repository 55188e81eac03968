"""Stochastic cluster embedding of sparse similarity matrices."""

from .affinity import (
    AffinityRecipe,
    CalibrationError,
    Dataset,
    entropic_affinity,
    entropic_row,
    knn_graph,
    symmetrize_normalize,
)
from .core import (
    AffinityError,
    ClusterReport,
    Embedding,
    OptimizerConfig,
    ScaleState,
    SparseAffinity,
    validate_affinity,
)
from .evaluation import adjusted_rand_index, block_density, kmeans, quality_report
from .objective import (
    exact_gradient,
    exaggerated_scale,
    i_divergence,
    kl_divergence,
    objective_breakdown,
    sce_scale_exact,
    sne_scale,
    student_t_kernel,
)
from .optimizer import embed, embed_exact

__version__ = "0.1.0"
