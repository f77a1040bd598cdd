"""Bayesian optimization of high-dimensional black-box functions with low
effective dimensionality, via random linear embeddings.

The optimization loop runs in a low-dimensional box, maps candidate
points into the ambient hypercube through a random Gaussian matrix, and
models the objective with a Gaussian process whose kernel can measure
distances in the low-dimensional space, between clamped ambient images,
or between warped images that stay on the embedded subspace.
"""

from rembo.acquisition import AcqResult, expected_improvement, maximize_ei
from rembo.bench import BenchmarkConfig, run_benchmark, summarize
from rembo.geometry import (
    DegeneratePivotWarning,
    Embedding,
    back_project,
    convex_project,
    embedding_from_matrix,
    gamma_bound,
    gamma_from_matrix,
    sample_embedding,
    warp,
    warp_batch,
)
from rembo.gp import (
    Dataset,
    GpModel,
    build_model,
    fit,
    log_marginal_likelihood,
    predict,
    predict_batch,
)
from rembo.kernels import (
    DistanceMode,
    KernelFamily,
    KernelSpec,
    correlation,
    covariance_matrix,
    distance_matrix,
    effective_distance,
    effective_images,
)
from rembo.objectives import (
    HARTMANN6_ARGMIN,
    HARTMANN6_MIN,
    ObjectiveInstance,
    embed_objective,
    hartmann6,
    optimality_gap,
)
from rembo.optimizer import RunConfig, RunRecord, Seeds, initial_design, run

__all__ = [
    "AcqResult",
    "BenchmarkConfig",
    "Dataset",
    "DegeneratePivotWarning",
    "DistanceMode",
    "Embedding",
    "GpModel",
    "HARTMANN6_ARGMIN",
    "HARTMANN6_MIN",
    "KernelFamily",
    "KernelSpec",
    "ObjectiveInstance",
    "RunConfig",
    "RunRecord",
    "Seeds",
    "back_project",
    "build_model",
    "convex_project",
    "correlation",
    "covariance_matrix",
    "distance_matrix",
    "effective_distance",
    "effective_images",
    "embed_objective",
    "embedding_from_matrix",
    "expected_improvement",
    "fit",
    "gamma_bound",
    "gamma_from_matrix",
    "hartmann6",
    "initial_design",
    "log_marginal_likelihood",
    "maximize_ei",
    "optimality_gap",
    "predict",
    "predict_batch",
    "run",
    "run_benchmark",
    "sample_embedding",
    "summarize",
    "warp",
    "warp_batch",
]

__version__ = "0.1.0"
