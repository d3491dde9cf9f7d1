"""Sum-of-norms convex clustering with a semismooth Newton augmented Lagrangian solver."""

import os

__version__ = "0.1.0"

# SONCLUST_NUM_THREADS caps BLAS/OpenMP pools; must be set before numpy loads them
_threads = os.environ.get("SONCLUST_NUM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .graph import WeightedGraph, apply_B, apply_B_adjoint, build_knn_graph, laplacian  # noqa: E402
from .iadmm import AdmmConfig, iadmm_run  # noqa: E402
from .path import ClusteringPath, PathConfig, clustering_path, extract_clusters  # noqa: E402
from .problem import KKTResidual, Problem, SolveResult, kkt_residuals  # noqa: E402
from .prox import WeightedNormSpec  # noqa: E402
from .ssnal import SolverConfig, solve  # noqa: E402
from .ssncg import NewtonConfig  # noqa: E402

__all__ = [
    "__version__",
    "WeightedGraph",
    "build_knn_graph",
    "apply_B",
    "apply_B_adjoint",
    "laplacian",
    "WeightedNormSpec",
    "Problem",
    "KKTResidual",
    "SolveResult",
    "kkt_residuals",
    "SolverConfig",
    "NewtonConfig",
    "solve",
    "AdmmConfig",
    "iadmm_run",
    "PathConfig",
    "ClusteringPath",
    "clustering_path",
    "extract_clusters",
]
