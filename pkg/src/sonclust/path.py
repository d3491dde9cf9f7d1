"""Clustering paths over a regularisation grid and cluster extraction."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ParameterError, SonclustError
from .graph import WeightedGraph, build_knn_graph
from .iadmm import AdmmConfig, iadmm_run
from .problem import KKTResidual, Problem
from .ssnal import SolverConfig, solve

__all__ = [
    "PathConfig",
    "PathPoint",
    "ClusteringPath",
    "clustering_path",
    "extract_clusters",
    "parse_grid",
]

logger = logging.getLogger(__name__)


def parse_grid(text: str) -> np.ndarray:
    """Parse ``start:step:stop`` (inclusive stop) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ParameterError(f"grid must be start:step:stop, got {text!r}")
        start, step, stop = parts
        if step == 0:
            raise ParameterError("grid step must be nonzero")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ParameterError(f"empty grid {text!r}")
        return np.round(start + step * np.arange(count), 12)
    return np.array([float(p) for p in text.split(",") if p.strip()])


@dataclass
class PathConfig:
    gamma_grid: np.ndarray
    warm_start: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)
    cluster_tol: float = 1e-5
    warmstart_iters: int = 100
    all_pairs: bool = False

    def __post_init__(self):
        grid = np.asarray(self.gamma_grid, dtype=np.float64).reshape(-1)
        if grid.size == 0:
            raise ParameterError("gamma grid is empty")
        if np.any(grid <= 0):
            raise ParameterError("gamma values must be positive")
        if np.any(np.diff(grid) <= 0):
            raise ParameterError("gamma grid must be strictly increasing")
        self.gamma_grid = grid


@dataclass
class PathPoint:
    gamma: float
    X: np.ndarray
    assignment: np.ndarray
    num_clusters: int
    kkt: KKTResidual
    primal_obj: float
    converged: bool
    outer_iters: int
    newton_iters: int
    cg_iters: int
    time_ssnal: float
    time_iadmm: float = 0.0

    def record(self) -> dict:
        return {
            "gamma": self.gamma,
            "num_clusters": self.num_clusters,
            "primal_obj": self.primal_obj,
            "eta_max": self.kkt.max,
            "eta_P": self.kkt.eta_P,
            "eta_D": self.kkt.eta_D,
            "eta": self.kkt.eta,
            "converged": self.converged,
            "outer_iters": self.outer_iters,
            "newton_iters": self.newton_iters,
            "cg_iters": self.cg_iters,
            "time": self.time_ssnal + self.time_iadmm,
            "time_ssnal": self.time_ssnal,
            "time_iadmm": self.time_iadmm,
            "assignment": self.assignment.tolist(),
        }


@dataclass
class ClusteringPath:
    graph: WeightedGraph
    points: list = field(default_factory=list)
    error: str | None = None

    @property
    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.points])

    @property
    def num_clusters(self) -> list:
        return [p.num_clusters for p in self.points]


def extract_clusters(X, graph: WeightedGraph | None, cluster_tol: float = 1e-5, all_pairs=False):
    """Group observations whose centroids coincide up to ``cluster_tol``.

    Nodes ``i, j`` are merged when ``|x_i - x_j| <= tol * (1 + max(|x_i|, |x_j|))``,
    checked across graph edges (or all pairs). Connected components are the
    clusters, numbered in order of their smallest member. Returns
    ``(assignment, num_clusters)``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[1]
    if all_pairs or graph is None:
        i, j = np.triu_indices(n, k=1)
    else:
        i, j = graph.heads, graph.tails
    norms = np.linalg.norm(X, axis=0)
    gap = np.linalg.norm(X[:, i] - X[:, j], axis=0)
    close = gap <= cluster_tol * (1.0 + np.maximum(norms[i], norms[j]))
    adj = sp.coo_matrix((np.ones(int(close.sum())), (i[close], j[close])), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    # renumber by first appearance = smallest member index
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    assignment = remap[labels]
    return assignment, int(order.size)


def clustering_path(A, k: int, phi: float, config: PathConfig, graph=None) -> ClusteringPath:
    """Solve along ``config.gamma_grid``, warm-starting each solve from the last.

    The first grid point (every point when ``warm_start`` is off) starts from
    ``warmstart_iters`` ADMM sweeps. A solver failure truncates the path and
    sets ``error``.
    """
    A = np.asarray(A, dtype=np.float64)
    if graph is None:
        graph = build_knn_graph(A, k, phi)
    path = ClusteringPath(graph=graph)
    prev = None
    for gamma in config.gamma_grid:
        problem = Problem.from_graph(A, graph, float(gamma))
        try:
            t_admm = 0.0
            if prev is None or not config.warm_start:
                if config.warmstart_iters > 0:
                    t0 = time.perf_counter()
                    pre = iadmm_run(problem, AdmmConfig.budget(config.warmstart_iters))
                    t_admm = time.perf_counter() - t0
                    init = (pre.X, pre.U, pre.Z)
                else:
                    init = None
            else:
                init = prev
            res = solve(problem, config.solver, init=init)
        except SonclustError as exc:
            path.error = f"gamma={gamma}: {type(exc).__name__}: {exc}"
            logger.warning("path truncated at %s", path.error)
            break
        assignment, nc = extract_clusters(res.X, graph, config.cluster_tol, config.all_pairs)
        path.points.append(
            PathPoint(
                gamma=float(gamma),
                X=res.X,
                assignment=assignment,
                num_clusters=nc,
                kkt=res.kkt,
                primal_obj=res.primal_obj,
                converged=res.converged,
                outer_iters=res.outer_iters,
                newton_iters=res.total_newton_iters,
                cg_iters=res.total_cg_iters,
                time_ssnal=res.time,
                time_iadmm=t_admm,
            )
        )
        prev = (res.X, res.U, res.Z)
    return path
