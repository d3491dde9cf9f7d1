"""Problem container, solver results and the optimality measures shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import FeasibilityError, ShapeError
from .graph import WeightedGraph, apply_B, apply_B_adjoint
from .prox import WeightedNormSpec, penalty, prox_p

__all__ = [
    "Problem",
    "KKTResidual",
    "SolveResult",
    "kkt_residuals",
    "primal_objective",
    "dual_objective",
]


@dataclass(frozen=True, eq=False)
class Problem:
    """Minimise ``0.5 |X - A|^2 + gamma * sum_e w_e |x_i - x_j|`` over ``X``."""

    A: np.ndarray
    graph: WeightedGraph
    spec: WeightedNormSpec

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=np.float64)
        if A.ndim != 2 or A.shape[1] != self.graph.n:
            raise ShapeError(f"data has shape {A.shape} but the graph has {self.graph.n} nodes")
        if self.spec.num_edges != self.graph.num_edges:
            raise ShapeError("penalty weights do not match the graph's edge count")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "norm_A", float(np.linalg.norm(A)))

    @classmethod
    def from_graph(cls, A, graph: WeightedGraph, gamma: float) -> "Problem":
        return cls(A, graph, WeightedNormSpec(gamma, graph.weights))

    @property
    def gamma(self) -> float:
        return self.spec.gamma

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def with_gamma(self, gamma: float) -> "Problem":
        return Problem(self.A, self.graph, WeightedNormSpec(gamma, self.graph.weights))


@dataclass
class KKTResidual:
    eta_P: float
    eta_D: float
    eta: float

    @property
    def max(self) -> float:
        return max(self.eta_P, self.eta_D, self.eta)


@dataclass
class SolveResult:
    X: np.ndarray
    U: np.ndarray
    Z: np.ndarray
    V: np.ndarray
    kkt: KKTResidual
    primal_obj: float
    dual_obj: float
    outer_iters: int = 0
    total_newton_iters: int = 0
    total_cg_iters: int = 0
    converged: bool = False
    solver: str = ""
    time: float = 0.0
    history: list = field(default_factory=list, repr=False)


def kkt_residuals(X, U, Z, problem: Problem) -> KKTResidual:
    """Relative primal feasibility, dual feasibility and optimality residuals (Frobenius)."""
    g, spec, A = problem.graph, problem.spec, problem.A
    BX = apply_B(g, X)
    norm_U = np.linalg.norm(U)
    eta_P = np.linalg.norm(BX - U) / (1.0 + norm_U)
    excess = kernels.column_norms(np.asarray(Z, dtype=np.float64)) - spec.radius
    eta_D = np.sum(np.maximum(excess, 0.0)) / (1.0 + problem.norm_A)
    r1 = np.linalg.norm(apply_B_adjoint(g, Z) + X - A)
    r2 = np.linalg.norm(U - prox_p(U + Z, 1.0, spec))
    eta = (r1 + r2) / (1.0 + problem.norm_A + norm_U)
    return KKTResidual(float(eta_P), float(eta_D), float(eta))


def primal_objective(X, problem: Problem) -> float:
    R = np.asarray(X, dtype=np.float64) - problem.A
    return 0.5 * float(np.vdot(R, R)) + penalty(apply_B(problem.graph, X), problem.spec)


def dual_objective(Z, problem: Problem, feas_tol: float = 1e-9) -> float:
    """``<A, V> - 0.5 |V|^2`` with ``V = B*(Z)``; ``Z`` must be dual feasible."""
    Z = np.asarray(Z, dtype=np.float64)
    excess = kernels.column_norms(Z) - problem.spec.radius
    if excess.size and excess.max() > feas_tol:
        raise FeasibilityError(
            f"dual variable violates its ball constraint by {excess.max():.3e}; project first"
        )
    V = apply_B_adjoint(problem.graph, Z)
    return float(np.vdot(problem.A, V)) - 0.5 * float(np.vdot(V, V))
