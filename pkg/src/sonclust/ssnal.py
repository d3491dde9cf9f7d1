"""Inexact augmented Lagrangian outer loop with semismooth Newton-CG subproblems."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, ParameterError
from .graph import apply_B
from .problem import (
    KKTResidual,
    Problem,
    SolveResult,
    dual_objective,
    kkt_residuals,
    primal_objective,
)
from .prox import project_omega
from .ssncg import NewtonConfig, solve_subproblem, subproblem_tolerance_met

__all__ = [
    "SolverConfig",
    "solve",
    "update_sigma",
    "subproblem_tolerance_met",
    "kkt_residuals",
    "primal_objective",
    "dual_objective",
    "KKTResidual",
    "SolveResult",
    "Problem",
]

logger = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    tol: float = 1e-6
    sigma0: float = 100.0
    sigma_max: float = 1e6
    sigma_growth: float = 3.0
    eps0: float = 10.0
    eps_decay: float = 0.6
    max_outer: int = 100
    ssncg: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if not self.sigma0 > 0 or self.sigma_max < self.sigma0:
            raise ParameterError("need 0 < sigma0 <= sigma_max")
        if self.sigma_growth < 1:
            raise ParameterError("sigma_growth must be >= 1")
        if not 0 < self.eps_decay < 1 or self.eps0 < 0:
            raise ParameterError("eps_decay must lie in (0, 1) and eps0 >= 0")


def update_sigma(sigma_k, eta_P_now, eta_P_prev, config: SolverConfig) -> float:
    """Grow ``sigma`` when primal infeasibility failed to halve; never shrink it."""
    if eta_P_now > 0.5 * eta_P_prev:
        return min(config.sigma_max, config.sigma_growth * sigma_k)
    return sigma_k


def _finish(problem, X, U, Z, kkt, converged, outer, newton, cg, t0, history):
    Zf = project_omega(Z, problem.spec)
    return SolveResult(
        X=X,
        U=U,
        Z=Z,
        V=problem.A - X,
        kkt=kkt,
        primal_obj=primal_objective(X, problem),
        dual_obj=dual_objective(Zf, problem),
        outer_iters=outer,
        total_newton_iters=newton,
        total_cg_iters=cg,
        converged=converged,
        solver="ssnal",
        time=time.perf_counter() - t0,
        history=history,
    )


def solve(problem: Problem, config: SolverConfig | None = None, init=None) -> SolveResult:
    """Solve the clustering problem to relative KKT tolerance ``config.tol``.

    ``init`` is an optional ``(X, U, Z)`` triple, e.g. from a previous
    solve or from :func:`sonclust.iadmm.iadmm_run`. Without it the solver
    starts at ``X = A, U = B(A), Z = 0``.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    if init is None:
        X = problem.A.copy()
        U = apply_B(problem.graph, X)
        Z = np.zeros_like(U)
    else:
        X, U, Z = (np.array(v, dtype=np.float64, copy=True) for v in init)

    kkt = kkt_residuals(X, U, Z, problem)
    history = []
    if kkt.max <= config.tol:
        return _finish(problem, X, U, Z, kkt, True, 0, 0, 0, t0, history)

    sigma = config.sigma0
    eps_k = config.eps0
    eta_P_prev = np.inf
    newton = cg = 0
    for k in range(1, config.max_outer + 1):
        sub = solve_subproblem(X, Z, sigma, problem, config.ssncg, outer_eps=eps_k)
        newton += sub.newton_iters
        cg += sub.cg_iters
        X, U = sub.X, sub.U
        Z = Z + sigma * (apply_B(problem.graph, X) - U)
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
            raise NumericalFailure("non-finite iterate in the outer loop", state=(X, U, Z))
        kkt = kkt_residuals(X, U, Z, problem)
        history.append(
            {
                "iter": k,
                "sigma": sigma,
                "eps": eps_k,
                "newton": sub.newton_iters,
                "cg": sub.cg_iters,
                "grad_norm": sub.grad_norm,
                "primal_obj": primal_objective(X, problem),
                "eta_P": kkt.eta_P,
                "eta_D": kkt.eta_D,
                "eta": kkt.eta,
            }
        )
        logger.debug("ssnal %d: %s", k, history[-1])
        if kkt.max <= config.tol:
            return _finish(problem, X, U, Z, kkt, True, k, newton, cg, t0, history)
        sigma = update_sigma(sigma, kkt.eta_P, eta_P_prev, config)
        eta_P_prev = kkt.eta_P
        eps_k *= config.eps_decay
    return _finish(problem, X, U, Z, kkt, False, config.max_outer, newton, cg, t0, history)
