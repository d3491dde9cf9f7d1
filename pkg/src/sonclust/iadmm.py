"""Inexact ADMM: warm starts for the Newton solver and a first-order baseline."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .cg import conjugate_gradient
from .errors import NumericalFailure, ParameterError
from .graph import WeightedGraph, apply_B, apply_B_adjoint
from .problem import Problem, SolveResult, dual_objective, kkt_residuals, primal_objective
from .prox import project_omega, prox_p

__all__ = ["AdmmConfig", "iadmm_run", "x_system_solve"]

GOLDEN = (1.0 + 5.0**0.5) / 2.0


@dataclass
class AdmmConfig:
    """``max_iters`` bounds the run; ``tol`` (if set) stops it early on relative KKT."""

    sigma: float = 1.0
    tau_step: float = 1.618
    max_iters: int = 100
    tol: float | None = None
    eps0: float = 1.0
    eps_decay: float = 0.9
    eps_floor: float = 1e-13
    cg_max: int = 500
    check_every: int = 1

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if not 0 < self.tau_step < GOLDEN:
            raise ParameterError("tau_step must lie in (0, (1 + sqrt 5) / 2)")
        if not 0 < self.eps_decay < 1:
            raise ParameterError("eps_decay must lie in (0, 1)")

    @classmethod
    def budget(cls, iters: int = 100, **kw) -> "AdmmConfig":
        return cls(max_iters=iters, tol=None, **kw)

    @classmethod
    def tolerance(cls, tol: float, max_iters: int = 100000, **kw) -> "AdmmConfig":
        return cls(max_iters=max_iters, tol=tol, **kw)


def x_system_solve(graph: WeightedGraph, sigma, R, tol_abs, cg_max, x0=None):
    """Solve ``X (I + sigma L_J) = R`` for all rows at once by CG.

    Returns ``(X, iterations, residual)``. Raises :class:`NumericalFailure`
    when CG stalls with a residual above ``10 * tol_abs``.
    """
    R = np.asarray(R, dtype=np.float64)
    if sigma == 0:
        return R.copy(), 0, 0.0

    def matvec(X):
        return X + sigma * apply_B_adjoint(graph, apply_B(graph, X))

    res = conjugate_gradient(matvec, R, tol_abs, cg_max, x0=x0)
    if not res.converged and res.residual > 10.0 * tol_abs:
        raise NumericalFailure(
            f"X-system CG stalled at residual {res.residual:.3e} (target {tol_abs:.3e})",
            state=res.x,
        )
    return res.x, res.iterations, res.residual


def iadmm_run(problem: Problem, config: AdmmConfig | None = None, init=None) -> SolveResult:
    """Run inexact ADMM from ``init`` (default ``X = A, U = B(A), Z = 0``)."""
    config = config or AdmmConfig()
    t0 = time.perf_counter()
    g, spec, A = problem.graph, problem.spec, problem.A
    sigma, tau = config.sigma, config.tau_step
    if init is None:
        X = A.copy()
        U = apply_B(g, X)
        Z = np.zeros_like(U)
    else:
        X, U, Z = (np.array(v, dtype=np.float64, copy=True) for v in init)

    kkt = kkt_residuals(X, U, Z, problem)
    converged = config.tol is not None and kkt.max <= config.tol
    it = cg_total = 0
    eps_k = config.eps0
    while not converged and it < config.max_iters:
        R = A + apply_B_adjoint(g, sigma * U - Z)
        tol_k = max(eps_k, config.eps_floor * (1.0 + np.linalg.norm(R)))
        X, ncg, _ = x_system_solve(g, sigma, R, tol_k, config.cg_max, x0=X)
        cg_total += ncg
        BX = apply_B(g, X)
        U = prox_p(BX + Z / sigma, 1.0 / sigma, spec)
        Z = Z + tau * sigma * (BX - U)
        it += 1
        eps_k *= config.eps_decay
        if not np.all(np.isfinite(Z)):
            raise NumericalFailure("non-finite iterate in ADMM", state=(X, U, Z))
        if config.tol is not None and (it % config.check_every == 0 or it == config.max_iters):
            kkt = kkt_residuals(X, U, Z, problem)
            converged = kkt.max <= config.tol
    if config.tol is None or it % config.check_every:
        kkt = kkt_residuals(X, U, Z, problem)
    return SolveResult(
        X=X,
        U=U,
        Z=Z,
        V=A - X,
        kkt=kkt,
        primal_obj=primal_objective(X, problem),
        dual_obj=dual_objective(project_omega(Z, spec), problem),
        outer_iters=it,
        total_cg_iters=cg_total,
        converged=converged if config.tol is not None else False,
        solver="iadmm",
        time=time.perf_counter() - t0,
    )
