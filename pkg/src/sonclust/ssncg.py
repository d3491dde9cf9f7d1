"""Semismooth Newton-CG for the augmented Lagrangian subproblem.

For fixed ``sigma`` and multiplier ``Zt`` the subproblem reduces to
minimising the strongly convex, once continuously differentiable function

    phi(X) = 0.5 |X - A|^2 + sum_e h_e(|D_e|) - |Zt|^2 / (2 sigma),
    D = B(X) + Zt / sigma,

where ``h_e`` is the Huber-type envelope ``sigma nu^2 / 2`` for
``nu <= r_e / sigma`` and ``r_e nu - r_e^2 / (2 sigma)`` beyond, with
``r_e = gamma w_e``. Its gradient is ``X - A + B*(Pi(sigma D))`` with ``Pi``
the projection onto the dual balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cg import conjugate_gradient
from .errors import LineSearchError, NumericalFailure, ParameterError, ShapeError
from .graph import apply_B, apply_B_adjoint
from .problem import Problem

__all__ = [
    "NewtonConfig",
    "JacobianInfo",
    "PhiState",
    "SubproblemResult",
    "phi_value",
    "phi_gradient",
    "evaluate_phi",
    "select_jacobian",
    "jacobian_vector_product",
    "cg_solve",
    "line_search",
    "solve_subproblem",
    "subproblem_tolerance_met",
]


@dataclass
class NewtonConfig:
    mu: float = 1e-4
    tau: float = 0.5
    eta_bar: float = 0.05
    delta: float = 0.5
    max_newton: int = 50
    max_cg: int = 300
    max_backtracks: int = 60

    def __post_init__(self):
        if not 0 < self.mu < 0.5:
            raise ParameterError("mu must lie in (0, 1/2)")
        if not 0 < self.tau <= 1:
            raise ParameterError("tau must lie in (0, 1]")
        if not 0 < self.eta_bar < 1 or not 0 < self.delta < 1:
            raise ParameterError("eta_bar and delta must lie in (0, 1)")


@dataclass
class PhiState:
    """Everything derived from one evaluation of ``phi`` at ``X``."""

    X: np.ndarray
    D: np.ndarray
    dnorm: np.ndarray
    proj: np.ndarray  # Pi(sigma D), the candidate next multiplier
    grad: np.ndarray
    value: float
    grad_norm: float


@dataclass
class JacobianInfo:
    D: np.ndarray
    alpha: np.ndarray
    dnorm2: np.ndarray
    active_edges: np.ndarray
    sigma: float

    @property
    def num_active(self) -> int:
        return int(self.active_edges.shape[0])


@dataclass
class SubproblemResult:
    X: np.ndarray
    U: np.ndarray
    Z_next: np.ndarray
    newton_iters: int
    cg_iters: int
    converged: bool
    grad_norm: float
    grad_history: list = field(default_factory=list)
    X_history: list = field(default_factory=list, repr=False)


def subproblem_tolerance_met(grad_norm, eps_k, sigma_k) -> bool:
    """Inexactness test ``|grad phi| <= eps_k / max(1, sqrt(sigma_k))``."""
    return grad_norm <= eps_k / max(1.0, math.sqrt(sigma_k))


def _huber(nu, r, sigma):
    return np.where(sigma * nu <= r, 0.5 * sigma * nu * nu, r * nu - 0.5 * r * r / sigma)


def evaluate_phi(X, Zt, sigma, problem: Problem) -> PhiState:
    X = np.asarray(X, dtype=np.float64)
    if X.shape != problem.A.shape:
        raise ShapeError(f"X has shape {X.shape}, expected {problem.A.shape}")
    r = problem.spec.radius
    D = apply_B(problem.graph, X)
    if Zt is not None:
        D += Zt / sigma
    proj, snorm = kernels.project_balls(sigma * D, r)
    dnorm = snorm / sigma
    R = X - problem.A
    grad = R + apply_B_adjoint(problem.graph, proj)
    value = 0.5 * float(np.vdot(R, R)) + float(np.sum(_huber(dnorm, r, sigma)))
    if Zt is not None:
        value -= float(np.vdot(Zt, Zt)) / (2.0 * sigma)
    gnorm = float(np.linalg.norm(grad))
    if not (np.isfinite(value) and np.isfinite(gnorm)):
        raise NumericalFailure("non-finite value while evaluating phi", state=X)
    return PhiState(X, D, dnorm, proj, grad, value, gnorm)


def phi_value(X, Zt, sigma, problem: Problem) -> float:
    return evaluate_phi(X, Zt, sigma, problem).value


def phi_gradient(X, Zt, sigma, problem: Problem) -> np.ndarray:
    return evaluate_phi(X, Zt, sigma, problem).grad


def _phi_change(old: PhiState, new: PhiState, step, d, sigma, problem: Problem) -> float:
    """``phi(old.X + step * d) - phi(old.X)`` assembled term by term.

    Subtracting two evaluations loses everything below ``eps * |phi|``, which
    near a solution is larger than the Armijo decrease being tested.
    """
    R = old.X - problem.A
    change = step * float(np.vdot(R, d)) + 0.5 * step * step * float(np.vdot(d, d))
    r = problem.spec.radius
    nu0, nu1 = old.dnorm, new.dnorm
    # |D1|^2 - |D0|^2 = <dD, 2 D0 + dD> with dD = step * B(d) formed exactly;
    # new.D - old.D would cancel catastrophically once sigma is large
    dD = step * apply_B(problem.graph, d)
    sq = np.einsum("ij,ij->j", dD, 2.0 * old.D + dD)
    quad0, quad1 = sigma * nu0 <= r, sigma * nu1 <= r
    both_quad = quad0 & quad1
    both_lin = ~quad0 & ~quad1
    mixed = ~(both_quad | both_lin)
    change += 0.5 * sigma * float(np.sum(sq[both_quad]))
    change += float(np.sum(r[both_lin] * sq[both_lin] / (nu0[both_lin] + nu1[both_lin])))
    if mixed.any():
        rm = r[mixed]
        change += float(np.sum(_huber(nu1[mixed], rm, sigma) - _huber(nu0[mixed], rm, sigma)))
    return change


def select_jacobian(X, Zt, sigma, problem: Problem, state: PhiState | None = None) -> JacobianInfo:
    """Pick the generalized Jacobian element of the column-wise prox at ``D``.

    ``alpha_e = r_e / (sigma |D_e|)``, with ``inf`` for zero columns. Only
    edges with ``alpha_e < 1`` see a non-zero prox derivative.
    """
    if state is None:
        state = evaluate_phi(X, Zt, sigma, problem)
    nu = state.dnorm
    r = problem.spec.radius
    alpha = np.full_like(nu, np.inf)
    pos = nu > 0
    alpha[pos] = r[pos] / (sigma * nu[pos])
    return JacobianInfo(
        D=state.D,
        alpha=alpha,
        dnorm2=nu * nu,
        active_edges=np.flatnonzero(alpha < 1.0),
        sigma=float(sigma),
    )


def jacobian_vector_product(info: JacobianInfo, problem: Problem, H) -> np.ndarray:
    """``V(H) = H + sigma B*((I - P) B H)``."""
    H = np.asarray(H, dtype=np.float64)
    if H.shape != problem.A.shape:
        raise ShapeError(f"H has shape {H.shape}, expected {problem.A.shape}")
    g = problem.graph
    return kernels.jacobian_matvec(H, info.D, info.alpha, info.dnorm2, g.heads, g.tails, info.sigma)


def cg_solve(info: JacobianInfo, problem: Problem, rhs, tol_abs, max_cg):
    """CG on the Newton system; returns ``(direction, iterations, converged)``."""
    res = conjugate_gradient(
        lambda H: jacobian_vector_product(info, problem, H), rhs, tol_abs, max_cg
    )
    return res.x, res.iterations, res.converged


def line_search(state: PhiState, d, Zt, sigma, problem: Problem, config: NewtonConfig):
    """Armijo backtracking ``alpha = delta^m``; returns ``(alpha, new_state, evaluations)``."""
    slope = float(np.vdot(state.grad, d))
    if not slope < 0:
        raise NumericalFailure(f"Newton direction is not a descent direction (slope {slope:.3e})")
    step = 1.0
    for m in range(config.max_backtracks + 1):
        new = evaluate_phi(state.X + step * d, Zt, sigma, problem)
        if _phi_change(state, new, step, d, sigma, problem) <= config.mu * step * slope:
            return step, new, m + 1
        step *= config.delta
    raise LineSearchError(
        f"no Armijo step after {config.max_backtracks} backtracks", state=state.X
    )


def solve_subproblem(
    X0, Zt, sigma, problem: Problem, config: NewtonConfig | None = None, outer_eps=0.0,
    grad_tol=None, keep_iterates=False,
):
    """Minimise ``phi`` from ``X0`` until the inexactness test passes.

    ``grad_tol``, when given, replaces the ``outer_eps`` test by the plain
    bound ``|grad phi| <= grad_tol``.
    """
    config = config or NewtonConfig()
    state = evaluate_phi(X0, Zt, sigma, problem)

    def done(s):
        if grad_tol is not None:
            return s.grad_norm <= grad_tol
        return subproblem_tolerance_met(s.grad_norm, outer_eps, sigma)

    history = [state.grad_norm]
    xs = [state.X] if keep_iterates else []
    total_cg = 0
    it = 0
    converged = done(state)
    while not converged and it < config.max_newton:
        info = select_jacobian(None, Zt, sigma, problem, state=state)
        tol = min(config.eta_bar, state.grad_norm ** (1.0 + config.tau))
        d, ncg, _ = cg_solve(info, problem, -state.grad, tol, config.max_cg)
        total_cg += ncg
        _, state, _ = line_search(state, d, Zt, sigma, problem, config)
        it += 1
        history.append(state.grad_norm)
        if keep_iterates:
            xs.append(state.X)
        converged = done(state)
    U = state.D - state.proj / sigma
    return SubproblemResult(
        X=state.X,
        U=U,
        Z_next=state.proj,
        newton_iters=it,
        cg_iters=total_cg,
        converged=converged,
        grad_norm=state.grad_norm,
        grad_history=history,
        X_history=xs,
    )
