"""Proximal maps for the sum-of-norms penalty and its conjugate.

The penalty on an edge matrix ``U`` is ``p(U) = gamma * sum_e w_e |U[:, e]|_2``.
Its conjugate is the indicator of the product of Euclidean balls with radii
``gamma * w_e``; ``gamma`` is folded into the radii everywhere so that the
Moreau identity holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError, ShapeError

__all__ = [
    "WeightedNormSpec",
    "prox_l2_block",
    "prox_l1",
    "project_l1_ball",
    "prox_linf",
    "penalty",
    "prox_p",
    "project_omega",
    "prox_conjugate_check",
]


@dataclass(frozen=True, eq=False)
class WeightedNormSpec:
    gamma: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64).reshape(-1)
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ParameterError("weights must be finite and positive")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "radius", self.gamma * w)

    @property
    def num_edges(self) -> int:
        return self.weights.shape[0]


def _check_positive(t):
    if not t > 0:
        raise ParameterError(f"step must be positive, got {t}")


def prox_l2_block(x, t):
    """Blockwise soft-thresholding ``[1 - t/|x|]_+ x``."""
    _check_positive(t)
    x = np.asarray(x, dtype=np.float64)
    nrm = np.linalg.norm(x)
    if nrm <= t:
        return np.zeros_like(x)
    return (1.0 - t / nrm) * x


def prox_l1(x, t):
    """Elementwise soft-thresholding."""
    _check_positive(t)
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def project_l1_ball(x, r):
    """Euclidean projection onto ``{u : |u|_1 <= r}`` by sort and threshold."""
    _check_positive(r)
    x = np.asarray(x, dtype=np.float64)
    a = np.abs(x)
    if a.sum() <= r:
        return x.copy()
    s = np.sort(a.ravel())[::-1]
    css = np.cumsum(s)
    idx = np.arange(1, s.size + 1)
    rho = np.nonzero(s * idx > css - r)[0][-1]
    theta = (css[rho] - r) / (rho + 1.0)
    return np.sign(x) * np.maximum(a - theta, 0.0)


def prox_linf(x, t):
    """Prox of ``t |.|_inf``, i.e. ``x`` minus its projection onto the ``t`` l1-ball."""
    x = np.asarray(x, dtype=np.float64)
    return x - project_l1_ball(x, t)


def _check_edges(U, spec):
    U = np.asarray(U, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
    if U.ndim != 2 or U.shape[1] != spec.num_edges:
        raise ShapeError(f"expected a d x {spec.num_edges} edge matrix, got shape {U.shape}")
    return U


def penalty(U, spec: WeightedNormSpec) -> float:
    """``gamma * sum_e w_e |U[:, e]|``."""
    U = _check_edges(U, spec)
    return float(np.dot(spec.radius, kernels.column_norms(U)))


def prox_p(U, t, spec: WeightedNormSpec) -> np.ndarray:
    """``Prox_{t p}(U)``: each column soft-thresholded at ``t * gamma * w_e``."""
    _check_positive(t)
    U = _check_edges(U, spec)
    return kernels.soft_threshold_columns(U, t * spec.radius)


def project_omega(Z, spec: WeightedNormSpec) -> np.ndarray:
    """Project every column onto the ball of radius ``gamma * w_e``."""
    Z = _check_edges(Z, spec)
    return kernels.project_balls(Z, spec.radius)[0]


def prox_conjugate_check(x, t, spec: WeightedNormSpec) -> float:
    """Residual of the Moreau identity ``Prox_{tp}(x) + t Prox_{p*/t}(x/t) = x``.

    ``p*`` is the indicator of the dual balls, so its prox is a projection
    regardless of the scaling.
    """
    x = _check_edges(x, spec)
    lhs = prox_p(x, t, spec) + t * project_omega(x / t, spec)
    return float(np.linalg.norm(lhs - x))
