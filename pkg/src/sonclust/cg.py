"""Conjugate gradients on matrix-shaped unknowns."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool
    history: list = field(default_factory=list)


def conjugate_gradient(matvec, rhs, tol_abs, max_iter, x0=None) -> CGResult:
    """Solve ``matvec(x) = rhs`` for a self-adjoint positive definite operator.

    Inner products are Frobenius, so ``x`` may have any shape. Stops once
    the recurrence residual satisfies ``|r| <= tol_abs``; after ``max_iter``
    steps the last iterate is returned with ``converged=False``.
    """
    if x0 is None:
        x = np.zeros_like(rhs)
        r = rhs.copy()
    else:
        x = np.array(x0, dtype=np.float64, copy=True)
        r = rhs - matvec(x)
    rr = float(np.vdot(r, r))
    res = np.sqrt(rr)
    history = [res]
    if res <= tol_abs:
        return CGResult(x, 0, res, True, history)
    p = r.copy()
    for it in range(1, max_iter + 1):
        q = matvec(p)
        pq = float(np.vdot(p, q))
        if not np.isfinite(pq):
            raise NumericalFailure("non-finite value in conjugate gradients", state=x)
        if pq <= 0.0:
            raise NumericalFailure(
                f"operator is not positive definite (<p, Vp> = {pq:.3e})", state=x
            )
        step = rr / pq
        x += step * p
        r -= step * q
        rr_new = float(np.vdot(r, r))
        res = np.sqrt(rr_new)
        history.append(res)
        if res <= tol_abs:
            return CGResult(x, it, res, True, history)
        p *= rr_new / rr
        p += r
        rr = rr_new
    return CGResult(x, max_iter, res, False, history)
