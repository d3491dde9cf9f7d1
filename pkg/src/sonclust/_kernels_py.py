"""Pure numpy edge kernels, used when the compiled module is unavailable.

Every function here has the same signature and semantics as its counterpart
in ``_kernels.pyx``.
"""

import numpy as np


def edge_diff(X, ei, ej):
    return X[:, ei] - X[:, ej]


def edge_scatter(Z, ei, ej, n):
    d = Z.shape[0]
    out = np.empty((d, n))
    for r in range(d):
        out[r] = np.bincount(ei, Z[r], minlength=n) - np.bincount(ej, Z[r], minlength=n)
    return out


def column_norms(Y):
    return np.sqrt(np.einsum("ij,ij->j", Y, Y))


def project_balls(Y, radius):
    norms = column_norms(Y)
    scale = np.ones_like(norms)
    over = norms > radius
    scale[over] = radius[over] / norms[over]
    out = Y * scale
    # shave the factor until the rounded column lies in the ball (idempotence)
    for _ in range(8):
        bad = over & (column_norms(out) > radius)
        if not bad.any():
            break
        scale[bad] = np.nextafter(scale[bad], 0.0)
        out[:, bad] = Y[:, bad] * scale[bad]
    return out, norms


def soft_threshold_columns(Y, thresh):
    norms = column_norms(Y)
    scale = np.zeros_like(norms)
    keep = norms > thresh
    scale[keep] = 1.0 - thresh[keep] / norms[keep]
    return Y * scale


def jacobian_matvec(H, D, alpha, dnorm2, ei, ej, sigma):
    # H + sigma * H L_J  -  sigma * B*(P B H), with P supported on alpha < 1 only
    out = H + sigma * edge_scatter(edge_diff(H, ei, ej), ei, ej, H.shape[1])
    act = np.flatnonzero(alpha < 1.0)
    if act.size == 0:
        return out
    ai, aj, a = ei[act], ej[act], alpha[act]
    Da = D[:, act]
    U = H[:, ai] - H[:, aj]
    rho = np.einsum("ij,ij->j", Da, U) / dnorm2[act]
    PU = (1.0 - a) * U + (a * rho) * Da
    out -= sigma * edge_scatter(PU, ai, aj, H.shape[1])
    return out
