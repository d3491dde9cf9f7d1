# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled edge kernels. Mirrors ``_kernels_py`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport nextafter, sqrt

cnp.import_array()


def edge_diff(const double[:, :] X, const cnp.intp_t[:] ei, const cnp.intp_t[:] ej):
    cdef Py_ssize_t d = X.shape[0], m = ei.shape[0], r, e
    out = np.empty((d, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for r in range(d):
            for e in range(m):
                o[r, e] = X[r, ei[e]] - X[r, ej[e]]
    return out


def edge_scatter(const double[:, :] Z, const cnp.intp_t[:] ei, const cnp.intp_t[:] ej,
                 Py_ssize_t n):
    cdef Py_ssize_t d = Z.shape[0], m = ei.shape[0], r, e
    cdef double z
    out = np.zeros((d, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for r in range(d):
            for e in range(m):
                z = Z[r, e]
                o[r, ei[e]] += z
                o[r, ej[e]] -= z
    return out


def column_norms(const double[:, :] Y):
    cdef Py_ssize_t d = Y.shape[0], m = Y.shape[1], r, e
    cdef double s
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for e in range(m):
            s = 0.0
            for r in range(d):
                s += Y[r, e] * Y[r, e]
            o[e] = sqrt(s)
    return out


def project_balls(const double[:, :] Y, const double[:] radius):
    cdef Py_ssize_t d = Y.shape[0], m = Y.shape[1], r, e, it
    cdef double s, scale
    out = np.empty((d, m), dtype=np.float64)
    norms = np.empty(m, dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] nv = norms
    with nogil:
        for e in range(m):
            s = 0.0
            for r in range(d):
                s += Y[r, e] * Y[r, e]
            s = sqrt(s)
            nv[e] = s
            scale = 1.0
            if s > radius[e]:
                scale = radius[e] / s
            for r in range(d):
                o[r, e] = scale * Y[r, e]
            if scale < 1.0:
                # shave the factor until the rounded column lies in the ball,
                # which makes the projection idempotent bit for bit
                for it in range(8):
                    s = 0.0
                    for r in range(d):
                        s += o[r, e] * o[r, e]
                    if sqrt(s) <= radius[e]:
                        break
                    scale = nextafter(scale, 0.0)
                    for r in range(d):
                        o[r, e] = scale * Y[r, e]
    return out, norms


def soft_threshold_columns(const double[:, :] Y, const double[:] thresh):
    cdef Py_ssize_t d = Y.shape[0], m = Y.shape[1], r, e
    cdef double s, scale
    out = np.empty((d, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for e in range(m):
            s = 0.0
            for r in range(d):
                s += Y[r, e] * Y[r, e]
            s = sqrt(s)
            scale = 0.0
            if s > thresh[e]:
                scale = 1.0 - thresh[e] / s
            for r in range(d):
                o[r, e] = scale * Y[r, e]
    return out


def jacobian_matvec(H, D, const double[:] alpha, const double[:] dnorm2,
                    const cnp.intp_t[:] ei, const cnp.intp_t[:] ej, double sigma):
    """Return H + sigma * B*((I - P) B H) in one pass over the edges.

    Edges with ``alpha >= 1`` carry ``(I - P) = I``; the rest carry
    ``alpha * (u - <D, u> D / |D|^2)``. Beyond a few rows the pass runs on
    node-major copies so each column's entries are adjacent in memory.
    """
    H = np.asarray(H, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if H.shape[0] <= 4:
        out = np.array(H, dtype=np.float64, order="C", copy=True)
        _matvec_pass(H, D, alpha, dnorm2, ei, ej, sigma, out, 0)
        return out
    out_t = np.ascontiguousarray(H.T)
    _matvec_pass(out_t.copy(), np.ascontiguousarray(D.T), alpha, dnorm2, ei, ej, sigma, out_t, 1)
    return np.ascontiguousarray(out_t.T)


cdef void _matvec_pass(const double[:, :] H, const double[:, :] D, const double[:] alpha,
                       const double[:] dnorm2, const cnp.intp_t[:] ei,
                       const cnp.intp_t[:] ej, double sigma, double[:, :] o,
                       bint node_major):
    # node_major: H, D and o are stored transposed (node or edge index first)
    cdef Py_ssize_t d, m = ei.shape[0], r, e, i, j
    cdef double a, s, v
    d = H.shape[1] if node_major else H.shape[0]
    with nogil:
        if node_major:
            for e in range(m):
                i = ei[e]
                j = ej[e]
                a = alpha[e]
                if a >= 1.0:
                    for r in range(d):
                        v = sigma * (H[i, r] - H[j, r])
                        o[i, r] += v
                        o[j, r] -= v
                else:
                    s = 0.0
                    for r in range(d):
                        s += D[e, r] * (H[i, r] - H[j, r])
                    s = s / dnorm2[e]
                    for r in range(d):
                        v = sigma * a * ((H[i, r] - H[j, r]) - s * D[e, r])
                        o[i, r] += v
                        o[j, r] -= v
        else:
            for e in range(m):
                i = ei[e]
                j = ej[e]
                a = alpha[e]
                if a >= 1.0:
                    for r in range(d):
                        v = sigma * (H[r, i] - H[r, j])
                        o[r, i] += v
                        o[r, j] -= v
                else:
                    s = 0.0
                    for r in range(d):
                        s += D[r, e] * (H[r, i] - H[r, j])
                    s = s / dnorm2[e]
                    for r in range(d):
                        v = sigma * a * ((H[r, i] - H[r, j]) - s * D[r, e])
                        o[r, i] += v
                        o[r, j] -= v
