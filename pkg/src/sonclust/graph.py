"""Weighted k-nearest-neighbour graphs and the edge-difference operator.

The centroid matrix ``X`` is ``d x n`` (one column per observation) and edge
matrices are ``d x m`` with column ``e`` belonging to ``edges[e] = (i, j)``,
``i < j``. ``apply_B`` maps ``X`` to the per-edge differences
``x_i - x_j`` and ``apply_B_adjoint`` is its adjoint, so that
``apply_B_adjoint(g, apply_B(g, X)) == X @ laplacian(g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ParameterError, ShapeError

__all__ = [
    "WeightedGraph",
    "from_edges",
    "build_knn_graph",
    "knn_indices",
    "apply_B",
    "apply_B_adjoint",
    "laplacian",
    "scaled_laplacian",
]


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph on ``n`` nodes with positive edge weights.

    ``heads[e] < tails[e]`` for every edge and edges are sorted
    lexicographically by ``(head, tail)``. Use :func:`from_edges` or
    :func:`build_knn_graph` rather than the constructor.
    """

    n: int
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    _laplacian: sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    @property
    def num_edges(self) -> int:
        return int(self.heads.shape[0])

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.heads.tolist(), self.tails.tolist()))

    @property
    def node_degrees(self) -> np.ndarray:
        return np.bincount(self.heads, minlength=self.n) + np.bincount(
            self.tails, minlength=self.n
        )

    def laplacian(self) -> sp.csr_matrix:
        # cached: the graph is immutable
        if self._laplacian is None:
            object.__setattr__(self, "_laplacian", scaled_laplacian(self, np.ones(self.num_edges)))
        return self._laplacian


def from_edges(n, edges, weights=None) -> WeightedGraph:
    """Build a graph from ``(i, j)`` pairs, normalising and sorting them.

    Pairs are reoriented so that ``i < j``. Duplicate pairs, self loops and
    zero-weight edges are rejected or dropped as documented on
    :class:`WeightedGraph`.
    """
    n = int(n)
    if n < 1:
        raise ParameterError("graph needs at least one node")
    pairs = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
    if weights is None:
        w = np.ones(pairs.shape[0])
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != pairs.shape[0]:
            raise ShapeError(f"{w.shape[0]} weights for {pairs.shape[0]} edges")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ParameterError("edge weights must be finite and nonnegative")
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        raise ParameterError("edge endpoint out of range")
    if np.any(pairs[:, 0] == pairs[:, 1]):
        raise ParameterError("self loops are not allowed")

    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keep = w > 0
    lo, hi, w = lo[keep], hi[keep], w[keep]
    order = np.lexsort((hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    if lo.size > 1 and np.any((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])):
        raise ParameterError("duplicate edges")
    return WeightedGraph(
        n=n,
        heads=np.ascontiguousarray(lo, dtype=np.intp),
        tails=np.ascontiguousarray(hi, dtype=np.intp),
        weights=np.ascontiguousarray(w, dtype=np.float64),
    )


def _as_data(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeError(f"data must be a nonempty d x n matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError("data contains non-finite entries")
    return A


def knn_indices(A, k: int) -> np.ndarray:
    """Return the ``n x k`` matrix of each column's ``k`` nearest other columns.

    Exact Euclidean distances, brute force in row blocks. Rows are ordered
    by distance; ties are broken by the smaller node index.
    """
    A = _as_data(A)
    n = A.shape[1]
    k = int(k)
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must lie in [1, n-1] = [1, {n - 1}], got {k}")
    out = np.empty((n, k), dtype=np.intp)
    block = max(1, (1 << 22) // n)
    cols = np.arange(n)
    for start in range(0, n, block):
        stop = min(n, start + block)
        rows = np.arange(start, stop)
        dist = np.zeros((stop - start, n))
        for r in range(A.shape[0]):
            diff = A[r, start:stop, None] - A[r, None, :]
            dist += diff * diff
        dist[rows - start, rows] = np.inf
        # stable argsort keeps tied distances in ascending index order
        if k < n - 1:
            kth = np.partition(dist, k - 1, axis=1)[:, k - 1]
            for b in range(stop - start):
                cand = cols[dist[b] <= kth[b]]
                sub = np.argsort(dist[b, cand], kind="stable")[:k]
                out[start + b] = cand[sub]
        else:
            out[start:stop] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def build_knn_graph(A, k: int, phi: float) -> WeightedGraph:
    """Symmetrised k-NN graph with Gaussian weights ``exp(-phi |a_i - a_j|^2)``.

    An edge ``(i, j)`` is kept when either endpoint is among the other's
    ``k`` nearest neighbours. Edges whose weight underflows to zero are
    dropped.
    """
    A = _as_data(A)
    phi = float(phi)
    if phi < 0 or not np.isfinite(phi):
        raise ParameterError(f"phi must be finite and nonnegative, got {phi}")
    n = A.shape[1]
    nbr = knn_indices(A, k)
    src = np.repeat(np.arange(n, dtype=np.intp), nbr.shape[1])
    dst = nbr.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    key = np.unique(lo.astype(np.int64) * n + hi)
    lo = (key // n).astype(np.intp)
    hi = (key % n).astype(np.intp)
    diff = A[:, lo] - A[:, hi]
    w = np.exp(-phi * np.einsum("ij,ij->j", diff, diff))
    keep = w > 0
    return WeightedGraph(
        n=n,
        heads=np.ascontiguousarray(lo[keep]),
        tails=np.ascontiguousarray(hi[keep]),
        weights=np.ascontiguousarray(w[keep]),
    )


def apply_B(g: WeightedGraph, X) -> np.ndarray:
    """Edge differences: column ``e`` is ``x_i - x_j`` for ``edges[e] = (i, j)``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != g.n:
        raise ShapeError(f"expected a d x {g.n} matrix, got shape {X.shape}")
    return kernels.edge_diff(X, g.heads, g.tails)


def apply_B_adjoint(g: WeightedGraph, Z) -> np.ndarray:
    """Scatter edge columns back to nodes: ``+Z[:, e]`` to the head, ``-Z[:, e]`` to the tail."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != g.num_edges:
        raise ShapeError(f"expected a d x {g.num_edges} matrix, got shape {Z.shape}")
    return kernels.edge_scatter(Z, g.heads, g.tails, g.n)


def laplacian(g: WeightedGraph) -> sp.csr_matrix:
    """Unweighted Laplacian ``diag(J e) - J`` of the edge set."""
    return g.laplacian()


def scaled_laplacian(g: WeightedGraph, edge_scalars) -> sp.csr_matrix:
    """Laplacian of the symmetric matrix with entry ``edge_scalars[e]`` on each edge.

    Zero scalars contribute nothing, so building from the nonzero entries
    only costs ``O(#nonzeros)``.
    """
    s = np.asarray(edge_scalars, dtype=np.float64).reshape(-1)
    if s.shape[0] != g.num_edges:
        raise ShapeError(f"{s.shape[0]} scalars for {g.num_edges} edges")
    nz = np.flatnonzero(s)
    i, j, v = g.heads[nz], g.tails[nz], s[nz]
    deg = np.bincount(i, v, minlength=g.n) + np.bincount(j, v, minlength=g.n)
    rows = np.concatenate([i, j, np.arange(g.n)])
    cols = np.concatenate([j, i, np.arange(g.n)])
    vals = np.concatenate([-v, -v, deg])
    return sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
