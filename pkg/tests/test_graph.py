import numpy as np
import pytest
import scipy.sparse as sp

from sonclust.errors import ParameterError, ShapeError
from sonclust.graph import (
    apply_B,
    apply_B_adjoint,
    build_knn_graph,
    from_edges,
    knn_indices,
    laplacian,
    scaled_laplacian,
)

from oracles import dense_laplacian, random_graph


def brute_knn_edges(A, k):
    """All pairwise distances, nearest k per node (ties to the smaller index), union."""
    n = A.shape[1]
    edges = set()
    for i in range(n):
        dist = [(float(np.sum((A[:, i] - A[:, j]) ** 2)), j) for j in range(n) if j != i]
        dist.sort()
        for _, j in dist[:k]:
            edges.add((min(i, j), max(i, j)))
    return sorted(edges)


def test_collinear_points_nearest_neighbour():
    g = build_knn_graph(np.array([[0.0, 1.0, 2.0]]), 1, 0.0)
    assert g.edges == [(0, 1), (1, 2)]
    np.testing.assert_array_equal(g.weights, [1.0, 1.0])


def test_complete_graph_when_k_is_n_minus_one():
    A = np.random.default_rng(3).normal(size=(3, 7))
    g = build_knn_graph(A, 6, 0.0)
    assert g.num_edges == 7 * 6 // 2
    assert np.all(g.weights == 1.0)


def test_duplicate_points_have_unit_weight():
    g = build_knn_graph(np.array([[1.5, 1.5]]), 1, 5.0)
    assert g.edges == [(0, 1)]
    assert g.weights[0] == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_knn_matches_bruteforce(seed):
    rs = np.random.default_rng(seed)
    A = rs.normal(size=(2, 40))
    g = build_knn_graph(A, 4, 0.5)
    assert g.edges == brute_knn_edges(A, 4)
    for (i, j), w in zip(g.edges, g.weights):
        assert w == pytest.approx(np.exp(-0.5 * np.sum((A[:, i] - A[:, j]) ** 2)), rel=1e-14)


def test_knn_ties_prefer_smaller_index():
    # node 2 is equidistant from 1 and 3
    A = np.array([[0.0, 1.0, 2.0, 3.0]])
    nbr = knn_indices(A, 1)
    assert nbr[2, 0] == 1
    assert nbr[1, 0] == 0


def test_knn_graph_deterministic():
    A = np.random.default_rng(0).normal(size=(2, 300))
    g1 = build_knn_graph(A, 10, 0.5)
    g2 = build_knn_graph(A.copy(), 10, 0.5)
    assert np.array_equal(g1.heads, g2.heads)
    assert np.array_equal(g1.tails, g2.tails)
    assert g1.weights.tobytes() == g2.weights.tobytes()


def test_edges_are_oriented_and_sorted():
    g = from_edges(4, [(3, 1), (0, 2), (1, 0)], [1.0, 2.0, 3.0])
    assert g.edges == [(0, 1), (0, 2), (1, 3)]
    np.testing.assert_array_equal(g.weights, [3.0, 2.0, 1.0])


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 5)]])
def test_from_edges_rejects_bad_input(edges):
    with pytest.raises(ParameterError):
        from_edges(3, edges)


@pytest.mark.parametrize("k", [0, 5])
def test_k_out_of_range(k):
    with pytest.raises(ParameterError):
        build_knn_graph(np.zeros((2, 5)), k, 0.5)


def test_apply_B_examples():
    g = from_edges(3, [(0, 1), (1, 2)])
    np.testing.assert_array_equal(apply_B(g, np.array([[1.0, 4.0, 9.0]])), [[-3.0, -5.0]])
    assert np.all(apply_B(g, np.zeros((2, 3))) == 0)
    assert np.all(apply_B(g, np.ones((2, 3)) * 7.0) == 0)


def test_apply_B_adjoint_example():
    g = from_edges(2, [(0, 1)])
    np.testing.assert_array_equal(apply_B_adjoint(g, np.array([[1.0]])), [[1.0, -1.0]])
    assert np.all(apply_B_adjoint(g, np.zeros((3, 1))) == 0)


def test_shape_errors():
    g = from_edges(3, [(0, 1)])
    with pytest.raises(ShapeError):
        apply_B(g, np.zeros((2, 4)))
    with pytest.raises(ShapeError):
        apply_B_adjoint(g, np.zeros((2, 2)))


@pytest.mark.parametrize("seed", range(10))
def test_adjoint_identity(seed):
    rs = np.random.default_rng(seed)
    g = random_graph(seed, 15, 30)
    X = rs.normal(size=(3, 15))
    Z = rs.normal(size=(3, 30))
    lhs = np.vdot(apply_B(g, X), Z)
    rhs = np.vdot(X, apply_B_adjoint(g, Z))
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


def test_laplacian_path_graph():
    g = from_edges(3, [(0, 1), (1, 2)])
    np.testing.assert_array_equal(
        laplacian(g).toarray(), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]]
    )


def test_laplacian_empty_edge_set():
    g = from_edges(4, np.zeros((0, 2), dtype=int))
    assert sp.issparse(laplacian(g))
    assert laplacian(g).nnz == 0 or np.all(laplacian(g).toarray() == 0)


@pytest.mark.parametrize("seed", range(5))
def test_laplacian_realises_BstarB(seed):
    g = random_graph(seed, 20, 45)
    X = np.random.default_rng(seed).normal(size=(2, 20))
    XL = (laplacian(g).T @ X.T).T
    assert np.linalg.norm(apply_B_adjoint(g, apply_B(g, X)) - XL) <= 1e-12 * (1 + np.linalg.norm(XL))
    np.testing.assert_array_equal(laplacian(g).toarray(), dense_laplacian(g))


def test_laplacian_psd_zero_row_sums():
    g = random_graph(1, 25, 60)
    L = laplacian(g).toarray()
    np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-15)
    np.testing.assert_array_equal(L, L.T)
    rs = np.random.default_rng(0)
    for _ in range(20):
        v = rs.normal(size=25)
        assert v @ L @ v >= -1e-12 * (v @ v)


def test_scaled_laplacian_examples():
    g = from_edges(3, [(0, 1), (1, 2)])
    np.testing.assert_array_equal(
        scaled_laplacian(g, [2.0, 3.0]).toarray(), [[2, -2, 0], [-2, 5, -3], [0, -3, 3]]
    )
    assert np.all(scaled_laplacian(g, [0.0, 0.0]).toarray() == 0)
    np.testing.assert_array_equal(scaled_laplacian(g, [1.0, 1.0]).toarray(), laplacian(g).toarray())
