import numpy as np
import pytest

from sonclust.datagen import two_half_moons
from sonclust.errors import ParameterError
from sonclust.graph import build_knn_graph, from_edges
from sonclust.path import PathConfig, clustering_path, extract_clusters, parse_grid
from sonclust.problem import Problem
from sonclust.ssnal import SolverConfig, solve
from sonclust.iadmm import AdmmConfig, iadmm_run

from oracles import adjusted_labels_equal


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("0.2:0.2:1"), [0.2, 0.4, 0.6, 0.8, 1.0])
    assert parse_grid("0.2:0.2:10").size == 50
    np.testing.assert_array_equal(parse_grid("1, 2.5,4"), [1.0, 2.5, 4.0])
    with pytest.raises(ParameterError):
        parse_grid("1:2")
    with pytest.raises(ParameterError):
        parse_grid("1:0:3")


@pytest.mark.parametrize("grid", [[1.0, 1.0], [2.0, 1.0], [], [0.0, 1.0]])
def test_grid_validation(grid):
    with pytest.raises(ParameterError):
        PathConfig(grid)


def test_extract_clusters_trivial():
    g = from_edges(4, [(0, 1), (1, 2), (2, 3)])
    a, k = extract_clusters(np.ones((2, 4)), g)
    assert k == 1 and not a.any()
    a, k = extract_clusters(np.arange(8.0).reshape(2, 4), g)
    assert k == 4
    np.testing.assert_array_equal(a, [0, 1, 2, 3])


def test_extract_clusters_numbering_and_tolerance():
    X = np.array([[5.0, 0.0, 5.0 + 1e-9, 0.0, 9.0]])
    g = from_edges(5, [(0, 2), (1, 3), (0, 1), (3, 4)])
    a, k = extract_clusters(X, g)
    np.testing.assert_array_equal(a, [0, 1, 0, 1, 2])
    assert k == 3
    # same centroids but no edge between them: separate unless all pairs
    g2 = from_edges(5, [(1, 3)])
    assert extract_clusters(X, g2)[1] == 4
    assert extract_clusters(X, g2, all_pairs=True)[1] == 3


def test_extract_clusters_independent_of_edge_order():
    rs = np.random.default_rng(0)
    X = np.repeat(rs.normal(size=(2, 6)), 5, axis=1) + 1e-9 * rs.normal(size=(2, 30))
    pairs = [(i, j) for i in range(30) for j in range(i + 1, 30) if rs.uniform() < 0.3]
    a1, k1 = extract_clusters(X, from_edges(30, pairs))
    a2, k2 = extract_clusters(X, from_edges(30, pairs[::-1]))
    np.testing.assert_array_equal(a1, a2)
    assert k1 == k2
    assert set(a1.tolist()) == set(range(k1))


def test_single_point_grid_equals_single_solve():
    ds = two_half_moons(120, 0.1, 0)
    g = build_knn_graph(ds.data, 10, 0.5)
    path = clustering_path(ds.data, 10, 0.5, PathConfig([2.0]), graph=g)
    prob = Problem.from_graph(ds.data, g, 2.0)
    pre = iadmm_run(prob, AdmmConfig.budget(100))
    res = solve(prob, init=(pre.X, pre.U, pre.Z))
    assert len(path.points) == 1
    np.testing.assert_array_equal(path.points[0].X, res.X)


def test_warm_and_cold_paths_agree():
    ds = two_half_moons(200, 0.1, 1)
    grid = parse_grid("0.5:0.5:4")
    cfg = SolverConfig(tol=1e-7)
    warm = clustering_path(ds.data, 10, 0.5, PathConfig(grid, solver=cfg))
    cold = clustering_path(ds.data, 10, 0.5, PathConfig(grid, warm_start=False, solver=cfg))
    assert warm.error is None and cold.error is None
    for p, q in zip(warm.points, cold.points):
        assert p.converged and q.converged
        assert np.linalg.norm(p.X - q.X) <= 1e-4 * (1 + np.linalg.norm(q.X))
        np.testing.assert_array_equal(p.assignment, q.assignment)


def test_permutation_equivariance():
    ds = two_half_moons(150, 0.1, 2)
    perm = np.random.default_rng(0).permutation(150)
    cfg = PathConfig([1.5, 3.0], solver=SolverConfig(tol=1e-7))
    base = clustering_path(ds.data, 10, 0.5, cfg)
    permd = clustering_path(ds.data[:, perm], 10, 0.5, cfg)
    for p, q in zip(base.points, permd.points):
        assert adjusted_labels_equal(p.assignment[perm], q.assignment)
        assert p.num_clusters == q.num_clusters


def test_failure_truncates_path():
    ds = two_half_moons(80, 0.1, 0)
    cfg = PathConfig([0.5, 1.0], solver=SolverConfig(sigma0=1e300, sigma_max=1e300))
    path = clustering_path(ds.data, 10, 0.5, cfg)
    assert path.error is not None
    assert len(path.points) < 2


def test_records_are_serialisable():
    import json

    ds = two_half_moons(60, 0.1, 0)
    path = clustering_path(ds.data, 5, 0.5, PathConfig([1.0, 2.0]))
    for p in path.points:
        rec = json.loads(json.dumps(p.record()))
        assert rec["num_clusters"] == len(set(rec["assignment"]))
        assert set(rec["assignment"]) == set(range(rec["num_clusters"]))
