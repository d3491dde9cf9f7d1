"""Independent reference computations used by the tests.

Everything here is deliberately naive (dense matrices, explicit loops,
generic optimisers) and shares no code path with the package kernels.
"""

import numpy as np
from scipy.optimize import minimize

from sonclust.graph import build_knn_graph, from_edges
from sonclust.problem import Problem
from sonclust.ssncg import phi_gradient, phi_value, select_jacobian


def random_problem(seed, n=10, d=2, k=3, gamma=0.5, phi=0.5):
    rs = np.random.default_rng(seed)
    A = rs.normal(size=(d, n))
    g = build_knn_graph(A, k, phi)
    return Problem.from_graph(A, g, gamma)


def random_graph(seed, n, m):
    rs = np.random.default_rng(seed)
    pairs = set()
    while len(pairs) < m:
        i, j = rs.choice(n, size=2, replace=False)
        pairs.add((min(i, j), max(i, j)))
    pairs = sorted(pairs)
    return from_edges(n, pairs, rs.uniform(0.2, 1.5, size=len(pairs)))


def vec(X):
    """Stack the columns of ``X``: entry ``(r, i)`` goes to ``i * d + r``."""
    return np.asarray(X).T.reshape(-1)


def unvec(v, d):
    return np.asarray(v).reshape(-1, d).T


def dense_B(graph, d):
    """``(d m) x (d n)`` matrix of the edge-difference map in column-stacked coordinates."""
    m, n = graph.num_edges, graph.n
    inc = np.zeros((m, n))
    for e, (i, j) in enumerate(graph.edges):
        inc[e, i] = 1.0
        inc[e, j] = -1.0
    return np.kron(inc, np.eye(d))


def dense_laplacian(graph):
    L = np.zeros((graph.n, graph.n))
    for i, j in graph.edges:
        L[i, i] += 1
        L[j, j] += 1
        L[i, j] -= 1
        L[j, i] -= 1
    return L


def dense_prox_jacobian(D, radius, sigma):
    """Block-diagonal element of the generalized Jacobian of the column prox at ``D``.

    Edge block: ``0`` when ``alpha >= 1``, else
    ``alpha D D^T / |D|^2 + (1 - alpha) I`` with ``alpha = r / (sigma |D|)``.
    """
    d, m = D.shape
    P = np.zeros((d * m, d * m))
    for e in range(m):
        col = D[:, e]
        nrm = np.linalg.norm(col)
        if nrm == 0:
            continue
        alpha = radius[e] / (sigma * nrm)
        if alpha >= 1:
            continue
        blk = alpha * np.outer(col, col) / nrm**2 + (1 - alpha) * np.eye(d)
        P[e * d:(e + 1) * d, e * d:(e + 1) * d] = blk
    return P


def dense_newton_matrix(problem, D, sigma):
    """``I + sigma B^T (I - P) B`` assembled explicitly."""
    d, n = problem.A.shape
    B = dense_B(problem.graph, d)
    P = dense_prox_jacobian(D, problem.spec.radius, sigma)
    return np.eye(d * n) + sigma * B.T @ (np.eye(B.shape[0]) - P) @ B


def numeric_prox(f, x, t):
    """Minimise ``t f(u) + |u - x|^2 / 2`` with a derivative-free method."""
    x = np.asarray(x, dtype=np.float64)
    obj = lambda u: t * f(u) + 0.5 * np.sum((u - x) ** 2)  # noqa: E731
    best = None
    for start in (x, np.zeros_like(x), 0.5 * x):
        res = minimize(obj, start, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
        if best is None or res.fun < best.fun:
            best = res
    return best.x


def numeric_project_l1(x, r):
    """Projection onto the l1 ball as a smooth QP in split variables ``u = p - q``."""
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    obj = lambda z: 0.5 * np.sum((z[:d] - z[d:] - x) ** 2)  # noqa: E731
    jac = lambda z: np.concatenate([z[:d] - z[d:] - x, -(z[:d] - z[d:] - x)])  # noqa: E731
    cons = [{"type": "ineq", "fun": lambda z: r - z.sum(), "jac": lambda z: -np.ones(2 * d)}]
    z0 = np.zeros(2 * d)
    res = minimize(obj, z0, jac=jac, bounds=[(0, None)] * (2 * d), constraints=cons,
                   method="SLSQP", options={"ftol": 1e-15, "maxiter": 500})
    return res.x[:d] - res.x[d:]


def numeric_project_ball(z, r):
    """Projection onto ``{u : |u| <= r}`` via SLSQP."""
    z = np.asarray(z, dtype=np.float64)
    cons = [{"type": "ineq", "fun": lambda u: r * r - u @ u, "jac": lambda u: -2 * u}]
    res = minimize(lambda u: 0.5 * np.sum((u - z) ** 2), np.zeros_like(z),
                   jac=lambda u: u - z, constraints=cons, method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    return res.x


def loop_primal_objective(X, problem):
    """Term-by-term primal objective accumulated in extended precision."""
    X = np.asarray(X, dtype=np.longdouble)
    A = np.asarray(problem.A, dtype=np.longdouble)
    total = np.longdouble(0)
    for i in range(A.shape[1]):
        total += 0.5 * np.sum((X[:, i] - A[:, i]) ** 2)
    for e, (i, j) in enumerate(problem.graph.edges):
        total += np.longdouble(problem.spec.radius[e]) * np.sqrt(np.sum((X[:, i] - X[:, j]) ** 2))
    return float(total)


def adjusted_labels_equal(a, b):
    """True when two labelings agree up to a renaming of the labels."""
    a, b = np.asarray(a), np.asarray(b)
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def active_set(X, Zt, sigma, prob):
    return frozenset(select_jacobian(X, Zt, sigma, prob).active_edges.tolist())


def fd_gradient_check(prob, X, Zt, sigma, rs, eps=1e-6, directions=20):
    """Central differences along random directions, skipping kinks."""
    g = phi_gradient(X, Zt, sigma, prob)
    base = active_set(X, Zt, sigma, prob)
    worst = 0.0
    used = 0
    for _ in range(10 * directions):
        if used == directions:
            break
        H = rs.normal(size=X.shape)
        if active_set(X + eps * H, Zt, sigma, prob) != base or active_set(X - eps * H, Zt, sigma, prob) != base:
            continue
        fd = (phi_value(X + eps * H, Zt, sigma, prob) - phi_value(X - eps * H, Zt, sigma, prob)) / (2 * eps)
        an = float(np.vdot(g, H))
        worst = max(worst, abs(fd - an) / (1 + abs(an)))
        used += 1
    return worst, used
