"""Compare the compiled edge kernels with the numpy fallback.

Times each kernel on a half-moon kNN graph, then one full SSNAL solve
per backend, and prints a table with the speedup of the compiled code.

    python3 benchmarks/bench_kernels.py --n 2000 --d 2 10
"""

import argparse
import contextlib
import timeit

import numpy as np

from sonclust import _kernels_py, kernels
from sonclust.datagen import two_half_moons
from sonclust.graph import build_knn_graph
from sonclust.problem import Problem
from sonclust.ssnal import solve

try:
    from sonclust import _kernels
except ImportError:
    _kernels = None

NAMES = ["edge_diff", "edge_scatter", "column_norms", "project_balls", "soft_threshold_columns", "jacobian_matvec"]


@contextlib.contextmanager
def use_backend(module):
    saved = {name: getattr(kernels, name) for name in NAMES}
    try:
        for name in NAMES:
            setattr(kernels, name, getattr(module, name))
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def _best(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number


def kernel_cases(A, graph, rs):
    d, n = A.shape
    ei, ej = graph.heads, graph.tails
    m = ei.size
    Y = rs.normal(size=(d, m))
    radius = rs.uniform(0.1, 2.0, size=m)
    D = rs.normal(size=(d, m))
    dnorm2 = np.sum(D * D, axis=0)
    alpha = rs.uniform(0.0, 1.5, size=m)
    H = rs.normal(size=(d, n))
    return {
        "edge_diff": lambda k: k.edge_diff(A, ei, ej),
        "edge_scatter": lambda k: k.edge_scatter(Y, ei, ej, n),
        "column_norms": lambda k: k.column_norms(Y),
        "project_balls": lambda k: k.project_balls(Y, radius),
        "soft_threshold_columns": lambda k: k.soft_threshold_columns(Y, radius),
        "jacobian_matvec": lambda k: k.jacobian_matvec(H, D, alpha, dnorm2, ei, ej, 3.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--d", type=int, nargs="+", default=[2, 10])
    ap.add_argument("--knn", type=int, default=10)
    ap.add_argument("--gamma", type=float, default=2.0)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled kernels are not built; run pip install --no-build-isolation -e .")

    rs = np.random.default_rng(0)
    base = two_half_moons(args.n, 0.1, 0).data
    print(f"{'d':>3} {'kernel':<24} {'numpy (ms)':>11} {'cython (ms)':>12} {'speedup':>8}")
    for d in args.d:
        # embed the moons in d dimensions with small noise in the extra coordinates
        A = np.vstack([base, 0.05 * rs.normal(size=(d - 2, args.n))]) if d > 2 else base
        graph = build_knn_graph(A, args.knn, 0.5)
        for name, case in kernel_cases(A, graph, rs).items():
            tp = _best(lambda: case(_kernels_py), args.number)
            tc = _best(lambda: case(_kernels), args.number)
            print(f"{d:>3} {name:<24} {1e3 * tp:>11.3f} {1e3 * tc:>12.3f} {tp / tc:>8.1f}")
        prob = Problem.from_graph(A, graph, args.gamma)
        times = {}
        for label, module in (("numpy", _kernels_py), ("cython", _kernels)):
            with use_backend(module):
                res = solve(prob)
            times[label] = res.time
            assert res.converged
        print(f"{d:>3} {'ssnal solve':<24} {1e3 * times['numpy']:>11.1f} {1e3 * times['cython']:>12.1f} "
              f"{times['numpy'] / times['cython']:>8.1f}")


if __name__ == "__main__":
    main()
