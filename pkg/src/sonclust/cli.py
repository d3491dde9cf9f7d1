"""Command-line interface: ``sonclust solve | path | bench``.

Exit codes: 0 success, 1 usage or I/O error, 2 solver did not converge.
Errors go to stderr as one JSON object ``{"error": code, "message": text}``.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__, kernels
from .datagen import atomic_write, load_csv, scale_unit, two_half_moons, unbalanced_gaussian, write_csv
from .errors import DataFormatError, ParameterError, SonclustError
from .graph import build_knn_graph
from .iadmm import AdmmConfig, iadmm_run
from .path import PathConfig, clustering_path, extract_clusters, parse_grid
from .problem import Problem
from .ssnal import SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _report_error(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


def _add_data_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file, one observation per row unless --columns")
    src.add_argument("--dataset", choices=["halfmoon", "ugauss"])
    p.add_argument("--columns", action="store_true", help="CSV stores observations as columns")
    p.add_argument("--header", action="store_true", help="skip the first CSV row")
    p.add_argument("--scale", action="store_true", help="min-max scale every coordinate to [0, 1]")
    p.add_argument("--n", type=int, default=200, help="size of the synthetic half moons")
    p.add_argument("--noise", type=float, default=0.1, help="half-moon noise standard deviation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--knn", type=int, default=10)
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--cluster-tol", type=float, default=1e-5)
    p.add_argument("--warmstart-iters", type=int, default=100)
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sonclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sonclust {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one problem")
    _add_data_args(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--solver", choices=["ssnal", "iadmm"], default="ssnal")
    p.add_argument("--admm-max-iters", type=int, default=100000)
    p.add_argument("--admm-sigma", type=float, default=1.0)

    p = sub.add_parser("path", help="clustering path over a gamma grid")
    _add_data_args(p)
    p.add_argument("--gamma-grid", required=True, help="start:step:stop or a comma list")
    p.add_argument("--cold", action="store_true", help="solve every grid point from scratch")

    p = sub.add_parser("bench", help="timing suites")
    p.add_argument("--suite", choices=["scaling-n", "scaling-k", "gamma-sensitivity"], required=True)
    p.add_argument("--sizes", default="200,500,1000,2000")
    p.add_argument("--ks", default="5:5:50")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--knn", type=int, default=10)
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--gamma-grid", default="0.4:0.4:20")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    return parser


def _load_data(args):
    if args.input:
        try:
            A = load_csv(args.input, observations_in_rows=not args.columns, header=args.header)
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from None
        labels = None
        desc = {"name": "csv", "path": os.path.abspath(args.input), "columns": args.columns}
    elif args.dataset == "halfmoon":
        ds = two_half_moons(args.n, args.noise, args.seed)
        A, labels, desc = ds.data, ds.labels, ds.manifest()
    else:
        ds = unbalanced_gaussian(args.seed)
        A, labels, desc = ds.data, ds.labels, ds.manifest()
    if args.scale:
        A = scale_unit(A)
    desc["scaled"] = bool(args.scale)
    return A, labels, desc


def _solver_config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_outer=args.max_outer)


def _write_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _manifest(args, argv, dataset, extra):
    m = {
        "command": args.command,
        "argv": list(argv),
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": getattr(args, "seed", None),
        "dataset": dataset,
    }
    m.update(extra)
    return m


def _kkt_dict(kkt):
    return {"eta_P": kkt.eta_P, "eta_D": kkt.eta_D, "eta": kkt.eta, "eta_max": kkt.max}


def cmd_solve(args, argv) -> int:
    A, labels, desc = _load_data(args)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()
    graph = build_knn_graph(A, args.knn, args.phi)
    problem = Problem.from_graph(A, graph, args.gamma)
    config = _solver_config(args)
    t_admm = 0.0
    if args.solver == "iadmm":
        admm = AdmmConfig.tolerance(args.tol, max_iters=args.admm_max_iters, sigma=args.admm_sigma)
        res = iadmm_run(problem, admm)
        solver_cfg = asdict(admm)
    else:
        init = None
        if args.warmstart_iters > 0:
            pre = iadmm_run(problem, AdmmConfig.budget(args.warmstart_iters))
            t_admm = pre.time
            init = (pre.X, pre.U, pre.Z)
        res = solve(problem, config, init=init)
        solver_cfg = asdict(config)
    assignment, nc = extract_clusters(res.X, graph, args.cluster_tol)
    wall = time.perf_counter() - t0

    summary = {
        "solver": res.solver,
        "gamma": args.gamma,
        "converged": res.converged,
        "primal_obj": res.primal_obj,
        "dual_obj": res.dual_obj,
        "kkt": _kkt_dict(res.kkt),
        "outer_iters": res.outer_iters,
        "newton_iters": res.total_newton_iters,
        "cg_iters": res.total_cg_iters,
        "num_clusters": nc,
        "num_edges": graph.num_edges,
        "time_solver": res.time,
        "time_warmstart": t_admm,
    }
    if labels is not None:
        summary["ground_truth_clusters"] = int(np.unique(labels).size)
    _write_json(os.path.join(args.out, "result.json"), summary)
    write_csv(os.path.join(args.out, "centroids.csv"), res.X.T)
    write_csv(
        os.path.join(args.out, "assignment.csv"),
        np.column_stack([np.arange(A.shape[1]), assignment]),
        header=["index", "cluster"],
    )
    _write_json(
        os.path.join(args.out, "manifest.json"),
        _manifest(
            args,
            argv,
            desc,
            {
                "graph": {"k": args.knn, "phi": args.phi},
                "gamma": args.gamma,
                "solver": args.solver,
                "solver_config": solver_cfg,
                "warmstart_iters": args.warmstart_iters,
                "cluster_tol": args.cluster_tol,
                "timings": {"wall": wall},
                "result": {k: summary[k] for k in ("converged", "primal_obj", "num_clusters")},
                "outputs": ["result.json", "centroids.csv", "assignment.csv"],
            },
        ),
    )
    print(
        f"{res.solver}: gamma={args.gamma} converged={res.converged} "
        f"obj={res.primal_obj:.10g} eta={res.kkt.max:.2e} clusters={nc}"
    )
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


PATH_COLUMNS = [
    "gamma",
    "num_clusters",
    "primal_obj",
    "eta_max",
    "converged",
    "outer_iters",
    "newton_iters",
    "cg_iters",
    "time",
    "time_ssnal",
    "time_iadmm",
]


def cmd_path(args, argv) -> int:
    grid = parse_grid(args.gamma_grid)
    A, labels, desc = _load_data(args)
    os.makedirs(args.out, exist_ok=True)
    config = PathConfig(
        gamma_grid=grid,
        warm_start=not args.cold,
        solver=_solver_config(args),
        cluster_tol=args.cluster_tol,
        warmstart_iters=args.warmstart_iters,
    )
    t0 = time.perf_counter()
    path = clustering_path(A, args.knn, args.phi, config)
    wall = time.perf_counter() - t0

    records = [p.record() for p in path.points]
    lines = [json.dumps(r, sort_keys=True, default=_json_default) for r in records]
    if path.error:
        lines.append(json.dumps({"error": path.error}))
    atomic_write(os.path.join(args.out, "path.jsonl"), "\n".join(lines) + "\n")
    table = [[r[c] for c in PATH_COLUMNS] for r in records]
    _write_csv_rows(os.path.join(args.out, "path.csv"), PATH_COLUMNS, table)
    ok = path.error is None and all(p.converged for p in path.points)
    _write_json(
        os.path.join(args.out, "manifest.json"),
        _manifest(
            args,
            argv,
            desc,
            {
                "graph": {"k": args.knn, "phi": args.phi, "num_edges": path.graph.num_edges},
                "gamma_grid": grid.tolist(),
                "warm_start": not args.cold,
                "solver_config": asdict(config.solver),
                "warmstart_iters": args.warmstart_iters,
                "cluster_tol": args.cluster_tol,
                "timings": {"wall": wall},
                "result": {
                    "points": len(records),
                    "all_converged": ok,
                    "error": path.error,
                    "num_clusters": path.num_clusters,
                },
                "outputs": ["path.jsonl", "path.csv"],
            },
        ),
    )
    print(f"path: {len(records)} of {grid.size} points, all converged={ok}")
    if path.error:
        _report_error("solver_failure", path.error)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def _write_csv_rows(path, header, rows):
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    atomic_write(path, buf.getvalue())


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def run_bench(suite, sizes=(), ks=(), n=2000, knn=10, phi=0.5, noise=0.1,
              grid=None, tol=1e-6, reps=1, seed=0):
    """Run a benchmark suite; returns ``(header, rows, summary)``."""
    grid = parse_grid("0.4:0.4:20") if grid is None else np.asarray(grid, float)
    config = PathConfig(gamma_grid=grid, solver=SolverConfig(tol=tol))
    rows = []
    if suite in ("scaling-n", "scaling-k"):
        cells = [(m, knn) for m in sizes] if suite == "scaling-n" else [(n, k) for k in ks]
        header = ["n", "k", "rep", "edges", "solves", "converged", "avg_time",
                  "avg_newton", "avg_cg"]
        for cell_n, cell_k in cells:
            for rep in range(reps):
                ds = two_half_moons(cell_n, noise, seed + rep)
                path = clustering_path(ds.data, cell_k, phi, config)
                pts = path.points
                rows.append([
                    cell_n, cell_k, rep, path.graph.num_edges, len(pts),
                    sum(p.converged for p in pts),
                    float(np.mean([p.time_ssnal for p in pts])),
                    float(np.mean([p.newton_iters for p in pts])),
                    float(np.mean([p.cg_iters for p in pts])),
                ])
        key = 0 if suite == "scaling-n" else 1
        xs = sorted({r[key] for r in rows})
        ys = [np.mean([r[6] for r in rows if r[key] == x]) for x in xs]
        summary = {"x": xs, "avg_time": ys, "loglog_slope": loglog_slope(xs, ys) if len(xs) > 1 else None}
    elif suite == "gamma-sensitivity":
        header = ["rep", "gamma", "num_clusters", "converged", "time", "newton", "cg"]
        for rep in range(reps):
            ds = two_half_moons(n, noise, seed + rep)
            path = clustering_path(ds.data, knn, phi, config)
            for p in path.points:
                rows.append([rep, p.gamma, p.num_clusters, p.converged, p.time_ssnal,
                             p.newton_iters, p.cg_iters])
        times = np.array([r[4] for r in rows])
        summary = {
            "max_time": float(times.max()),
            "median_time": float(np.median(times)),
            "max_over_median": float(times.max() / np.median(times)),
            "std_time": float(times.std()),
        }
    else:
        raise ParameterError(f"unknown suite {suite!r}")
    return header, rows, summary


def cmd_bench(args, argv) -> int:
    os.makedirs(args.out, exist_ok=True)
    sizes = [int(v) for v in parse_grid(args.sizes)]
    ks = [int(v) for v in parse_grid(args.ks)]
    t0 = time.perf_counter()
    header, rows, summary = run_bench(
        args.suite, sizes=sizes, ks=ks, n=args.n, knn=args.knn, phi=args.phi,
        noise=args.noise, grid=parse_grid(args.gamma_grid), tol=args.tol,
        reps=args.reps, seed=args.seed,
    )
    wall = time.perf_counter() - t0
    rows.sort(key=lambda r: tuple(r[:3]))
    _write_csv_rows(os.path.join(args.out, "bench.csv"), header, rows)
    _write_json(os.path.join(args.out, "bench_summary.json"), summary)
    _write_json(
        os.path.join(args.out, "manifest.json"),
        _manifest(
            args,
            argv,
            {"name": "halfmoon", "noise_sd": args.noise},
            {
                "suite": args.suite,
                "sizes": sizes,
                "ks": ks,
                "graph": {"k": args.knn, "phi": args.phi},
                "gamma_grid": parse_grid(args.gamma_grid).tolist(),
                "tol": args.tol,
                "reps": args.reps,
                "timings": {"wall": wall},
                "result": summary,
                "outputs": ["bench.csv", "bench_summary.json"],
            },
        ),
    )
    print(json.dumps(summary, default=_json_default))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "path": cmd_path, "bench": cmd_bench}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        _report_error("usage", str(exc).strip())
    except (ParameterError, DataFormatError) as exc:
        _report_error("invalid_input", str(exc))
    except SonclustError as exc:
        _report_error("solver_failure", str(exc))
        return EXIT_NOT_CONVERGED
    except OSError as exc:
        _report_error("io", str(exc))
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
