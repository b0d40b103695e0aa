"""Command-line front end.

Every solver subcommand prints one JSON line
{"command", "cost", "iterations", "runtime_ms", "seed", "coupling_path"}.
Exit status is 0 on success, 2 for unreadable or invalid input and 3 when a
solver fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import formats
from .errors import ParseError, SolverError, ValidationError

EXIT_OK, EXIT_PARSE, EXIT_SOLVER = 0, 2, 3


@dataclass
class RunReport:
    command: str
    cost: float
    iterations: int
    runtime_ms: float
    seed: int
    coupling_path: str | None = None

    def __post_init__(self):
        if not np.isfinite(self.cost):
            raise SolverError(f"non-finite cost {self.cost}")
        self.runtime_ms = max(float(self.runtime_ms), 0.0)

    def to_json(self) -> str:
        return formats.dumps(asdict(self))


@dataclass
class Result:
    cost: float
    iterations: int = 0
    plan: np.ndarray | None = None
    extra: dict | None = None


# ---------------------------------------------------------------- helpers

def _distance(X, Y, p=1.0):
    from .linear.barycenter import sq_euclidean

    D = sq_euclidean(X, Y)
    return D if p == 2 else np.sqrt(D) ** p


def _load_space(path):
    """(structure, weights, features or None) from a graph or a measure file."""
    text = Path(path).read_text() if Path(path).exists() else ""
    if '"nodes"' in text:
        g = formats.parse_graph(path)
        return np.asarray(g.structure), np.asarray(g.weights), g
    mu = formats.parse_measure(path)
    X = np.asarray(mu.support)
    return _distance(X, X, 1.0), np.asarray(mu.weights), mu


def _cloud(path):
    mu = formats.parse_measure(path)
    return np.asarray(mu.support), np.asarray(mu.weights)


def _uniform_or_none(w):
    return None if np.ptp(w) <= 1e-12 * np.abs(w).max() else w


# ---------------------------------------------------------------- solver commands

def cmd_w(args) -> Result:
    from .linear.exact import solve_exact
    from .linear.sinkhorn import sinkhorn

    X, a = _cloud(args.source)
    Y, b = _cloud(args.target)
    C = _distance(X, Y, args.p)
    if args.command == "sinkhorn" or args.solver == "entropic":
        sol = sinkhorn(C, a, b, epsilon=args.epsilon or 0.1)
    else:
        sol = solve_exact(C, a, b)
    return Result(sol.cost, sol.iterations, sol.plan)


def cmd_gw(args) -> Result:
    from .fgw.solver import FgwParams, fgw_solve
    from .gromov import GwProblem, gw_entropic

    C1, a, _ = _load_space(args.source)
    C2, b, _ = _load_space(args.target)
    if args.solver == "entropic":
        sol = gw_entropic(GwProblem(C1, C2, a, b), args.epsilon or 0.1, outer_iter=args.max_iter)
        return Result(sol.cost, sol.iterations, sol.plan)
    sol = fgw_solve(None, C1, C2, a, b, FgwParams(alpha=1.0, max_iter=args.max_iter))
    return Result(sol.cost, sol.iterations, sol.plan)


def cmd_fgw(args) -> Result:
    from .fgw.solver import FgwParams, feature_cost_matrix, fgw_solve

    g1 = formats.parse_graph(args.source)
    g2 = formats.parse_graph(args.target)
    if g1.has_labels != g2.has_labels:
        raise ValidationError("both graphs need the same kind of node features")
    metric = "label_hamming" if g1.has_labels else "l2"
    M = feature_cost_matrix(g1.features, g2.features, metric)
    params = FgwParams(alpha=args.alpha, q=args.q, max_iter=args.max_iter)
    sol = fgw_solve(M, g1.structure, g2.structure, g1.weights, g2.weights, params)
    return Result(sol.cost, sol.iterations, sol.plan)


def _slice_config(args):
    from .sliced import SliceConfig

    return SliceConfig(num_projections=args.projections, seed=args.seed)


def cmd_sgw(args) -> Result:
    from .sliced import sgw

    X, a = _cloud(args.source)
    Y, b = _cloud(args.target)
    return Result(sgw(X, Y, _slice_config(args), _uniform_or_none(a), _uniform_or_none(b)), 1)


def cmd_risgw(args) -> Result:
    from .sliced import risgw
    from .stiefel import StiefelOptParams

    X, _ = _cloud(args.source)
    Y, _ = _cloud(args.target)
    if X.shape[1] > Y.shape[1]:
        X, Y = Y, X
    value, delta = risgw(X, Y, _slice_config(args), StiefelOptParams(max_iter=args.max_iter))
    return Result(value, 0, extra={"delta": delta})


def cmd_inner_gw(args) -> Result:
    from .euclidean_gw import inner_gw_1d, inner_gw_bcd

    X, a = _cloud(args.source)
    Y, b = _cloud(args.target)
    if X.shape[1] == 1 and Y.shape[1] == 1 and args.solver != "bcd":
        cost, coupling, direction = inner_gw_1d(X[:, 0], Y[:, 0], a, b)
        return Result(cost, 1, coupling.plan, {"direction": direction})
    sol = inner_gw_bcd(X, Y, a, b, max_sweeps=args.max_iter, n_init=args.restarts, seed=args.seed)
    return Result(sol.cost, sol.iterations, sol.plan, {"alignment": sol.alignment})


def cmd_sq_gw(args) -> Result:
    from .euclidean_gw import sq_gw_bcd

    X, a = _cloud(args.source)
    Y, b = _cloud(args.target)
    sol = sq_gw_bcd(X, Y, a, b, max_sweeps=args.max_iter, n_init=args.restarts, seed=args.seed)
    return Result(sol.cost, sol.iterations, sol.plan, {"alignment": sol.alignment})


def cmd_lgm(args) -> Result:
    from .euclidean_gw import lgm_gaussian

    S1 = formats.parse_covariance(args.source)
    S2 = formats.parse_covariance(args.target)
    cost, A, B = lgm_gaussian(S1, S2, seed=args.seed)
    extra = {"map": A} if A is not None else {"stiefel": B}
    return Result(cost, 0, extra=extra)


def cmd_coot(args) -> Result:
    from .coot import coot_bcd

    X = formats.parse_matrix(args.source)
    Y = formats.parse_matrix(args.target)
    eps = args.epsilon or 0.0
    sol = coot_bcd(X, Y, args.loss, eps, eps, max_sweeps=args.max_iter)
    return Result(sol.cost, sol.sweeps, sol.pi_samples.plan, {"pi_features": sol.pi_features.plan})


def cmd_barycenter(args) -> Result:
    texts = [Path(p).read_text() if Path(p).exists() else "" for p in args.inputs]
    if texts and all('"nodes"' in t for t in texts):
        from .fgw.barycenter import fgw_barycenter
        from .fgw.solver import FgwParams

        graphs = [formats.parse_graph(p) for p in args.inputs]
        bary, log = fgw_barycenter(graphs, N=args.k, params=FgwParams(alpha=args.alpha),
                                   max_iter=args.max_iter, seed=args.seed, log=True)
        extra = {"structure": bary.structure, "features": bary.features, "weights": bary.weights}
        return Result(log["objective"][-1], len(log["objective"]) - 1, extra=extra)
    from .linear.barycenter import wasserstein_barycenter
    from .linear.sinkhorn import SinkhornParams

    measures = [formats.parse_measure(p) for p in args.inputs]
    sp = SinkhornParams(args.epsilon) if args.solver == "entropic" and args.epsilon else None
    bary, log = wasserstein_barycenter(measures, k=args.k, max_iter=args.max_iter, seed=args.seed,
                                       sinkhorn_params=sp, log=True)
    extra = formats.measure_document(bary)
    return Result(log["objective"][-1], len(log["objective"]) - 1, extra=extra)


def cmd_cocluster(args) -> Result:
    from .coot import cocluster

    X = formats.parse_matrix(args.source)
    eps = args.epsilon or 0.0
    Xc, rows, cols, log = cocluster(X, args.g, args.m, eps=eps, seed=args.seed,
                                    sweeps=args.max_iter, restarts=args.restarts, log=True)
    extra = {"summary": Xc, "row_assign": rows, "col_assign": cols}
    return Result(log["objective"][-1], len(log["objective"]) // 2, extra=extra)


# ---------------------------------------------------------------- gen and bench

def gen_document(args) -> dict:
    from . import generators as G

    if args.kind == "sbm":
        A, labels = G.sbm_graph(args.nodes, args.communities, args.p_in, args.p_out, seed=args.seed)
        return formats.graph_document(A, labels=labels)
    if args.kind == "spiral":
        return {"points": G.spiral(args.n, args.dim, args.noise, seed=args.seed)}
    if args.kind == "blocks":
        X, rows, cols, means = G.block_data(args.n, args.d, args.g, args.m, args.noise,
                                            args.separation, seed=args.seed)
        return {"matrix": X, "row_labels": rows, "col_labels": cols, "block_means": means}
    X, S = G.gaussian_cloud(args.n, args.dim, seed=args.seed)
    return {"points": X, "covariance": S}


def cmd_gen(args) -> int:
    text = formats.dumps(gen_document(args)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


BENCH_SUITES = ("sgw", "gw")


def bench_rows(suite: str, sizes, seed: int = 0, reps: int = 1, projections: int = 50,
               epsilon: float = 0.1):
    """Rows (solver, n, runtime_ms, cost) for the requested suite.

    The gw suite times Frank-Wolfe and entropic GW on spiral pairs; distance
    matrices are built before the clock starts.
    """
    from .fgw.solver import FgwParams, fgw_solve
    from .generators import spiral
    from .gromov import GwProblem, gw_entropic
    from .sliced import SliceConfig, sgw

    rows = []
    for rep in range(reps):
        for n in sizes:
            n = int(n)
            X = spiral(n, 2, 0.05, seed=seed + rep)
            Y = spiral(n, 3, 0.05, seed=seed + rep + 1)
            if suite == "sgw":
                cfg = SliceConfig(num_projections=projections, seed=seed)
                t = time.perf_counter()
                c = sgw(X, Y, cfg)
                rows.append(("sgw", n, 1000 * (time.perf_counter() - t), c))
            elif suite == "gw":
                C1, C2 = _distance(X, X), _distance(Y, Y)
                C1, C2 = C1 / C1.max(), C2 / C2.max()
                t = time.perf_counter()
                c = fgw_solve(None, C1, C2, params=FgwParams(alpha=1.0)).cost
                rows.append(("fw", n, 1000 * (time.perf_counter() - t), c))
                t = time.perf_counter()
                c = gw_entropic(GwProblem(C1, C2), epsilon, outer_iter=200).cost
                rows.append(("entropic", n, 1000 * (time.perf_counter() - t), c))
            else:
                raise ValidationError(f"unknown bench suite {suite!r}")
    return rows


def cmd_bench(args) -> int:
    limit = 100_000 if args.suite == "sgw" else 500
    sizes = [int(float(s)) for s in args.sizes.split(",")]
    if any(s < 1 or s > limit for s in sizes):
        raise ValidationError(f"{args.suite} sizes must lie in [1, {limit}]")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["solver", "n", "runtime_ms", "cost"])
    for solver, n, ms, c in bench_rows(args.suite, sizes, args.seed, args.reps, args.projections,
                                       args.epsilon or 0.1):
        w.writerow([solver, n, format(ms, ".6g"), format(c, ".17g")])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "w": cmd_w, "sinkhorn": cmd_w, "gw": cmd_gw, "fgw": cmd_fgw, "sgw": cmd_sgw,
    "risgw": cmd_risgw, "inner-gw": cmd_inner_gw, "sq-gw": cmd_sq_gw, "lgm": cmd_lgm,
    "coot": cmd_coot, "barycenter": cmd_barycenter, "cocluster": cmd_cocluster,
}


def _common(p, max_iter=100):
    p.add_argument("--alpha", type=float, default=0.5, help="FGW trade-off in [0, 1]")
    p.add_argument("--epsilon", type=float, default=None, help="entropic regularization")
    p.add_argument("--projections", type=int, default=50, help="number of slices")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=max_iter)
    p.add_argument("--emit-coupling", metavar="PATH", help="write the coupling as i,j,mass CSV")
    p.add_argument("--emit-json", metavar="PATH", help="write the report and extra outputs as JSON")
    p.add_argument("--solver", choices=["exact", "entropic", "fw", "bcd"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otspaces", description="Optimal transport solvers")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("w", "sinkhorn", "gw", "fgw", "sgw", "risgw", "inner-gw", "sq-gw", "lgm", "coot"):
        p = sub.add_parser(name)
        p.add_argument("source")
        p.add_argument("target")
        _common(p, 1000 if name in ("gw", "fgw") else 200)
        if name in ("w", "sinkhorn"):
            p.add_argument("--p", type=float, default=2.0, help="ground cost |x - y|^p")
        if name == "fgw":
            p.add_argument("--q", type=int, default=2, choices=[1, 2])
        if name in ("inner-gw", "sq-gw"):
            p.add_argument("--restarts", type=int, default=1)
        if name == "coot":
            p.add_argument("--loss", choices=["sq", "abs"], default="sq")
    p = sub.add_parser("barycenter")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--k", type=int, required=True, help="barycenter size")
    _common(p)
    p = sub.add_parser("cocluster")
    p.add_argument("source")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--restarts", type=int, default=5)
    _common(p, 20)

    p = sub.add_parser("gen")
    p.add_argument("kind", choices=["sbm", "spiral", "blocks", "gaussians"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--communities", type=int, default=2)
    p.add_argument("--nodes", type=int, default=30)
    p.add_argument("--p-in", type=float, default=0.8)
    p.add_argument("--p-out", type=float, default=0.05)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--d", type=int, default=60)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--g", type=int, default=3)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--separation", type=float, default=2.0)

    p = sub.add_parser("bench")
    p.add_argument("suite", choices=BENCH_SUITES)
    p.add_argument("--sizes", default="1000,10000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--projections", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--out", metavar="PATH")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "bench":
            return cmd_bench(args)
        if not hasattr(args, "restarts"):
            args.restarts = 1
        t0 = time.perf_counter()
        res = COMMANDS[args.command](args)
        elapsed = 1000 * (time.perf_counter() - t0)
        coupling_path = None
        if args.emit_coupling and res.plan is not None:
            formats.write_coupling(res.plan, args.emit_coupling)
            coupling_path = args.emit_coupling
        report = RunReport(args.command, float(res.cost), int(res.iterations), elapsed,
                           args.seed, coupling_path)
        if args.emit_json:
            doc = asdict(report)
            doc.update(res.extra or {})
            formats.write_json(doc, args.emit_json)
        print(report.to_json())
        return EXIT_OK
    except (ParseError, ValidationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
