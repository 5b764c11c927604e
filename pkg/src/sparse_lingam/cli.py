"""Command-line interface: ``simulate``, ``fit``, ``benchmark`` and ``heatmap``.

Exit codes::

    0  success
    2  bad command-line usage (argparse)
    3  input could not be parsed (malformed CSV, missing cells)
    4  invalid parameter or degenerate data
    5  solver did not converge or diverged (outputs are still written)
    6  I/O failure

The seed defaults to the ``SPARSE_LINGAM_SEED`` environment variable, then 0.
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .admm import SolverConfig
from .data import load_csv, load_series, slice_windows
from .exceptions import (
    DegenerateColumnError,
    DivergenceError,
    InsufficientDataError,
    MissingDataError,
    ParameterError,
    ParseError,
    RankDeficiencyError,
    SelectionError,
    SparseLingamError,
)
from .formats import heatmap_image, read_matrix_csv, write_json, write_matrix_csv, write_ppm
from .pipeline import estimate
from .selection import AlphaGrid
from .synth import assign_weights_and_noises, evaluate, gen_er_graph, gen_sf_graph, sample_data

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_PARAM = 4
EXIT_SOLVER = 5
EXIT_IO = 6

SEED_ENV = "SPARSE_LINGAM_SEED"
METRICS = ("distance", "shd", "fdr", "tpr")

logger = logging.getLogger("sparse_lingam")


class _Failure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _alpha_grid(text):
    try:
        lo, hi, count = text.split(":")
        return AlphaGrid.logspace(float(lo), float(hi), int(count))
    except (ValueError, ParameterError) as exc:
        raise argparse.ArgumentTypeError(f"expected lo:hi:count, got {text!r} ({exc})")


def _default_seed():
    value = os.environ.get(SEED_ENV)
    return int(value) if value not in (None, "") else 0


def _add_graph_options(p):
    p.add_argument("--d", type=int, default=10, help="number of variables")
    p.add_argument("--n", type=int, default=1000, help="sample size")
    p.add_argument("--graph", choices=("er", "sf"), default="er")
    p.add_argument("--edges", type=float, default=None,
                   help="expected number of edges (default d); for SF sets m = round(edges/d)")
    p.add_argument("--noise", choices=("mixed", "laplace", "uniform", "exponential"),
                   default="mixed")


def _add_solver_options(p):
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=None,
                   help="fixed alpha; skips cross-validation")
    p.add_argument("--alpha-grid", type=_alpha_grid, default=None, metavar="LO:HI:COUNT")
    p.add_argument("--k-folds", type=int, default=10)
    p.add_argument("--omega1", type=float, default=0.05)
    p.add_argument("--omega2", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.005)
    p.add_argument("--u-max", type=int, default=10)
    p.add_argument("--max-outer", type=int, default=2000)
    p.add_argument("--no-escalate", dest="escalate", action="store_false",
                   help="keep the CV-selected alpha even if the cutoff exceeds omega1")
    p.add_argument("--jobs", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparse-lingam",
        description="Sparse ICA-based estimation of linear non-Gaussian DAGs.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample data from a random linear non-Gaussian DAG")
    _add_graph_options(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output-dir", type=Path, required=True)

    p = sub.add_parser("fit", help="estimate B from a data CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output-dir", type=Path, required=True)
    p.add_argument("--header", action="store_true", help="first CSV row holds column names")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--window", type=int, default=None, metavar="LEN",
                   help="treat the first input column as a series cut into windows of LEN")
    p.add_argument("--log1p", action="store_true", help="apply log(1+x) before windowing")
    p.add_argument("--seed", type=int, default=None)
    _add_solver_options(p)

    p = sub.add_parser("benchmark", help="simulate, fit and score replicate datasets")
    _add_graph_options(p)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=None, help="seed of replicate 0")
    p.add_argument("--output-dir", type=Path, required=True)
    _add_solver_options(p)

    p = sub.add_parser("heatmap", help="render a B matrix CSV as a PPM image")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--cell", type=int, default=12, help="pixels per matrix cell")
    return parser


def _solver_config(args, seed):
    try:
        return SolverConfig(
            lam=args.lam, gamma=args.gamma, rho=args.rho, eta=args.eta,
            u_max=args.u_max, max_outer=args.max_outer, seed=seed,
        )
    except ParameterError as exc:
        raise _Failure(EXIT_PARAM, str(exc))


def _simulate_truth(d, edges, graph, noise, seed):
    edges = d if edges is None else edges
    if graph == "er":
        skeleton = gen_er_graph(d, edges, seed)
    else:
        skeleton = gen_sf_graph(d, max(1, int(round(edges / d))), seed)
    return assign_weights_and_noises(skeleton, seed, noise=noise)


def _run_config(args, seed, drop=("output_dir", "output", "func", "verbose")):
    doc = {}
    for key, value in vars(args).items():
        if key in drop:
            continue
        if isinstance(value, AlphaGrid):
            value = list(value.values)
        elif isinstance(value, Path):
            value = str(value)
        doc[key] = value
    doc["seed"] = seed
    return doc


def cmd_simulate(args):
    seed = args.seed if args.seed is not None else _default_seed()
    truth = _simulate_truth(args.d, args.edges, args.graph, args.noise, seed)
    data = sample_data(truth, args.n, seed)
    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "data.csv", data.values)
    (out / "truth.json").write_text(truth.to_json() + "\n", encoding="utf-8")
    write_json(out / "config.json", _run_config(args, seed))
    print(f"simulated {args.graph.upper()} graph: d={args.d} edges={truth.n_edges} "
          f"N={args.n} seed={seed} -> {out}")
    return EXIT_OK


def _load_input(args):
    if args.window is not None:
        series = load_series(args.input, delimiter=args.delimiter, header=args.header)
        return slice_windows(series, args.window, transform=args.log1p)
    return load_csv(args.input, delimiter=args.delimiter, header=args.header)


def _estimate(data, args, cfg):
    return estimate(
        data, cfg, alpha=args.alpha, grid=args.alpha_grid, k_folds=args.k_folds,
        omega1=args.omega1, omega2=args.omega2, escalate=args.escalate, jobs=args.jobs,
    )


def cmd_fit(args):
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = _solver_config(args, seed)
    data = _load_input(args)
    result = _estimate(data, args, cfg)
    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "B.csv", result.B)
    (out / "order.txt").write_text(" ".join(str(k) for k in result.causal_order) + "\n")
    diag = result.diagnostics()
    diag["n_samples"] = data.n_samples
    diag["n_vars"] = data.n_vars
    write_json(out / "diagnostics.json", diag)
    write_json(out / "config.json", _run_config(args, seed))
    print(f"fit d={data.n_vars} N={data.n_samples}: alpha={result.alpha_used:.4g} "
          f"edges={diag['n_edges']} cutoff={result.cutoff_applied:.3g} "
          f"converged={result.converged}")
    return EXIT_OK if result.converged else EXIT_SOLVER


def _benchmark_replicate(task):
    r, seed, args = task
    row = {"replicate": r, "seed": seed}
    try:
        truth = _simulate_truth(args.d, args.edges, args.graph, args.noise, seed)
        data = sample_data(truth, args.n, seed)
        result = _estimate(data, args, _solver_config(args, seed))
    except (SparseLingamError, _Failure) as exc:
        row.update({m: None for m in METRICS})
        row.update(n_edges=None, alpha=None, cutoff=None, converged=False,
                   status=f"error: {type(exc).__name__}")
        return row
    report = evaluate(result.B, truth.B)
    row.update(report.as_dict())
    row.update(alpha=result.alpha_used, cutoff=result.cutoff_applied,
               converged=result.converged,
               status="ok" if result.converged else "nonconverged")
    return row


def summarize(rows):
    """Median, quartiles and range of each metric over the ``ok`` rows."""
    ok = [r for r in rows if r["status"] == "ok"]
    doc = {"n_replicates": len(rows), "n_ok": len(ok), "metrics": {}}
    for m in METRICS:
        vals = np.array([r[m] for r in ok], dtype=float)
        if vals.size == 0:
            doc["metrics"][m] = None
            continue
        q1, med, q3 = np.percentile(vals, [25, 50, 75])
        doc["metrics"][m] = {
            "median": float(med), "q1": float(q1), "q3": float(q3),
            "min": float(vals.min()), "max": float(vals.max()),
        }
    return doc


_BENCH_COLUMNS = ("replicate", "seed") + METRICS + ("n_edges", "alpha", "cutoff", "converged", "status")


def write_metrics_csv(path, rows):
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(_BENCH_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row[c]) for c in _BENCH_COLUMNS) + "\n")


def cmd_benchmark(args):
    seed = args.seed if args.seed is not None else _default_seed()
    if args.replicates < 1:
        raise _Failure(EXIT_PARAM, "--replicates must be >= 1")
    _solver_config(args, seed)
    fold_jobs, args.jobs = args.jobs, 1
    tasks = [(r, seed + r, args) for r in range(args.replicates)]
    if fold_jobs > 1:
        with ProcessPoolExecutor(max_workers=fold_jobs) as pool:
            rows = list(pool.map(_benchmark_replicate, tasks))
    else:
        rows = [_benchmark_replicate(t) for t in tasks]
    args.jobs = fold_jobs
    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(out / "metrics.csv", rows)
    summary = summarize(rows)
    summary["config"] = _run_config(args, seed)
    write_json(out / "summary.json", summary)
    med = summary["metrics"]
    line = " ".join(
        f"{m}={med[m]['median']:.3g}" for m in METRICS if med[m] is not None
    )
    print(f"benchmark {summary['n_ok']}/{summary['n_replicates']} ok: median {line}")
    return EXIT_OK


def cmd_heatmap(args):
    B = read_matrix_csv(args.input, square=True)
    write_ppm(args.output, heatmap_image(B, cell=args.cell))
    print(f"wrote {B.shape[0]}x{B.shape[1]} heatmap to {args.output}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "benchmark": cmd_benchmark,
    "heatmap": cmd_heatmap,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, MissingDataError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ParameterError, InsufficientDataError, DegenerateColumnError,
            RankDeficiencyError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (DivergenceError, SelectionError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
