"""Command-line interface.

Every subcommand writes into a fresh run directory (``<outdir>/<timestamp>_seed<seed>``
unless ``--run-dir`` is given) holding ``manifest.json`` plus its artifacts.
Options come from, in decreasing precedence, the command line, a JSON file
given with ``--config``, and built-in defaults.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.
"""

import argparse
import json
import logging
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import BenchmarkConfig, benchmark
from .correlation import ESTIMATOR_ALIASES, estimate_correlation, psd_repair
from .errors import InputError, PreconditionError, SolverError, SkepticError
from .evaluation import (
    concentration_check,
    confusion,
    default_grid,
    oracle_score,
    roc_points,
    solve_path,
    stars_select,
)
from .io import (
    ingest_csv,
    read_edge_list,
    write_correlation,
    write_data_csv,
    write_edge_list,
    write_estimate,
    write_json,
    write_matrix_csv,
)
from .preprocess import log_returns, winsorize_mad
from .solvers import SOLVERS, SolverConfig, solve
from .synthetic import TRANSFORMS, build_model, generate_graph, model_manifest, sample_npn

log = logging.getLogger("skeptic")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


DEFAULTS = {
    "simulate": {"d": 100, "n": 200, "transform": "cdf", "seed": 0, "s": 0.125, "max_degree": 4},
    "estimate": {
        "estimator": "spearman", "solver": "glasso", "lam": None, "stars": False, "rule": "AND",
        "log_returns": False, "winsorize": None, "psd_floor": 1e-4, "header": None, "delimiter": ",",
        "seed": 0, "n_lambdas": 30, "min_ratio": 0.05, "stars_cap": 0.05, "stars_subsamples": 20,
        "stars_size": None,
    },
    "path": {
        "estimator": "spearman", "solver": "glasso", "truth": None, "n_lambdas": 30,
        "min_ratio": 0.05, "rule": "AND", "psd_floor": 1e-4, "header": None, "delimiter": ",",
        "log_returns": False, "winsorize": None, "seed": 0,
    },
    "benchmark": {},
    "eval": {"seed": 0},
    "concentration": {"d": 50, "n": [250, 1000, 4000], "trials": 50, "seed": 0},
}


def build_parser():
    S = argparse.SUPPRESS
    parser = _Parser(prog="skeptic", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON file of option defaults", default=S)
        p.add_argument("--outdir", default=S, help="parent directory for run directories")
        p.add_argument("--run-dir", dest="run_dir", default=S, help="exact output directory")
        p.add_argument("--seed", type=int, default=S)
        p.add_argument("-v", "--verbose", action="store_true", default=S)

    def data_opts(p):
        p.add_argument("--input", default=S)
        p.add_argument("--estimator", choices=sorted(ESTIMATOR_ALIASES), default=S)
        p.add_argument("--solver", choices=SOLVERS, default=S)
        p.add_argument("--rule", choices=["AND", "OR"], default=S)
        p.add_argument("--psd-floor", dest="psd_floor", type=float, default=S)
        hdr = p.add_mutually_exclusive_group()
        hdr.add_argument("--header", dest="header", action="store_true", default=S)
        hdr.add_argument("--no-header", dest="header", action="store_false", default=S)
        p.add_argument("--delimiter", default=S)
        p.add_argument("--log-returns", dest="log_returns", action="store_true", default=S)
        p.add_argument("--winsorize", type=float, default=S, metavar="K",
                       help="clip columns to mean +/- K mean absolute deviations")
        p.add_argument("--n-lambdas", dest="n_lambdas", type=int, default=S)
        p.add_argument("--min-ratio", dest="min_ratio", type=float, default=S)

    p = sub.add_parser("simulate", help="sample a synthetic nonparanormal dataset")
    common(p)
    p.add_argument("--d", type=int, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--transform", choices=TRANSFORMS, default=S)
    p.add_argument("--s", type=float, default=S)
    p.add_argument("--max-degree", dest="max_degree", type=int, default=S)

    p = sub.add_parser("estimate", help="correlation matrix + sparse precision estimate")
    common(p)
    data_opts(p)
    tune = p.add_mutually_exclusive_group()
    tune.add_argument("--lambda", dest="lam", type=float, default=S)
    tune.add_argument("--stars", action="store_true", default=S)
    p.add_argument("--stars-cap", dest="stars_cap", type=float, default=S)
    p.add_argument("--stars-subsamples", dest="stars_subsamples", type=int, default=S)
    p.add_argument("--stars-size", dest="stars_size", type=int, default=S)

    p = sub.add_parser("path", help="regularization path, optionally scored against a truth graph")
    common(p)
    data_opts(p)
    p.add_argument("--truth", default=S, help="true edge list (1-indexed, tab-separated)")

    p = sub.add_parser("benchmark", help="synthetic FPR/FNR benchmark")
    common(p)
    p.add_argument("--d", type=int, default=S)
    p.add_argument("--n", dest="n_list", type=int, nargs="+", default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--transforms", nargs="+", default=S)
    p.add_argument("--estimators", nargs="+", default=S)
    p.add_argument("--solvers", nargs="+", choices=SOLVERS, default=S)
    p.add_argument("--n-lambdas", dest="n_lambdas", type=int, default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--no-roc", dest="keep_roc", action="store_false", default=S)

    p = sub.add_parser("eval", help="confusion counts of an edge list against the truth")
    common(p)
    p.add_argument("--estimate", required=True, help="estimated edge list")
    p.add_argument("--truth", required=True, help="true edge list")
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("concentration", help="max-norm deviation of the SKEPTIC estimators")
    common(p)
    p.add_argument("--d", type=int, default=S)
    p.add_argument("--n", type=int, nargs="+", default=S)
    p.add_argument("--trials", type=int, default=S)
    return parser


COMMON_KEYS = {"config", "outdir", "run_dir", "seed", "verbose"}


def _known_keys(command):
    keys = set(DEFAULTS[command]) | COMMON_KEYS
    sub = next(a for a in build_parser()._actions if isinstance(a, argparse._SubParsersAction))
    keys |= {a.dest for a in sub.choices[command]._actions}
    if command == "benchmark":
        keys |= set(BenchmarkConfig.__dataclass_fields__)
    return keys - {"help"}


def resolve_options(command, cli):
    """Merge defaults < config file < command line."""
    opts = dict(DEFAULTS[command])
    cfg_path = cli.get("config")
    if cfg_path:
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                file_opts = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        if not isinstance(file_opts, dict):
            raise UsageError("config file must hold a JSON object")
        if "lambda" in file_opts:
            file_opts["lam"] = file_opts.pop("lambda")
        unknown = sorted(set(file_opts) - _known_keys(command))
        if unknown:
            raise UsageError(f"unknown keys in config {cfg_path}: {unknown}")
        opts.update(file_opts)
    opts.update(cli)
    return opts


def _run_dir(opts, seed):
    if opts.get("run_dir"):
        path = Path(opts["run_dir"])
    else:
        stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        base = Path(opts.get("outdir", "runs"))
        path = base / f"{stamp}_seed{seed}"
        i = 1
        while path.exists():
            path = base / f"{stamp}_seed{seed}_{i}"
            i += 1
    path.mkdir(parents=True, exist_ok=True)
    return path


def _versions():
    import numba
    import scipy

    return {
        "skeptic": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def _load_dataset(opts):
    if not opts.get("input"):
        raise UsageError("--input is required")
    ds = ingest_csv(opts["input"], header=opts.get("header"), delimiter=opts.get("delimiter", ","))
    if opts.get("log_returns"):
        ds = log_returns(ds)
    if opts.get("winsorize") is not None:
        ds = winsorize_mad(ds, opts["winsorize"])
    return ds


def _correlation_for(ds, opts, cfg):
    S = estimate_correlation(ds.matrix, opts["estimator"], labels=ds.column_labels)
    if opts["solver"] == "glasso":
        S = psd_repair(S, cfg.psd_floor)
    return S


def cmd_simulate(opts, out):
    rng = np.random.default_rng(opts["seed"])
    graph = generate_graph(opts["d"], opts["s"], opts["max_degree"], rng)
    model = build_model(graph, transform=opts["transform"])
    x = sample_npn(model, opts["n"], rng)
    write_data_csv(out / "samples.csv", x)
    write_edge_list(out / "graph_edges.tsv", graph)
    write_matrix_csv(out / "omega0.csv", model.omega0)
    write_matrix_csv(out / "sigma0.csv", model.sigma0)
    manifest = model_manifest(model, s=opts["s"], seed=opts["seed"], n=opts["n"],
                              max_degree=opts["max_degree"])
    write_json(out / "model.json", manifest)
    return {"edge_count": len(graph)}


def cmd_estimate(opts, out):
    cfg = SolverConfig(psd_floor=opts["psd_floor"])
    ds = _load_dataset(opts)
    S = _correlation_for(ds, opts, cfg)
    write_correlation(out, S)
    extra = {"provenance": ds.provenance, "n": ds.matrix.shape[0], "d": ds.matrix.shape[1]}
    if opts.get("stars"):
        grid = default_grid(S, opts["solver"], opts["n_lambdas"], opts["min_ratio"])
        res = stars_select(
            ds.matrix, opts["estimator"], opts["solver"], grid=grid,
            subsample_size=opts.get("stars_size"), num_subsamples=opts["stars_subsamples"],
            instability_cap=opts["stars_cap"], rng=opts["seed"], cfg=cfg, rule=opts["rule"],
        )
        lam = res.lam
        write_json(out / "stars.json", {
            "lambda": res.lam, "warning": res.warning, "lambdas": res.lambdas,
            "instability": res.instability, "monotone_instability": res.monotone_instability,
        })
    elif opts.get("lam") is not None:
        lam = float(opts["lam"])
    else:
        raise UsageError("estimate needs --lambda or --stars")
    est = solve(S, opts["solver"], lam, cfg, rule=opts["rule"])
    write_estimate(out, est)
    extra.update({"lambda": lam, "edge_count": len(est.edge_set)})
    return extra


def cmd_path(opts, out):
    cfg = SolverConfig(psd_floor=opts["psd_floor"])
    ds = _load_dataset(opts)
    S = _correlation_for(ds, opts, cfg)
    grid = default_grid(S, opts["solver"], opts["n_lambdas"], opts["min_ratio"])
    path = solve_path(S, opts["solver"], grid, cfg, rule=opts["rule"], skip_failures=True)
    with open(out / "path.csv", "w", encoding="utf-8") as fh:
        fh.write("lambda,edge_count\n")
        for lam, est in zip(path.lambdas, path.estimates):
            fh.write(f"{lam!r},{len(est.edge_set)}\n")
    info = {"path_length": len(path), "failed_lambdas": path.failures}
    if opts.get("truth"):
        truth = read_edge_list(opts["truth"], S.d)
        with open(out / "roc.csv", "w", encoding="utf-8") as fh:
            fh.write("lambda,fpr,tpr\n")
            for lam, (f, t) in zip(path.lambdas, roc_points(path, truth)):
                fh.write(f"{lam!r},{f!r},{t!r}\n")
        lam, cc = oracle_score(path, truth)
        write_json(out / "oracle.json", {"lambda_star": lam, "oracle_score": cc.score, **cc.as_dict()})
        info["oracle_score"] = cc.score
    return info


def cmd_benchmark(opts, out):
    keys = set(BenchmarkConfig.__dataclass_fields__)
    raw = {k: v for k, v in opts.items() if k in keys}
    try:
        config = BenchmarkConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    result = benchmark(config)
    (out / "benchmark.csv").write_text(result.table_csv(), encoding="utf-8")
    (out / "benchmark.txt").write_text(result.table_text(), encoding="utf-8")
    if config.keep_roc:
        (out / "roc.csv").write_text(result.roc_csv(), encoding="utf-8")
    print(result.table_text(), end="")
    return {"config": config.to_dict(), "failed_trials": len(result.failures())}


def cmd_eval(opts, out):
    truth = read_edge_list(opts["truth"], opts["d"])
    est = read_edge_list(opts["estimate"], opts["d"])
    cc = confusion(est, truth)
    write_json(out / "confusion.json", {**cc.as_dict(), "oracle_score": cc.score})
    print(json.dumps(cc.as_dict()))
    return cc.as_dict()


def cmd_concentration(opts, out):
    report = concentration_check(opts["d"], opts["n"], opts["trials"], rng=opts["seed"])
    write_json(out / "concentration.json", report)
    return {"total_violations": report["total_violations"], "rate_ratio": report["rate_ratio"]}


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "path": cmd_path,
    "benchmark": cmd_benchmark,
    "eval": cmd_eval,
    "concentration": cmd_concentration,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    cli = {k: v for k, v in vars(args).items() if k != "command"}
    logging.basicConfig(level=logging.INFO if cli.get("verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve_options(args.command, cli)
        seed = opts.get("seed", 0)
        out = _run_dir(opts, seed)
        started = datetime.now(timezone.utc).isoformat()
        t0 = time.perf_counter()
        info = COMMANDS[args.command](opts, out)
        elapsed = time.perf_counter() - t0
    except UsageError as exc:
        print(f"skeptic: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, PreconditionError, OSError) as exc:
        print(f"skeptic: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"skeptic: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SkepticError as exc:
        print(f"skeptic: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    manifest = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "options": {k: v for k, v in opts.items() if k not in ("verbose",)},
        "seed": seed,
        "versions": _versions(),
        "started": started,
        "elapsed_seconds": elapsed,
        "artifacts": sorted(p.name for p in out.iterdir() if p.name != "manifest.json"),
        "result": info,
    }
    write_json(out / "manifest.json", manifest)
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
