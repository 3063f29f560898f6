"""Synthetic graph-recovery benchmark (oracle FPR/FNR tables and ROC dumps)."""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .correlation import ESTIMATOR_ALIASES, estimate_correlation, psd_repair
from .errors import SkepticError
from .evaluation import (
    DEFAULT_MIN_RATIO,
    DEFAULT_N_LAMBDAS,
    default_grid,
    interpolate_tpr,
    oracle_score,
    roc_points,
    solve_path,
)
from .solvers import SolverConfig
from .synthetic import MAX_DEGREE, SPARSITY_S, apply_transform, build_model, generate_graph, sample_gaussian

log = logging.getLogger(__name__)

DISPLAY = {
    "skeptic_rho": "Spearman",
    "skeptic_tau": "Kendall",
    "pearson": "Normal",
    "normal_score": "NormalScore",
}
TRANSFORM_ALIASES = {"normal": "linear", "none": "linear", "linear": "linear", "cdf": "cdf", "power": "power"}


@dataclass
class BenchmarkConfig:
    d: int = 100
    n_list: tuple = (200,)
    transforms: tuple = ("cdf", "linear", "power")
    estimators: tuple = ("pearson", "spearman", "kendall")
    solvers: tuple = ("glasso",)
    trials: int = 20
    n_lambdas: int = DEFAULT_N_LAMBDAS
    min_ratio: float = DEFAULT_MIN_RATIO
    seed: int = 0
    s: float = SPARSITY_S
    max_degree: int = MAX_DEGREE
    rule: str = "AND"
    workers: int = 1
    keep_roc: bool = True

    @classmethod
    def from_dict(cls, raw):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown benchmark config keys: {sorted(unknown)}")
        vals = dict(raw)
        for key in ("n_list", "transforms", "estimators", "solvers"):
            if key in vals:
                v = vals[key]
                vals[key] = tuple(v) if isinstance(v, (list, tuple)) else (v,)
        cfg = cls(**vals)
        cfg.validate()
        return cfg

    def validate(self):
        for t in self.transforms:
            if t not in TRANSFORM_ALIASES:
                raise ValueError(f"unknown transform {t!r}")
        for e in self.estimators:
            if e not in ESTIMATOR_ALIASES:
                raise ValueError(f"unknown estimator {e!r}")
        if self.trials < 1 or self.d < 2:
            raise ValueError("need trials >= 1 and d >= 2")

    def to_dict(self):
        out = asdict(self)
        for key in ("n_list", "transforms", "estimators", "solvers"):
            out[key] = list(out[key])
        return out


@dataclass
class BenchmarkResult:
    config: BenchmarkConfig
    records: list = field(default_factory=list)
    roc: list = field(default_factory=list)

    def cells(self):
        """Aggregate per (transform, n, solver, estimator); rates in percent."""
        groups = {}
        for r in self.records:
            key = (r["transform"], r["n"], r["solver"], r["estimator"])
            groups.setdefault(key, []).append(r)
        out = []
        for key in self._ordered_keys():
            recs = groups.get(key, [])
            ok = [r for r in recs if r["ok"]]
            fpr = np.array([r["fpr"] for r in ok]) * 100
            fnr = np.array([r["fnr"] for r in ok]) * 100
            out.append({
                "transform": key[0],
                "n": key[1],
                "solver": key[2],
                "estimator": key[3],
                "trials_ok": len(ok),
                "trials_failed": len(recs) - len(ok),
                "fpr_mean": _mean(fpr),
                "fpr_sd": _sd(fpr),
                "fnr_mean": _mean(fnr),
                "fnr_sd": _sd(fnr),
                "oracle_score_mean": _mean(fpr + fnr),
            })
        return out

    def _ordered_keys(self):
        c = self.config
        return [
            (TRANSFORM_ALIASES[t], n, s, ESTIMATOR_ALIASES[e])
            for t in c.transforms
            for n in c.n_list
            for s in c.solvers
            for e in c.estimators
        ]

    def trial_scores(self, transform, n, solver, estimator):
        """Per-trial oracle scores (fractions, not percent) in trial order."""
        estimator = ESTIMATOR_ALIASES[estimator]
        transform = TRANSFORM_ALIASES[transform]
        recs = [
            r for r in self.records
            if (r["transform"], r["n"], r["solver"], r["estimator"]) == (transform, n, solver, estimator)
        ]
        return [r["fpr"] + r["fnr"] if r["ok"] else np.nan for r in sorted(recs, key=lambda r: r["trial"])]

    def average_roc(self, transform, n, solver, estimator, fpr_grid):
        """Trial-averaged TPR on ``fpr_grid`` (step interpolation per trial)."""
        estimator = ESTIMATOR_ALIASES[estimator]
        transform = TRANSFORM_ALIASES[transform]
        per_trial = {}
        for p in self.roc:
            if (p["transform"], p["n"], p["solver"], p["estimator"]) == (transform, n, solver, estimator):
                per_trial.setdefault(p["trial"], []).append((p["fpr"], p["tpr"]))
        curves = [interpolate_tpr(pts, fpr_grid) for _, pts in sorted(per_trial.items())]
        return np.mean(curves, axis=0) if curves else np.full(len(fpr_grid), np.nan)

    def table_csv(self):
        buf = io.StringIO()
        fields = [
            "transform", "n", "solver", "estimator", "trials_ok", "trials_failed",
            "fpr_mean", "fpr_sd", "fnr_mean", "fnr_sd", "oracle_score_mean", "fpr_cell", "fnr_cell",
        ]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for cell in self.cells():
            row = dict(cell)
            row["estimator"] = DISPLAY.get(cell["estimator"], cell["estimator"])
            for k in ("fpr_mean", "fpr_sd", "fnr_mean", "fnr_sd", "oracle_score_mean"):
                row[k] = f"{cell[k]:.6f}"
            row["fpr_cell"] = format_cell(cell["fpr_mean"], cell["fpr_sd"])
            row["fnr_cell"] = format_cell(cell["fnr_mean"], cell["fnr_sd"])
            w.writerow(row)
        return buf.getvalue()

    def table_text(self):
        """Aligned text in the layout of the published comparison table."""
        c = self.config
        ests = [ESTIMATOR_ALIASES[e] for e in c.estimators]
        cells = {(x["transform"], x["n"], x["solver"], x["estimator"]): x for x in self.cells()}
        head1 = ["tf", "n"]
        head2 = ["", ""]
        for s in c.solvers:
            for e in ests:
                head1 += [f"{s}:{DISPLAY.get(e, e)}", ""]
                head2 += ["FPR(%)", "FNR(%)"]
        rows = [head1, head2]
        for t in c.transforms:
            t = TRANSFORM_ALIASES[t]
            for i, n in enumerate(c.n_list):
                row = [t if i == 0 else "", str(n)]
                for s in c.solvers:
                    for e in ests:
                        x = cells[(t, n, s, e)]
                        row += [format_cell(x["fpr_mean"], x["fpr_sd"]), format_cell(x["fnr_mean"], x["fnr_sd"])]
                rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows) + "\n"

    def roc_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["transform", "n", "solver", "estimator", "trial", "lambda", "fpr", "tpr"])
        for p in self.roc:
            w.writerow([
                p["transform"], p["n"], p["solver"], DISPLAY.get(p["estimator"], p["estimator"]),
                p["trial"], repr(p["lambda"]), repr(p["fpr"]), repr(p["tpr"]),
            ])
        return buf.getvalue()

    def failures(self):
        return [r for r in self.records if not r["ok"]]


def _mean(a):
    return float(np.mean(a)) if len(a) else float("nan")


def _sd(a):
    if len(a) == 0:
        return float("nan")
    return float(np.std(a, ddof=1)) if len(a) > 1 else 0.0


def format_cell(mean, sd):
    if np.isnan(mean):
        return "NA"
    return f"{mean:.0f}({sd:.1f})"


def trial_seed(master, n, trial):
    return np.random.SeedSequence([int(master), int(n), int(trial)])


def run_trial(config, n, trial, estimator_fns=None, path_fns=None):
    """One replicate: a fresh graph and Gaussian draw shared by every cell."""
    estimator_fns = estimator_fns or {}
    path_fns = path_fns or {}
    cfg = SolverConfig()
    rng = np.random.default_rng(trial_seed(config.seed, n, trial))
    graph = generate_graph(config.d, config.s, config.max_degree, rng)
    model = build_model(graph)
    z = sample_gaussian(model.sigma0, n, rng)
    records, roc = [], []
    for tf in config.transforms:
        tf = TRANSFORM_ALIASES[tf]
        x = apply_transform(z, tf)
        for est_name in config.estimators:
            kind = ESTIMATOR_ALIASES[est_name]
            for solver in config.solvers:
                base = {"transform": tf, "n": n, "solver": solver, "estimator": kind, "trial": trial}
                try:
                    if kind in estimator_fns:
                        S = estimator_fns[kind](x, model)
                    else:
                        S = estimate_correlation(x, kind)
                    if solver in path_fns:
                        path = path_fns[solver](S, model)
                    else:
                        if solver == "glasso":
                            S = psd_repair(S, cfg.psd_floor)
                        grid = default_grid(S, solver, config.n_lambdas, config.min_ratio)
                        path = solve_path(S, solver, grid, cfg, rule=config.rule, skip_failures=True)
                    if not len(path):
                        raise SkepticError("every lambda on the path failed")
                    lam, cc = oracle_score(path, graph)
                except SkepticError as exc:
                    log.warning("trial %d %s/%s/%s failed: %s", trial, tf, kind, solver, exc)
                    records.append({**base, "ok": False, "error": str(exc)})
                    continue
                records.append({
                    **base, "ok": True, "lambda_star": lam, "fpr": cc.fpr, "fnr": cc.fnr,
                    "fp": cc.fp, "fn": cc.fn, "true_edges": len(graph),
                })
                if config.keep_roc:
                    for l, (f, t) in zip(path.lambdas, roc_points(path, graph)):
                        roc.append({**base, "lambda": l, "fpr": f, "tpr": t})
    return records, roc


def _run_trial_packed(args):
    return run_trial(*args)


def benchmark(config, estimator_fns=None, path_fns=None):
    """Run every (n, trial) replicate and collect per-cell records.

    ``estimator_fns`` maps an estimator kind to ``f(data, model)`` returning a
    CorrelationMatrix; ``path_fns`` maps a solver name to ``f(S, model)``
    returning a RegPath.  Both exist for instrumentation and tests.
    """
    if isinstance(config, dict):
        config = BenchmarkConfig.from_dict(config)
    config.validate()
    tasks = [(config, n, t, estimator_fns, path_fns) for n in config.n_list for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_run_trial_packed, tasks))
    else:
        results = [_run_trial_packed(t) for t in tasks]
    out = BenchmarkResult(config)
    for recs, roc in results:
        out.records.extend(recs)
        out.roc.extend(roc)
    return out
