"""Graph-recovery scoring, regularization paths, StARS and concentration checks."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .correlation import estimate_correlation, psd_repair
from .errors import InputError, SkepticError
from .graph import GraphSpec
from .solvers import SolverConfig, solve
from .solvers.base import matrix_of

log = logging.getLogger(__name__)

DEFAULT_N_LAMBDAS = 30
DEFAULT_MIN_RATIO = 0.05


@dataclass(frozen=True)
class ConfusionCounts:
    fp: int
    fn: int
    n_true: int
    n_pairs: int

    @property
    def fpr_exact(self):
        negatives = self.n_pairs - self.n_true
        return Fraction(self.fp, negatives) if negatives else Fraction(0)

    @property
    def fnr_exact(self):
        return Fraction(self.fn, self.n_true)

    @property
    def fpr(self):
        return float(self.fpr_exact)

    @property
    def fnr(self):
        return float(self.fnr_exact)

    @property
    def score_exact(self):
        return self.fpr_exact + self.fnr_exact

    @property
    def score(self):
        return float(self.score_exact)

    def as_dict(self):
        return {"fp": self.fp, "fn": self.fn, "fpr": self.fpr, "fnr": self.fnr}


def confusion(est, truth):
    """False positive/negative counts and rates of ``est`` against ``truth``."""
    if est.d != truth.d:
        raise InputError(f"dimension mismatch: {est.d} vs {truth.d}")
    if not truth.edges:
        raise InputError("true edge set is empty; the false negative rate is undefined")
    fp = len(est.edges - truth.edges)
    fn = len(truth.edges - est.edges)
    return ConfusionCounts(fp, fn, len(truth.edges), truth.n_pairs)


@dataclass
class RegPath:
    lambdas: list
    estimates: list
    estimator_kind: str = ""
    solver: str = ""
    failures: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.lambdas) != len(self.estimates):
            raise ValueError("lambdas and estimates differ in length")
        if any(b >= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ValueError("lambdas must be strictly decreasing")

    def __len__(self):
        return len(self.lambdas)

    def edge_counts(self):
        return [len(e.edge_set) for e in self.estimates]


def lambda_max(S, solver="glasso"):
    """Smallest tuning value that returns the empty graph.

    For penalized solvers this is the largest off-diagonal |S_jk|.  CLIME's
    diagonal solution ``(1 - Delta) e_j`` is feasible once
    ``Delta >= m / (1 + m)`` with m that same maximum.
    """
    Sm = matrix_of(S)
    off = np.abs(Sm - np.diag(np.diag(Sm)))
    m = float(off.max()) if Sm.shape[0] > 1 else 0.0
    if solver == "clime":
        return m / (1.0 + m)
    return m


def default_grid(S, solver="glasso", n_lambdas=DEFAULT_N_LAMBDAS, min_ratio=DEFAULT_MIN_RATIO):
    """Log-spaced grid from ``lambda_max`` down to ``min_ratio * lambda_max``."""
    top = lambda_max(S, solver)
    if top <= 0:
        top = 1e-3
    return list(np.geomspace(top, top * min_ratio, n_lambdas))


def solve_path(S, solver, grid, cfg=None, rule="AND", skip_failures=False):
    """Fit ``solver`` at every grid value, warm-starting where possible.

    Solver errors are re-raised with the failing lambda in the message unless
    ``skip_failures`` is set, in which case the lambda is dropped and recorded
    in ``RegPath.failures``.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise InputError("empty grid")
    if any(g <= 0 for g in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise InputError("grid must be positive and strictly decreasing")
    cfg = cfg or SolverConfig()
    kind = getattr(S, "estimator_kind", "")
    lambdas, estimates, failures = [], [], []
    prev = None
    for lam in grid:
        try:
            est = solve(S, solver, lam, cfg, init=prev, rule=rule)
        except SkepticError as exc:
            if not skip_failures:
                raise type(exc)(f"at lambda={lam:.6g}: {exc}") from exc
            failures.append((lam, str(exc)))
            continue
        lambdas.append(lam)
        estimates.append(est)
        prev = est
    return RegPath(lambdas, estimates, kind, solver, failures)


def oracle_score(path, truth):
    """Grid minimizer of FNR + FPR; ties go to the larger lambda.

    Returns ``(lambda_star, ConfusionCounts)``.
    """
    if not len(path):
        raise InputError("empty path")
    best = None
    for lam, est in zip(path.lambdas, path.estimates):
        cc = confusion(est.edge_set, truth)
        if best is None or cc.score_exact < best[1].score_exact:
            best = (lam, cc)
    return best


def roc_points(path, truth):
    """(FPR, TPR) per path entry, in path (decreasing lambda) order."""
    out = []
    for est in path.estimates:
        cc = confusion(est.edge_set, truth)
        out.append((cc.fpr, 1.0 - cc.fnr))
    return out


def interpolate_tpr(points, fpr_grid):
    """Step-interpolate a ROC curve: best TPR achieved at FPR <= each grid value."""
    pts = sorted(points)
    out = []
    for f in fpr_grid:
        reach = [t for fp, t in pts if fp <= f + 1e-12]
        out.append(max(reach) if reach else 0.0)
    return out


# --- StARS -------------------------------------------------------------------


@dataclass
class StarsResult:
    lam: float
    lambdas: list
    instability: list
    monotone_instability: list
    warning: bool = False


def _path_adjacency(S, solver, grid, cfg, rule):
    path = solve_path(S, solver, grid, cfg, rule=rule, skip_failures=True)
    got = dict(zip(path.lambdas, path.estimates))
    d = matrix_of(S).shape[0]
    mats = []
    for lam in grid:
        est = got.get(lam)
        mats.append(est.edge_set.adjacency() if est is not None else np.zeros((d, d), bool))
    return np.array(mats)


def stars_select(
    data,
    estimator_kind="spearman",
    solver="glasso",
    grid=None,
    subsample_size=None,
    num_subsamples=20,
    instability_cap=0.05,
    rng=None,
    cfg=None,
    rule="AND",
    subsamples=None,
):
    """Stability-based choice of lambda.

    For each lambda, instability is the mean over vertex pairs of
    ``2 xi (1 - xi)``, xi being the pair's selection frequency across
    subsamples.  Walking from the largest lambda down, the instability is
    made monotone by a running maximum; the smallest lambda whose monotone
    instability stays within ``instability_cap`` is returned.  If even the
    largest lambda exceeds the cap, the largest lambda is returned with
    ``warning`` set.

    ``subsamples`` may be given explicitly as a list of row-index arrays.
    """
    data = np.asarray(data, dtype=float)
    n, d = data.shape
    cfg = cfg or SolverConfig()
    if subsample_size is None:
        subsample_size = min(int(math.floor(10 * math.sqrt(n))), n - 1)
    if subsamples is None:
        if not 1 < subsample_size < n:
            raise InputError(f"subsample_size must be in (1, {n}), got {subsample_size}")
        rng = np.random.default_rng(rng)
        subsamples = [rng.choice(n, subsample_size, replace=False) for _ in range(num_subsamples)]

    def prepared(rows):
        S = estimate_correlation(data[rows], estimator_kind)
        if solver == "glasso":
            S = psd_repair(S, cfg.psd_floor)
        return S

    if grid is None:
        grid = default_grid(prepared(np.arange(n)), solver)
    grid = [float(g) for g in grid]

    freq = np.zeros((len(grid), d, d))
    for rows in subsamples:
        freq += _path_adjacency(prepared(np.asarray(rows)), solver, grid, cfg, rule)
    freq /= len(subsamples)
    iu = np.triu_indices(d, 1)
    inst = [float(np.mean(2 * f[iu] * (1 - f[iu]))) if d > 1 else 0.0 for f in freq]
    mono = list(np.maximum.accumulate(inst))
    ok = [i for i, v in enumerate(mono) if v <= instability_cap]
    if not ok:
        log.warning("every lambda exceeds the instability cap %.3g", instability_cap)
        return StarsResult(grid[0], grid, inst, mono, warning=True)
    return StarsResult(grid[ok[-1]], grid, inst, mono)


# --- concentration -----------------------------------------------------------


def rho_bound(d, n):
    return 8.0 * math.pi * math.sqrt(math.log(d) / n)


def tau_bound(d, n):
    return 2.45 * math.pi * math.sqrt(math.log(d) / n)


def concentration_check(d, n_list, trials, rng=None, sigma0=None):
    """Monte Carlo check of the max-norm deviation of both SKEPTIC estimators.

    Data are Gaussian with correlation ``sigma0`` (by default the benchmark
    model on d vertices).  Returns a JSON-ready report.
    """
    from .synthetic import build_model, generate_graph, sample_gaussian

    if d < 2:
        raise InputError("d must be at least 2")
    rng = np.random.default_rng(rng)
    if sigma0 is None:
        sigma0 = build_model(generate_graph(d, rng=rng)).sigma0
    sigma0 = np.asarray(sigma0, dtype=float)
    logd = math.log(d)
    rows = []
    summary = {}
    for n in n_list:
        if n < 2 or n < 21.0 / logd + 2:
            raise InputError(f"n={n} is below the sample size the bounds require")
        rb, tb = rho_bound(d, n), tau_bound(d, n)
        devs = {"rho": [], "tau": []}
        for t in range(trials):
            x = sample_gaussian(sigma0, n, rng)
            for name, kind in (("rho", "skeptic_rho"), ("tau", "skeptic_tau")):
                S = estimate_correlation(x, kind).entries
                devs[name].append(float(np.max(np.abs(S - sigma0))))
            rows.append({
                "n": n,
                "trial": t,
                "sup_dev_rho": devs["rho"][-1],
                "sup_dev_tau": devs["tau"][-1],
                "rate_rho": devs["rho"][-1] * math.sqrt(n / logd),
                "rate_tau": devs["tau"][-1] * math.sqrt(n / logd),
            })
        summary[str(n)] = {
            "rho_bound": rb,
            "tau_bound": tb,
            "rho_violations": int(sum(v > rb for v in devs["rho"])),
            "tau_violations": int(sum(v > tb for v in devs["tau"])),
            "median_rate_rho": float(np.median(devs["rho"]) * math.sqrt(n / logd)),
            "median_rate_tau": float(np.median(devs["tau"]) * math.sqrt(n / logd)),
        }
    flat = {}
    for name in ("rho", "tau"):
        med = [summary[str(n)][f"median_rate_{name}"] for n in n_list]
        flat[name] = max(med) / min(med)
    return {
        "d": d,
        "n_list": list(n_list),
        "trials": trials,
        "per_n": summary,
        "rate_ratio": flat,
        "total_violations": {
            "rho": sum(s["rho_violations"] for s in summary.values()),
            "tau": sum(s["tau_violations"] for s in summary.values()),
        },
        "rows": rows,
    }
