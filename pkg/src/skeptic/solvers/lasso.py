"""Gram-form lasso by coordinate descent, and neighborhood selection.

The lasso here is written purely in terms of second moments,

    minimize  1/2 theta' G theta - theta' c + lam * ||theta||_1,

so it can consume a correlation matrix instead of raw data.  The same kernel
solves the per-column subproblems inside the graphical lasso.
"""

import numba
import numpy as np

from ..errors import ConvergenceError, InputError
from .base import SolverConfig, make_estimate, matrix_of


@numba.njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@numba.njit(cache=True)
def _cd_gram(G, c, lam, theta, tol, max_iter):
    """Cyclic coordinate descent; ``theta`` is updated in place.

    Returns (passes, last max coordinate change).
    """
    p = theta.shape[0]
    grad = G @ theta - c
    delta_max = 0.0
    for it in range(max_iter):
        delta_max = 0.0
        for k in range(p):
            gkk = G[k, k]
            old = theta[k]
            new = _soft(gkk * old - grad[k], lam) / gkk
            if new != old:
                step = new - old
                theta[k] = new
                for i in range(p):
                    grad[i] += step * G[i, k]
                a = abs(step) * np.sqrt(gkk)
                if a > delta_max:
                    delta_max = a
        if delta_max < tol:
            return it + 1, delta_max
    return max_iter, delta_max


def lasso_kkt_residual(G, c, theta, lam):
    """Largest violation of the lasso subgradient conditions."""
    r = G @ theta - c
    active = theta != 0
    viol = np.where(active, np.abs(r + lam * np.sign(theta)), np.maximum(np.abs(r) - lam, 0.0))
    return float(viol.max()) if viol.size else 0.0


def solve_lasso_gram(G, c, lam, cfg=None, init=None, tol=None):
    """Solve the Gram-form lasso; returns the coefficient vector.

    Raises ConvergenceError (with the last iterate attached) when
    ``cfg.max_iterations`` passes are not enough.
    """
    return _lasso(G, c, lam, cfg or SolverConfig(), init, tol)[0]


def _lasso(G, c, lam, cfg, init=None, tol=None):
    G = np.ascontiguousarray(G, dtype=float)
    c = np.ascontiguousarray(c, dtype=float).ravel()
    p = c.size
    if G.shape != (p, p):
        raise InputError(f"G has shape {G.shape}, expected ({p}, {p})")
    if lam < 0:
        raise InputError("lambda must be non-negative")
    if p and np.any(np.diag(G) <= 0):
        raise InputError("G must have a positive diagonal")
    theta = np.zeros(p) if init is None else np.array(init, dtype=float)
    if p == 0:
        return theta, 0
    tol = cfg.convergence_tol * 1e-2 if tol is None else tol
    passes, delta = _cd_gram(G, c, float(lam), theta, tol, cfg.max_iterations)
    if delta >= tol:
        raise ConvergenceError(
            f"lasso did not converge in {passes} passes (last change {delta:.3g})",
            last_iterate=theta,
            iterations=passes,
            residual=delta,
        )
    return theta, passes


def neighborhood_lasso(S, lam, rule="AND", cfg=None, init=None):
    """Meinshausen-Buhlmann neighborhood selection from a correlation matrix.

    Node j is regressed on the others with the Gram-form lasso
    ``G = S[-j, -j]``, ``c = S[-j, j]``.  The (j, k) entry of omega is
    ``-theta`` from one of the two regressions: the smaller magnitude under
    the AND rule, the larger under OR, so thresholding omega reproduces the
    combined neighborhoods.  Only the sign pattern is meaningful.
    """
    cfg = cfg or SolverConfig()
    rule = rule.upper()
    if rule not in ("AND", "OR"):
        raise InputError(f"rule must be AND or OR, got {rule!r}")
    if lam < 0:
        raise InputError("lambda must be non-negative")
    Sm = matrix_of(S)
    d = Sm.shape[0]
    coef = np.zeros((d, d))  # coef[k, j]: weight of k in the regression of j
    if init is not None and init.state is not None and init.state.shape == (d, d):
        coef = init.state.copy()
    passes = 0
    worst = 0.0
    for j in range(d):
        idx = np.r_[0:j, j + 1 : d]
        G = Sm[np.ix_(idx, idx)]
        c = Sm[idx, j]
        theta, used = _lasso(G, c, lam, cfg, init=coef[idx, j])
        passes += used
        coef[idx, j] = theta
        worst = max(worst, lasso_kkt_residual(G, c, theta, lam))
    raw = coef.copy()
    coef[np.abs(coef) <= cfg.edge_threshold] = 0.0
    a, b = -coef, -coef.T
    if rule == "AND":
        both = (a != 0) & (b != 0)
        omega = np.where(both, np.where(np.abs(a) <= np.abs(b), a, b), 0.0)
    else:
        omega = np.where(np.abs(a) >= np.abs(b), a, b)
    np.fill_diagonal(omega, 1.0)
    return make_estimate(
        omega,
        lam,
        "neighborhood_lasso",
        cfg,
        iterations=passes,
        residual=worst,
        state=raw,
        rule=rule,
    )
