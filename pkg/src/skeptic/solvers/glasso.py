"""Graphical lasso by blockwise coordinate descent.

Minimizes ``tr(S Omega) - log det Omega + lam * sum_{j != k} |Omega_jk|``.
The diagonal is not penalized, so the working covariance keeps
``W_jj = S_jj`` throughout.  Each sweep solves one Gram-form lasso per
column against the current ``W``; the input must be positive definite
(run ``psd_repair`` first).
"""

import numba
import numpy as np

from ..errors import ConvergenceError, InputError, PreconditionError
from .base import SolverConfig, make_estimate, matrix_of
from .lasso import _soft


@numba.njit(cache=True)
def _glasso_sweeps(S, W, B, lam, tol_inner, max_inner, tol_outer, max_sweeps):
    """Run sweeps until the largest change of W falls below ``tol_outer``.

    ``B[:, j]`` holds the lasso coefficients of column j (``B[j, j] = 0``).
    Returns (sweeps, last change, inner iteration cap hit).
    """
    d = S.shape[0]
    grad = np.empty(d)
    inner_capped = False
    change = 0.0
    for sweep in range(max_sweeps):
        change = 0.0
        for j in range(d):
            # grad_k = (W beta)_k - S_kj for k != j; beta_j is fixed at 0
            for k in range(d):
                acc = 0.0
                for m in range(d):
                    if m != j:
                        acc += W[k, m] * B[m, j]
                grad[k] = acc - S[k, j]
            converged = False
            for _ in range(max_inner):
                delta_max = 0.0
                for k in range(d):
                    if k == j:
                        continue
                    wkk = W[k, k]
                    old = B[k, j]
                    new = _soft(wkk * old - grad[k], lam) / wkk
                    if new != old:
                        step = new - old
                        B[k, j] = new
                        for i in range(d):
                            grad[i] += step * W[i, k]
                        a = abs(step)
                        if a > delta_max:
                            delta_max = a
                if delta_max < tol_inner:
                    converged = True
                    break
            if not converged:
                inner_capped = True
            for k in range(d):
                if k == j:
                    continue
                w = grad[k] + S[k, j]
                diff = abs(w - W[k, j])
                if diff > change:
                    change = diff
                W[k, j] = w
                W[j, k] = w
        if change < tol_outer:
            return sweep + 1, change, inner_capped
    return max_sweeps, change, inner_capped


def _omega_from(W, B):
    d = W.shape[0]
    omega = np.zeros((d, d))
    for j in range(d):
        beta = B[:, j]
        diag = 1.0 / (W[j, j] - W[j] @ beta)
        omega[:, j] = -beta * diag
        omega[j, j] = diag
    return (omega + omega.T) / 2.0


def glasso_objective(S, omega, lam):
    S = np.asarray(S, dtype=float)
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        return np.inf
    off = np.abs(omega).sum() - np.abs(np.diag(omega)).sum()
    return float(np.sum(S * omega) - logdet + lam * off)


def glasso_kkt_residual(S, omega, lam):
    """Largest violation of the stationarity conditions at ``omega``.

    With ``G = S - inv(omega)``: diagonal entries need ``G_jj = 0``, active
    off-diagonal entries ``G_jk = -lam * sign(omega_jk)``, and zero entries
    ``|G_jk| <= lam``.
    """
    S = np.asarray(S, dtype=float)
    G = S - np.linalg.inv(omega)
    G = (G + G.T) / 2.0
    active = omega != 0
    viol = np.where(active, np.abs(G + lam * np.sign(omega)), np.maximum(np.abs(G) - lam, 0.0))
    np.fill_diagonal(viol, np.abs(np.diag(G)))
    return float(viol.max())


def glasso(S, lam, cfg=None, init=None):
    """Sparse inverse correlation via the graphical lasso.

    Parameters
    ----------
    S : CorrelationMatrix or array, shape (d, d)
        Must have smallest eigenvalue at least ``cfg.psd_floor``.
    lam : float
        Off-diagonal l1 penalty, ``lam >= 0``.
    cfg : SolverConfig, optional
    init : PrecisionEstimate, optional
        Warm start (typically the estimate at the previous, larger lambda).

    Returns
    -------
    PrecisionEstimate
        ``residual`` is the KKT residual of the returned omega; it is at most
        ``cfg.convergence_tol``.
    """
    cfg = cfg or SolverConfig()
    if lam < 0:
        raise InputError("lambda must be non-negative")
    Sm = matrix_of(S)
    d = Sm.shape[0]
    low = np.linalg.eigvalsh(Sm)[0]
    # small slack for round-off in matrices repaired exactly to the floor
    if low < cfg.psd_floor * (1 - 1e-6):
        raise PreconditionError(
            f"glasso needs a positive definite input (min eigenvalue {low:.3g} < "
            f"floor {cfg.psd_floor:.3g}); apply psd_repair first"
        )

    if init is not None and init.state is not None:
        W = init.state[0].copy()
        B = init.state[1].copy()
    else:
        W = Sm.copy()
        B = np.zeros((d, d))
    np.fill_diagonal(W, np.diag(Sm))

    tol = cfg.convergence_tol
    tol_outer = tol
    sweeps = 0
    residual = np.inf
    omega = None
    while sweeps < cfg.max_sweeps:
        used, _, _ = _glasso_sweeps(
            Sm, W, B, float(lam), tol_outer * 1e-2, cfg.max_iterations, tol_outer,
            cfg.max_sweeps - sweeps,
        )
        sweeps += used
        omega = _omega_from(W, B)
        residual = glasso_kkt_residual(Sm, omega, lam)
        if residual <= tol:
            break
        tol_outer /= 10.0
        if tol_outer < 1e-15:
            break
    if residual > tol or not np.all(np.linalg.eigvalsh(omega) > 0):
        raise ConvergenceError(
            f"glasso did not converge after {sweeps} sweeps (KKT residual {residual:.3g})",
            last_iterate=omega,
            iterations=sweeps,
            residual=residual,
        )
    return make_estimate(omega, lam, "glasso", cfg, sweeps, residual, state=(W, B))
