"""Linear-programming solvers: Dantzig selector, CLIME, graphical Dantzig.

All three reduce to one primitive,

    minimize ||theta||_1  subject to  ||b - A theta||_inf <= delta,

written as an LP over the positive and negative parts ``theta = u - v``.
HiGHS (through scipy) does the pivoting; optimality is certified from the
returned dual values.
"""

import numpy as np
from scipy.optimize import linprog

from ..errors import InfeasibleError, InputError, SingularityError, SolverError
from .base import SolverConfig, make_estimate, matrix_of

GAP_TOL = 1e-8


def min_feasible_delta(A, b):
    """Smallest ``delta`` for which ``||b - A theta||_inf <= delta`` is feasible."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, p = A.shape
    # variables: theta (free, p), t >= 0
    c = np.zeros(p + 1)
    c[-1] = 1.0
    ones = np.ones((m, 1))
    A_ub = np.vstack([np.hstack([A, -ones]), np.hstack([-A, -ones])])
    b_ub = np.concatenate([b, -b])
    bounds = [(None, None)] * p + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        return np.nan
    return float(res.fun)


def solve_dantzig_lp(A, b, delta, with_info=False):
    """Dantzig selector: the l1-smallest theta with ``||b - A theta||_inf <= delta``.

    The LP has 2p non-negative variables and 2m inequality rows.  The duality
    gap must come out below ``1e-8 * max(1, objective)``; otherwise
    SolverError is raised.  With ``with_info=True`` a dict carrying the
    objective, gap and constraint residual is returned as well.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, p = A.shape
    if b.size != m:
        raise InputError(f"b has length {b.size}, expected {m}")
    if not delta > 0:
        raise InputError("delta must be positive")
    if p == 0:
        theta = np.zeros(0)
        if np.max(np.abs(b), initial=0.0) > delta:
            raise InfeasibleError("empty design cannot meet the constraint",
                                  min_feasible=float(np.max(np.abs(b), initial=0.0)))
        return (theta, {"objective": 0.0, "gap": 0.0, "max_violation": 0.0}) if with_info else theta

    c = np.ones(2 * p)
    A_ub = np.block([[A, -A], [-A, A]])
    b_ub = np.concatenate([b + delta, delta - b])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=(0, None), method="highs-ds")
    if res.status == 2:
        raise InfeasibleError(
            f"constraint level {delta:g} is infeasible",
            min_feasible=min_feasible_delta(A, b),
        )
    if res.status != 0:
        raise SolverError(f"LP solver failed: {res.message}")
    x = res.x
    theta = x[:p] - x[p:]
    primal = float(res.fun)
    dual = float(b_ub @ res.ineqlin.marginals)
    gap = abs(primal - dual)
    if gap > GAP_TOL * max(1.0, abs(primal)):
        raise SolverError(f"duality gap {gap:.3g} exceeds tolerance")
    if not with_info:
        return theta
    violation = float(np.max(np.abs(b - A @ theta)) - delta)
    return theta, {"objective": primal, "gap": gap, "max_violation": max(violation, 0.0)}


def clime(S, delta_cap, cfg=None):
    """CLIME: column-wise ``min ||w||_1`` s.t. ``||S w - e_j||_inf <= Delta``.

    Columns are solved independently, checked against the constraint, and
    then symmetrized by keeping the smaller-magnitude entry of each pair.
    """
    cfg = cfg or SolverConfig()
    if not delta_cap > 0:
        raise InputError("delta_cap must be positive")
    Sm = matrix_of(S)
    d = Sm.shape[0]
    raw = np.zeros((d, d))
    worst_gap = 0.0
    eye = np.eye(d)
    for j in range(d):
        try:
            col, info = solve_dantzig_lp(Sm, eye[:, j], delta_cap, with_info=True)
        except InfeasibleError as exc:
            raise InfeasibleError(
                f"CLIME column {j} is infeasible at Delta={delta_cap:g}; "
                f"smallest feasible Delta is {exc.min_feasible:.6g}",
                column=j,
                min_feasible=exc.min_feasible,
            ) from None
        raw[:, j] = col
        worst_gap = max(worst_gap, info["gap"])
    residual = float(np.max(np.abs(Sm @ raw - eye)))
    if residual > delta_cap + 1e-8:
        raise SolverError(f"CLIME constraint violated: {residual:.6g} > {delta_cap:.6g}")
    omega = np.where(np.abs(raw) <= np.abs(raw.T), raw, raw.T)
    return make_estimate(
        omega, delta_cap, "clime", cfg, d, residual,
        state=raw, duality_gap=worst_gap,
    )


def graphical_dantzig(S, delta, cfg=None):
    """Graphical Dantzig selector.

    For each j, ``theta_j`` is the Dantzig-selector regression of node j on
    the rest using only ``S``.  The precision diagonal is the reciprocal of
    the residual variance ``S_jj - 2 theta' S[-j, j] + theta' S[-j, -j] theta``
    and the off-diagonal column is ``-omega_jj * theta``.  The result is
    symmetrized as ``(Omega + Omega') / 2``.
    """
    cfg = cfg or SolverConfig()
    if not delta > 0:
        raise InputError("delta must be positive")
    Sm = matrix_of(S)
    d = Sm.shape[0]
    raw = np.zeros((d, d))
    thetas = np.zeros((d, d))
    worst_gap = 0.0
    for j in range(d):
        idx = np.r_[0:j, j + 1 : d]
        A = Sm[np.ix_(idx, idx)]
        b = Sm[idx, j]
        try:
            theta, info = solve_dantzig_lp(A, b, delta, with_info=True)
        except InfeasibleError as exc:
            raise InfeasibleError(
                f"Dantzig selector for column {j} is infeasible at delta={delta:g}; "
                f"smallest feasible delta is {exc.min_feasible:.6g}",
                column=j,
                min_feasible=exc.min_feasible,
            ) from None
        worst_gap = max(worst_gap, info["gap"])
        resid_var = Sm[j, j] - 2.0 * theta @ b + theta @ A @ theta
        if resid_var <= 1e-10:
            raise SingularityError(
                f"residual variance {resid_var:.3g} for column {j} is numerically zero"
            )
        raw[j, j] = 1.0 / resid_var
        raw[idx, j] = -raw[j, j] * theta
        thetas[idx, j] = theta
    omega = (raw + raw.T) / 2.0
    return make_estimate(
        omega, delta, "gdantzig", cfg, d, worst_gap,
        state=thetas, duality_gap=worst_gap,
    )
