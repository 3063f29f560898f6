"""Sparse precision-matrix solvers that consume a correlation matrix."""

from ..errors import InputError
from .base import SOLVERS, PrecisionEstimate, SolverConfig
from .glasso import glasso, glasso_kkt_residual, glasso_objective
from .lasso import lasso_kkt_residual, neighborhood_lasso, solve_lasso_gram
from .lp import clime, graphical_dantzig, solve_dantzig_lp

__all__ = [
    "SOLVERS",
    "PrecisionEstimate",
    "SolverConfig",
    "glasso",
    "glasso_kkt_residual",
    "glasso_objective",
    "clime",
    "graphical_dantzig",
    "solve_dantzig_lp",
    "neighborhood_lasso",
    "solve_lasso_gram",
    "lasso_kkt_residual",
    "solve",
]


def solve(S, solver, lam, cfg=None, init=None, rule="AND"):
    """Run ``solver`` by name at tuning value ``lam``.

    ``lam`` is the l1 penalty for glasso and neighborhood lasso, the
    constraint level Delta for CLIME and delta for the Dantzig selector.
    """
    if solver == "glasso":
        return glasso(S, lam, cfg, init=init)
    if solver == "neighborhood_lasso":
        return neighborhood_lasso(S, lam, rule, cfg, init=init)
    if solver == "clime":
        return clime(S, lam, cfg)
    if solver == "gdantzig":
        return graphical_dantzig(S, lam, cfg)
    raise InputError(f"unknown solver {solver!r}; choose from {SOLVERS}")
