"""Nonparanormal SKEPTIC: rank-based correlation estimates for graph recovery."""

__version__ = "0.1.0"

from .correlation import (  # noqa: E402
    CorrelationMatrix,
    estimate_correlation,
    normal_score_matrix,
    pearson_matrix,
    psd_repair,
    skeptic_kendall_matrix,
    skeptic_spearman_matrix,
    winsor_delta,
)
from .graph import GraphSpec  # noqa: E402
from .ranks import compute_ranks, kendall_tau, spearman_rho  # noqa: E402
from .solvers import (  # noqa: E402
    PrecisionEstimate,
    SolverConfig,
    clime,
    glasso,
    graphical_dantzig,
    neighborhood_lasso,
    solve,
)

__all__ = [
    "CorrelationMatrix",
    "GraphSpec",
    "PrecisionEstimate",
    "SolverConfig",
    "clime",
    "compute_ranks",
    "estimate_correlation",
    "glasso",
    "graphical_dantzig",
    "kendall_tau",
    "neighborhood_lasso",
    "normal_score_matrix",
    "pearson_matrix",
    "psd_repair",
    "skeptic_kendall_matrix",
    "skeptic_spearman_matrix",
    "solve",
    "spearman_rho",
    "winsor_delta",
]
