"""Result and configuration types shared by the precision-matrix solvers."""

from dataclasses import dataclass, field

import numpy as np

from ..correlation import CorrelationMatrix
from ..errors import InputError
from ..graph import GraphSpec

SOLVERS = ("glasso", "clime", "gdantzig", "neighborhood_lasso")


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 10_000  # inner coordinate-descent passes
    max_sweeps: int = 200  # outer glasso sweeps
    convergence_tol: float = 1e-6
    edge_threshold: float = 1e-6
    psd_floor: float = 1e-4

    def __post_init__(self):
        if min(self.max_iterations, self.max_sweeps) <= 0:
            raise ValueError("iteration limits must be positive")
        if not 0 < self.convergence_tol < 1:
            raise ValueError("convergence_tol must lie in (0, 1)")
        if self.edge_threshold <= 0 or self.psd_floor <= 0:
            raise ValueError("edge_threshold and psd_floor must be positive")


@dataclass(frozen=True)
class PrecisionEstimate:
    omega: np.ndarray
    edge_set: GraphSpec
    lam: float
    solver: str
    iterations: int = 0
    residual: float = 0.0
    info: dict = field(default_factory=dict, compare=False)
    state: object = field(default=None, compare=False, repr=False)  # warm-start data

    def diagnostics(self):
        out = {
            "solver": self.solver,
            "lambda": self.lam,
            "d": int(self.omega.shape[0]),
            "edge_count": len(self.edge_set),
            "iterations": int(self.iterations),
            "final_residual": float(self.residual),
        }
        out.update(self.info)
        return out


def matrix_of(S):
    """Return the float ndarray behind a CorrelationMatrix or array-like."""
    if isinstance(S, CorrelationMatrix):
        arr = S.entries
    else:
        arr = np.asarray(S, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    if not np.allclose(arr, arr.T, atol=1e-12, rtol=0):
        raise InputError("matrix is not symmetric")
    return np.array(arr, dtype=float)


def make_estimate(omega, lam, solver, cfg, iterations=0, residual=0.0, state=None, **info):
    omega = np.asarray(omega, dtype=float)
    edges = GraphSpec.from_adjacency(omega, cfg.edge_threshold)
    return PrecisionEstimate(
        omega, edges, float(lam), solver, int(iterations), float(residual), info, state
    )
