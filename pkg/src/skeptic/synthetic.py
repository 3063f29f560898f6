"""Random geometric graphs and nonparanormal samples for benchmarking.

Vertices get uniform points in the unit square; a pair at distance r is
proposed as an edge with probability ``exp(-r^2 / (2 s)) / sqrt(2 pi)``.
The precision matrix has unit diagonal and 0.245 on edges, which stays
positive definite under a degree cap of four (4 * 0.245 < 1).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .correlation import winsor_delta
from .errors import InputError, SkepticError
from .graph import GraphSpec

EDGE_WEIGHT = 0.245
SPARSITY_S = 0.125
MAX_DEGREE = 4
POWER_EXPONENT = 3.0
CDF_SHIFT = 0.05
CDF_SCALE = 0.4

TRANSFORMS = ("power", "cdf", "linear")
TRANSFORM_FORMULAS = {
    "power": "sign(t)*|t|^3",
    "cdf": "Phi((t-0.05)/0.4)",
    "linear": "t",
}


@dataclass(frozen=True)
class ModelSpec:
    omega0: np.ndarray
    sigma0: np.ndarray
    graph: GraphSpec
    transform: str = "linear"

    @property
    def d(self):
        return self.graph.d

    def with_transform(self, transform):
        _check_transform(transform)
        return ModelSpec(self.omega0, self.sigma0, self.graph, transform)


def _check_transform(name):
    if name not in TRANSFORMS:
        raise InputError(f"unknown transform {name!r}; choose from {TRANSFORMS}")


def edge_probability(dist_sq, s=SPARSITY_S):
    return np.exp(-np.asarray(dist_sq) / (2.0 * s)) / math.sqrt(2.0 * math.pi)


def generate_graph(d, s=SPARSITY_S, max_degree=MAX_DEGREE, rng=None):
    """Random geometric graph with a hard degree cap.

    Candidate pairs are visited in decreasing order of their inclusion
    probability.  Each gets a Bernoulli draw and is kept only if both
    endpoints are still below ``max_degree``.
    """
    if d < 1:
        raise InputError("d must be at least 1")
    if s <= 0:
        raise InputError("s must be positive")
    rng = np.random.default_rng(rng)
    points = rng.uniform(size=(d, 2))
    jj, kk = np.triu_indices(d, 1)
    diff = points[jj] - points[kk]
    prob = edge_probability(np.einsum("ij,ij->i", diff, diff), s)
    order = np.argsort(-prob, kind="stable")
    draws = rng.uniform(size=order.size)
    degree = np.zeros(d, dtype=int)
    edges = []
    for u, idx in zip(draws, order):
        if u >= prob[idx]:
            continue
        j, k = int(jj[idx]), int(kk[idx])
        if degree[j] < max_degree and degree[k] < max_degree:
            degree[j] += 1
            degree[k] += 1
            edges.append((j, k))
    return GraphSpec(d, frozenset(edges))


def build_model(graph, weight=EDGE_WEIGHT, transform="linear"):
    """Precision matrix with ``weight`` on edges and the implied correlation."""
    _check_transform(transform)
    d = graph.d
    omega = np.eye(d)
    for j, k in graph.edges:
        omega[j, k] = omega[k, j] = weight
    try:
        np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise SkepticError("omega0 is not positive definite") from None
    sigma = np.linalg.inv(omega)
    scale = 1.0 / np.sqrt(np.diag(sigma))
    sigma = sigma * np.outer(scale, scale)
    sigma = (sigma + sigma.T) / 2.0
    np.fill_diagonal(sigma, 1.0)
    return ModelSpec(omega, sigma, graph, transform)


def apply_transform(z, transform):
    """The data-generating map g = f^{-1}, applied elementwise."""
    _check_transform(transform)
    z = np.asarray(z, dtype=float)
    if transform == "power":
        return np.sign(z) * np.abs(z) ** POWER_EXPONENT
    if transform == "cdf":
        x = ndtr((z - CDF_SHIFT) / CDF_SCALE)
        # doubles cannot resolve 1 - Phi(u) for u > ~8.3; stay inside (0, 1)
        return np.clip(x, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    return z.copy()


def sample_gaussian(sigma, n, rng=None):
    """n draws from N(0, sigma) via the lower Cholesky factor."""
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(rng)
    try:
        L = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise SkepticError("sigma0 is not positive definite") from None
    return rng.standard_normal((n, sigma.shape[0])) @ L.T


def sample_npn(model, n, rng=None, transform=None):
    """Nonparanormal sample: Gaussian draws pushed through the transform."""
    transform = transform or model.transform
    return apply_transform(sample_gaussian(model.sigma0, n, rng), transform)


def model_manifest(model, s=SPARSITY_S, seed=None, n=None, max_degree=MAX_DEGREE):
    manifest = {
        "d": model.d,
        "s": s,
        "transform": model.transform,
        "transform_formula": TRANSFORM_FORMULAS[model.transform],
        "seed": seed,
        "edge_weight": EDGE_WEIGHT,
        "max_degree": max_degree,
        "edge_count": len(model.graph),
        "observed_max_degree": int(model.graph.degrees().max()) if model.d else 0,
        "edge_probability_formula": "exp(-||y_i-y_j||^2/(2s))/sqrt(2*pi)",
        "transform_parameters": {
            "power_exponent": POWER_EXPONENT,
            "cdf_shift": CDF_SHIFT,
            "cdf_scale": CDF_SCALE,
        },
        "omega0_min_eigenvalue": float(np.linalg.eigvalsh(model.omega0)[0]),
    }
    if n is not None:
        manifest["n"] = n
        if n >= 2:
            manifest["winsor_delta"] = winsor_delta(n)
            manifest["winsor_delta_formula"] = "1/(4*n^(1/4)*sqrt(pi*log(n)))"
    return manifest
