"""Correlation-matrix estimators and PSD repair.

The two SKEPTIC estimators map rank statistics onto the latent Gaussian
correlation scale:

    spearman:  S_jk = 2 sin(pi/6 * rho_jk)
    kendall:   S_jk = sin(pi/2 * tau_jk)

Both are invariant to strictly increasing transforms of any column, which is
the whole point: the marginal transforms never need to be estimated.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from .errors import UndefinedCorrelationError
from .ranks import as_data_matrix, kendall_matrix, spearman_matrix

__all__ = [
    "ESTIMATORS",
    "CorrelationMatrix",
    "winsor_delta",
    "skeptic_spearman_matrix",
    "skeptic_kendall_matrix",
    "normal_score_matrix",
    "pearson_matrix",
    "estimate_correlation",
    "psd_repair",
]

ESTIMATORS = ("skeptic_rho", "skeptic_tau", "normal_score", "pearson")

# CLI / config spellings
ESTIMATOR_ALIASES = {
    "spearman": "skeptic_rho",
    "skeptic_rho": "skeptic_rho",
    "rho": "skeptic_rho",
    "kendall": "skeptic_tau",
    "skeptic_tau": "skeptic_tau",
    "tau": "skeptic_tau",
    "normal_score": "normal_score",
    "ns": "normal_score",
    "pearson": "pearson",
    "normal": "pearson",
}

DEFAULT_PSD_FLOOR = 1e-4


@dataclass(frozen=True)
class CorrelationMatrix:
    """A d x d correlation estimate with unit diagonal."""

    entries: np.ndarray
    estimator_kind: str
    psd_repaired: bool = False
    labels: tuple = field(default=None, compare=False)

    @property
    def d(self):
        return self.entries.shape[0]

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.entries)[0])

    def summary(self):
        return {
            "d": self.d,
            "estimator_kind": self.estimator_kind,
            "min_eigenvalue": self.min_eigenvalue(),
            "psd_repaired": self.psd_repaired,
        }


def _finish(entries, kind, labels):
    entries = (entries + entries.T) / 2.0
    np.clip(entries, -1.0, 1.0, out=entries)
    np.fill_diagonal(entries, 1.0)
    entries.setflags(write=False)
    return CorrelationMatrix(entries, kind, False, tuple(labels) if labels else None)


def skeptic_spearman_matrix(data, labels=None):
    """SKEPTIC estimate from Spearman's rho, ``2 sin(pi rho / 6)``."""
    rho = spearman_matrix(data, labels)
    return _finish(2.0 * np.sin(np.pi / 6.0 * rho), "skeptic_rho", labels)


def skeptic_kendall_matrix(data, labels=None):
    """SKEPTIC estimate from Kendall's tau, ``sin(pi tau / 2)``."""
    tau = kendall_matrix(data, labels)
    return _finish(np.sin(np.pi / 2.0 * tau), "skeptic_tau", labels)


def winsor_delta(n):
    """Truncation level ``1 / (4 n^{1/4} sqrt(pi log n))`` (natural log)."""
    if n < 2:
        raise ValueError("winsor_delta needs n >= 2")
    return 1.0 / (4.0 * n**0.25 * math.sqrt(math.pi * math.log(n)))


def normal_scores(data, delta=None):
    """Winsorized normal scores ``Phi^{-1}(T_delta[F_j(x)])``.

    ``F_j`` is the empirical CDF scaled by ``1/(n+1)``; with ties every tied
    value gets the count of observations ``<=`` it.
    """
    arr = as_data_matrix(data)
    n = arr.shape[0]
    if delta is None:
        delta = winsor_delta(n)
    scores = np.empty_like(arr)
    for j in range(arr.shape[1]):
        col = arr[:, j]
        counts = np.searchsorted(np.sort(col), col, side="right")
        u = np.clip(counts / (n + 1.0), delta, 1.0 - delta)
        scores[:, j] = ndtri(u)
    return scores


def normal_score_matrix(data, labels=None, delta=None):
    """Normal-score estimate: uncentered correlation of Winsorized scores."""
    scores = normal_scores(data, delta)
    gram = scores.T @ scores
    norms = np.sqrt(np.diag(gram))
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        j = int(zero[0])
        name = labels[j] if labels is not None else j
        raise UndefinedCorrelationError(f"column {name} has all-zero normal scores", column=name)
    return _finish(gram / np.outer(norms, norms), "normal_score", labels)


def pearson_matrix(data, labels=None):
    """Plain sample correlation matrix."""
    arr = as_data_matrix(data)
    centered = arr - arr.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    zero = np.flatnonzero(ss <= 0.0)
    if zero.size:
        j = int(zero[0])
        name = labels[j] if labels is not None else j
        raise UndefinedCorrelationError(
            f"column {name} is constant; its correlation is undefined", column=name
        )
    scale = 1.0 / np.sqrt(ss)
    return _finish((centered.T @ centered) * np.outer(scale, scale), "pearson", labels)


_BUILDERS = {
    "skeptic_rho": skeptic_spearman_matrix,
    "skeptic_tau": skeptic_kendall_matrix,
    "normal_score": normal_score_matrix,
    "pearson": pearson_matrix,
}


def estimate_correlation(data, kind, labels=None):
    """Dispatch on estimator name (accepts aliases such as ``"spearman"``)."""
    try:
        canonical = ESTIMATOR_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown estimator {kind!r}; choose from {sorted(ESTIMATOR_ALIASES)}")
    return _BUILDERS[canonical](data, labels=labels)


def psd_repair(S, floor=DEFAULT_PSD_FLOOR, max_rounds=50):
    """Clip eigenvalues from below and rescale back to unit diagonal.

    Rescaling can pull the smallest eigenvalue slightly under the clip level,
    so the clip level is raised until the rescaled matrix clears ``floor``.
    A matrix that already clears ``floor`` comes back with identical entries.
    """
    if floor <= 0:
        raise ValueError("floor must be positive")
    if isinstance(S, CorrelationMatrix):
        entries, kind, labels = S.entries, S.estimator_kind, S.labels
    else:
        entries, kind, labels = np.asarray(S, dtype=float), "pearson", None
        S = None
    entries = (entries + entries.T) / 2.0
    evals, evecs = np.linalg.eigh(entries)
    if evals[0] >= floor:
        if S is not None:
            return replace(S, psd_repaired=True)
        return CorrelationMatrix(entries, kind, True, labels)

    clip = floor
    for _ in range(max_rounds):
        fixed = (evecs * np.maximum(evals, clip)) @ evecs.T
        scale = 1.0 / np.sqrt(np.diag(fixed))
        fixed = fixed * np.outer(scale, scale)
        fixed = (fixed + fixed.T) / 2.0
        np.fill_diagonal(fixed, 1.0)
        low = np.linalg.eigvalsh(fixed)[0]
        if low >= floor:
            break
        clip *= max(floor / max(low, 1e-300), 1.0 + 1e-12) * (1.0 + 1e-9)
    else:
        raise RuntimeError("psd_repair did not reach the eigenvalue floor")
    fixed.setflags(write=False)
    return CorrelationMatrix(fixed, kind, True, labels)
