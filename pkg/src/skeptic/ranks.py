"""Ranks and rank correlation statistics.

Kendall's tau is computed with Knight's merge-sort algorithm, so a single
pair costs O(n log n) and a full d x d matrix O(d^2 n log n).  Ties are
handled as follows:

* ranks use the midrank convention, so Spearman's rho is the Pearson
  correlation of midranks;
* Kendall's tau is tau-a: a pair tied in either coordinate contributes 0 to
  the concordance sum, and the denominator stays n(n-1)/2.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .errors import InputError, UndefinedCorrelationError

__all__ = [
    "PairStat",
    "compute_ranks",
    "rank_matrix",
    "spearman_rho",
    "kendall_tau",
    "kendall_tau_naive",
    "spearman_matrix",
    "kendall_matrix",
]

STAT_KINDS = ("spearman_rho", "kendall_tau", "pearson")


@dataclass(frozen=True)
class PairStat:
    """A pairwise association statistic in [-1, 1]."""

    value: float
    kind: str

    def __float__(self):
        return float(self.value)


def _as_column(x, name="column"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise InputError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise InputError(f"{name} has a non-finite value at position {bad}")
    return arr


def _as_pair(x, y):
    x = _as_column(x, "x")
    y = _as_column(y, "y")
    if x.size != y.size:
        raise InputError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise InputError("need at least two observations")
    return x, y


def as_data_matrix(data, min_rows=2):
    """Validate and return ``data`` as a float (n, d) array."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"data must be a 2-D array, got shape {arr.shape}")
    n, d = arr.shape
    if d < 1:
        raise InputError("data has no columns")
    if n < min_rows:
        raise InputError(f"need at least {min_rows} rows, got {n}")
    if not np.all(np.isfinite(arr)):
        i, j = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(f"non-finite value at row {i}, column {j}")
    return arr


def compute_ranks(column):
    """Midranks of ``column`` (1-based).

    >>> compute_ranks([3, 1, 4, 1, 5])
    array([3. , 1.5, 4. , 1.5, 5. ])
    """
    x = _as_column(column)
    n = x.size
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    cuts = np.flatnonzero(xs[1:] != xs[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [n]))
    ranks = np.empty(n)
    ranks[order] = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    return ranks


def rank_matrix(data):
    """Column-wise midranks of an (n, d) data matrix."""
    arr = as_data_matrix(data)
    return np.column_stack([compute_ranks(arr[:, j]) for j in range(arr.shape[1])])


def _check_rank_variance(centered, labels=None):
    ss = np.einsum("ij,ij->j", centered, centered)
    zero = np.flatnonzero(ss <= 0.0)
    if zero.size:
        j = int(zero[0])
        name = labels[j] if labels is not None else j
        raise UndefinedCorrelationError(
            f"column {name} is constant; its correlation is undefined", column=name
        )
    return ss


def spearman_rho(x, y):
    """Spearman's rho: the Pearson correlation of the midranks of x and y."""
    x, y = _as_pair(x, y)
    r = np.column_stack((compute_ranks(x), compute_ranks(y)))
    rc = r - (x.size + 1) / 2.0
    ss = _check_rank_variance(rc, labels=("x", "y"))
    value = float(rc[:, 0] @ rc[:, 1] / np.sqrt(ss[0] * ss[1]))
    return PairStat(min(1.0, max(-1.0, value)), "spearman_rho")


def spearman_matrix(data, labels=None):
    """d x d matrix of Spearman's rho over the columns of ``data``."""
    arr = as_data_matrix(data)
    rc = rank_matrix(arr) - (arr.shape[0] + 1) / 2.0
    ss = _check_rank_variance(rc, labels)
    scale = 1.0 / np.sqrt(ss)
    rho = (rc.T @ rc) * np.outer(scale, scale)
    np.clip(rho, -1.0, 1.0, out=rho)
    rho = (rho + rho.T) / 2.0
    np.fill_diagonal(rho, 1.0)
    return rho


# --- Kendall's tau -----------------------------------------------------------


@numba.njit(cache=True)
def _merge_count(a, buf):
    """Sort ``a`` in place (bottom-up merge sort); return the inversion count.

    Only strict inversions a[i] > a[j], i < j, are counted.
    """
    n = a.shape[0]
    swaps = 0
    width = 1
    src = a
    dst = buf
    flipped = False
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    dst[k] = src[j]
                    swaps += mid - i
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
            lo += 2 * width
        src, dst = dst, src
        flipped = not flipped
        width *= 2
    if flipped:
        a[:] = src[:]
    return swaps


@numba.njit(cache=True)
def _tied_pairs(sorted_vals):
    total = 0
    run = 1
    for i in range(1, sorted_vals.shape[0]):
        if sorted_vals[i] == sorted_vals[i - 1]:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    total += run * (run - 1) // 2
    return total


@numba.njit(cache=True)
def _tau_numerator(xs, y_by_x, y_ties, buf):
    """Concordant minus discordant pair count.

    ``xs`` holds x sorted ascending and ``y_by_x`` the y values in that order
    (overwritten).  ``y_ties`` is the number of pairs tied in y.
    """
    n = xs.shape[0]
    # within runs of tied x, order by y so tied-x pairs count no inversion
    x_ties = 0
    joint_ties = 0
    start = 0
    for i in range(1, n + 1):
        if i == n or xs[i] != xs[start]:
            run = i - start
            if run > 1:
                x_ties += run * (run - 1) // 2
                seg = np.sort(y_by_x[start:i])
                y_by_x[start:i] = seg
                r = 1
                for m in range(1, run):
                    if seg[m] == seg[m - 1]:
                        r += 1
                    else:
                        joint_ties += r * (r - 1) // 2
                        r = 1
                joint_ties += r * (r - 1) // 2
            start = i
    swaps = _merge_count(y_by_x, buf)
    total = n * (n - 1) // 2
    return total - x_ties - y_ties + joint_ties - 2 * swaps


@numba.njit(cache=True)
def _kendall_pair(x, y):
    n = x.shape[0]
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ys = y[order]
    y_ties = _tied_pairs(np.sort(y))
    buf = np.empty(n)
    num = _tau_numerator(xs, ys, y_ties, buf)
    return num / (n * (n - 1) / 2.0)


@numba.njit(cache=True)
def _kendall_matrix(data):
    n, d = data.shape
    tau = np.eye(d)
    y_ties = np.empty(d, dtype=np.int64)
    for k in range(d):
        y_ties[k] = _tied_pairs(np.sort(data[:, k]))
    denom = n * (n - 1) / 2.0
    for j in range(d):
        order = np.argsort(data[:, j], kind="mergesort")
        xs = data[order, j]
        buf = np.empty(n)
        ys = np.empty(n)
        for k in range(j + 1, d):
            for i in range(n):
                ys[i] = data[order[i], k]
            num = _tau_numerator(xs, ys, y_ties[k], buf)
            tau[j, k] = num / denom
            tau[k, j] = tau[j, k]
    return tau


def _check_not_constant(arr, labels=None):
    const = np.flatnonzero(np.all(arr == arr[0], axis=0))
    if const.size:
        j = int(const[0])
        name = labels[j] if labels is not None else j
        raise UndefinedCorrelationError(
            f"column {name} is constant; its correlation is undefined", column=name
        )


def kendall_tau(x, y):
    """Kendall's tau-a in O(n log n) via merge-sort inversion counting."""
    x, y = _as_pair(x, y)
    _check_not_constant(np.column_stack((x, y)), labels=("x", "y"))
    return PairStat(float(_kendall_pair(x, y)), "kendall_tau")


def kendall_tau_naive(x, y):
    """O(n^2) pair enumeration of Kendall's tau-a; reference implementation."""
    x, y = _as_pair(x, y)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    n = x.size
    return float(np.triu(dx * dy, 1).sum() * 2.0 / (n * (n - 1)))


def kendall_matrix(data, labels=None):
    """d x d matrix of Kendall's tau-a over the columns of ``data``."""
    arr = as_data_matrix(data)
    _check_not_constant(arr, labels)
    return _kendall_matrix(np.ascontiguousarray(arr))
