"""Preprocessing for price data: log returns and mean-absolute-deviation clipping."""

import numpy as np

from .errors import InputError
from .io import Dataset


def log_returns(prices):
    """Day-over-day log returns ``log(S_t) - log(S_{t-1})``; one row shorter."""
    m = prices.matrix
    if m.shape[0] < 2:
        raise InputError("log returns need at least two rows")
    bad = np.argwhere(m <= 0)
    if bad.size:
        i, j = bad[0]
        raise InputError(
            f"non-positive price {m[i, j]!r} at row {i + 1}, column {prices.column_labels[j]}"
        )
    logs = np.log(m)
    return Dataset(
        logs[1:] - logs[:-1],
        list(prices.column_labels),
        prices.source,
        prices.transform_log + ["log_returns"],
    )


def winsorize_mad(data, k=6.0):
    """Clip each column to ``mean +/- k * MAD``, MAD = mean |x - mean|."""
    if k <= 0:
        raise InputError("k must be positive")
    m = data.matrix
    center = m.mean(axis=0)
    mad = np.abs(m - center).mean(axis=0)
    lo, hi = center - k * mad, center + k * mad
    # leave untouched entries bit-identical
    out = np.where(m < lo, lo, np.where(m > hi, hi, m))
    return Dataset(out, list(data.column_labels), data.source, data.transform_log + [f"winsorize_mad(k={k:g})"])
