"""Partial autocorrelation of mean-vector sequences.

Tasks that drift as a random walk show a clearly positive partial
autocorrelation at lag 1; i.i.d. tasks show none at any lag.
"""

import numpy as np

from ..errors import InsufficientHistoryError, ShapeError


def durbin_levinson(series, max_lag):
    """Partial autocorrelations at lags ``1..max_lag`` of each column of ``series``.

    Uses the mean-adjusted biased autocovariance. Columns with no variation
    get zeros at every lag.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ShapeError(f"expected a (length, components) array, got shape {x.shape}")
    T = x.shape[0]
    if max_lag < 1:
        raise ShapeError("max_lag must be positive")
    if T <= max_lag + 1:
        raise InsufficientHistoryError(f"sequence of length {T} too short for lag {max_lag}")
    constant = np.ptp(x, axis=0) == 0
    x = x - x.mean(axis=0)
    acov = np.array([np.sum(x[:T - h] * x[h:], axis=0) / T for h in range(max_lag + 1)])
    r0 = np.where(constant, 1.0, acov[0])
    rho = acov / r0

    out = np.zeros((max_lag, x.shape[1]))
    prev = np.zeros((0, x.shape[1]))
    err = np.ones(x.shape[1])
    for h in range(1, max_lag + 1):
        num = rho[h] - np.sum(prev * rho[h - 1:0:-1], axis=0) if h > 1 else rho[1]
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa = np.where(err > 0, num / err, 0.0)
        cur = np.empty((h, x.shape[1]))
        cur[:h - 1] = prev - kappa * prev[::-1]
        cur[h - 1] = kappa
        err = err * (1.0 - kappa ** 2)
        out[h - 1] = kappa
        prev = cur
    out[:, constant] = 0.0
    return out


def partial_autocorrelation(tau_sequence, max_lag):
    """Mean and standard deviation across components of the per-lag PACF.

    Returns
    -------
    mean, std : ndarray of shape (max_lag,)
        Entry ``h - 1`` refers to lag ``h``.
    """
    pacf = durbin_levinson(tau_sequence, max_lag)
    return pacf.mean(axis=1), pacf.std(axis=1)
