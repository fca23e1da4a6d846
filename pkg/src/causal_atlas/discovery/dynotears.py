"""Temporal extension of the continuous-optimization learner.

Jointly fits the instantaneous matrix W (acyclic, constrained as in the
tabular variant) and stacked lagged coefficients A on the lagged design
matrix. Only W carries the acyclicity constraint; A is free apart from its
L1 penalty.
"""

from __future__ import annotations

import numpy as np

from ..cancellation import NEVER
from ..dataset import Dataset
from ..errors import DataContainsMissing, InsufficientLength
from ..graphs import TemporalGraph
from .notears import NotearsConfig, prune_to_dag, solve_augmented_lagrangian

DEFAULT_TS_CONFIG = NotearsConfig(lambda1=0.05, w_threshold=0.1)


def lagged_design(values, lag):
    """Rows t = lag..T-1: response x_t and regressors [x_{t-1} .. x_{t-lag}]."""
    t_total, p = values.shape
    if t_total <= lag:
        raise InsufficientLength("series shorter than the requested lag")
    x = values[lag:]
    blocks = [values[lag - k : t_total - k] for k in range(1, lag + 1)]
    z = np.concatenate(blocks, axis=1)
    return x, z


def dynotears(series, lag, lambda_w=0.05, lambda_a=0.05, cfg=DEFAULT_TS_CONFIG, cancel=NEVER):
    """Estimate a TemporalGraph from a stationary series."""
    values = series.values if isinstance(series, Dataset) else np.asarray(series, dtype=float)
    if np.isnan(values).any():
        raise DataContainsMissing("impute missing values before DYNOTEARS")
    x, z = lagged_design(values, lag)
    n, p = x.shape
    extra_dim = p * lag * p

    def loss_fn(w, extra):
        a = extra.reshape(p * lag, p)
        r = x - x @ w - z @ a
        loss = 0.5 * float((r * r).sum()) / n
        g_w = -(x.T @ r) / n
        g_a = -(z.T @ r) / n
        return loss, g_w, g_a.ravel()

    w, extra, _ = solve_augmented_lagrangian(
        (loss_fn, lambda_w, lambda_a), p, cfg, extra_dim=extra_dim, cancel=cancel
    )
    a = extra.reshape(p * lag, p)

    w = prune_to_dag(w, cfg.w_threshold)
    a = np.where(np.abs(a) >= cfg.w_threshold, a, 0.0)
    lagged = [a[(k - 1) * p : k * p, :] for k in range(1, lag + 1)]
    return TemporalGraph(p, lag, w, lagged)
