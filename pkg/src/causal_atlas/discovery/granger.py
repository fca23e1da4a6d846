"""Vector autoregression fitting and Granger causality tests.

All models over the same series drop the first max_lag rows so nested
F-tests compare identical effective samples. Pairwise tests regress each
target on its own lags versus own-plus-source lags; the multivariate test
removes one source's lags from the full VAR equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ..cancellation import NEVER
from ..dataset import Dataset
from ..errors import InsufficientLength
from ..graphs import SummaryGraph
from .dynotears import lagged_design


@dataclass(frozen=True)
class VarFit:
    lag_order: int
    coefficients: list[np.ndarray]  # M_k[i, j]: effect of x_j at lag k on x_i
    intercept: np.ndarray
    residuals: np.ndarray
    rss_per_equation: np.ndarray


def _series_values(series):
    return series.values if isinstance(series, Dataset) else np.asarray(series, dtype=float)


def fit_var(series, lag):
    """Per-equation OLS with intercept on lags 1..lag of every variable."""
    values = _series_values(series)
    t_total, p = values.shape
    if lag < 1:
        raise InsufficientLength("lag must be >= 1")
    if t_total <= (lag + 1) * p + 1:
        raise InsufficientLength(
            f"series length {t_total} too short for lag {lag} with {p} variables"
        )
    y, z = lagged_design(values, lag)
    design = np.column_stack([z, np.ones(len(z))])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    # beta rows: [lag1 all vars, lag2 all vars, ..., intercept]; columns: equations
    coeffs = [beta[(k - 1) * p : k * p, :].T for k in range(1, lag + 1)]
    rss = (resid**2).sum(axis=0)
    return VarFit(lag, coeffs, beta[-1, :], resid, rss)


def granger_f_statistic(rss_restricted, rss_full, df_num, df_den):
    """F = ((RSS_r - RSS_f)/df_num) / (RSS_f/df_den); nesting keeps it >= 0."""
    if df_num <= 0 or df_den <= 0:
        raise InsufficientLength("nonpositive degrees of freedom")
    if rss_full <= 0:
        return np.inf if rss_restricted > rss_full else 0.0
    return ((rss_restricted - rss_full) / df_num) / (rss_full / df_den)


def _rss(y, design):
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    return float(resid @ resid)


def _bh_adjust(pvals):
    """Benjamini-Hochberg adjusted p-values."""
    m = len(pvals)
    order = np.argsort(pvals)
    adjusted = np.empty(m)
    running = 1.0
    for rank in range(m - 1, -1, -1):
        idx = order[rank]
        running = min(running, pvals[idx] * m / (rank + 1))
        adjusted[idx] = running
    return adjusted


def granger_pairwise(series, max_lag, alpha=0.05, bh_correction=False, cancel=NEVER):
    """Edge i -> j when adding lags of x_i improves the prediction of x_j."""
    values = _series_values(series)
    t_total, p = values.shape
    if t_total <= 2 * max_lag + 2:
        raise InsufficientLength("series too short for pairwise Granger")
    y_all, z_all = lagged_design(values, max_lag)
    t_eff = len(y_all)
    df_den = t_eff - 2 * max_lag - 1
    if df_den <= 0:
        raise InsufficientLength("series too short for the requested lag")

    pvals = np.ones((p, p))
    for j in range(p):
        cancel.check()
        own = [k * p + j for k in range(max_lag)]
        restricted = np.column_stack([z_all[:, own], np.ones(t_eff)])
        rss_r = _rss(y_all[:, j], restricted)
        for i in range(p):
            if i == j:
                continue
            cross = [k * p + i for k in range(max_lag)]
            full = np.column_stack([z_all[:, own + cross], np.ones(t_eff)])
            rss_f = _rss(y_all[:, j], full)
            f = granger_f_statistic(rss_r, rss_f, max_lag, df_den)
            pvals[i, j] = float(sps.f.sf(f, max_lag, df_den))

    return _edges_from_pvalues(pvals, alpha, bh_correction)


def granger_multivariate(series, max_lag, alpha=0.05, bh_correction=False, cancel=NEVER):
    """Full-VAR test: exclude x_i's lags from equation j and compare RSS."""
    values = _series_values(series)
    t_total, p = values.shape
    y_all, z_all = lagged_design(values, max_lag)
    t_eff = len(y_all)
    df_den = t_eff - p * max_lag - 1
    if df_den <= 0:
        raise InsufficientLength("series too short for multivariate Granger")
    full = np.column_stack([z_all, np.ones(t_eff)])

    pvals = np.ones((p, p))
    for j in range(p):
        cancel.check()
        rss_f = _rss(y_all[:, j], full)
        for i in range(p):
            if i == j:
                continue
            keep = [c for c in range(p * max_lag) if c % p != i]
            restricted = np.column_stack([z_all[:, keep], np.ones(t_eff)])
            rss_r = _rss(y_all[:, j], restricted)
            f = granger_f_statistic(rss_r, rss_f, max_lag, df_den)
            pvals[i, j] = float(sps.f.sf(f, max_lag, df_den))

    return _edges_from_pvalues(pvals, alpha, bh_correction)


def _edges_from_pvalues(pvals, alpha, bh_correction):
    p = pvals.shape[0]
    off = ~np.eye(p, dtype=bool)
    decisions = pvals.copy()
    if bh_correction:
        adjusted = _bh_adjust(pvals[off])
        decisions[off] = adjusted
    edges = (decisions < alpha) & off
    return SummaryGraph(p, edges)
