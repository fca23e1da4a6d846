"""Recursive exogenous-variable identification for linear non-Gaussian models.

The causal order is found by repeatedly selecting the variable least
dependent on the residuals of regressing the others on it, with dependence
scored through a maximum-entropy approximation of differential entropy.
Edge weights follow from least squares on causal predecessors with
t-test pruning.
"""

from __future__ import annotations

import numpy as np
from scipy import stats as sps

from ..cancellation import NEVER
from ..dataset import Dataset
from ..errors import ConstantColumn, DataContainsMissing

ENTROPY_K1 = 79.047
ENTROPY_K2 = 7.4129
ENTROPY_GAMMA = 0.37457
PRUNE_P_VALUE = 0.05


def max_entropy_entropy_approx(u):
    """Differential entropy of a standardized sample, maximum-entropy form.

    Equals (1 + ln 2pi)/2 for exactly Gaussian input since both correction
    terms vanish at their Gaussian reference values.
    """
    u = np.asarray(u, dtype=float)
    return (
        (1.0 + np.log(2.0 * np.pi)) / 2.0
        - ENTROPY_K1 * (np.mean(np.log(np.cosh(u))) - ENTROPY_GAMMA) ** 2
        - ENTROPY_K2 * np.mean(u * np.exp(-(u**2) / 2.0)) ** 2
    )


def _residual(xi, xj):
    """Residual of xi regressed on xj (both centered)."""
    return xi - (np.cov(xi, xj, bias=True)[0, 1] / np.var(xj)) * xj


def _standardize_column(x, name):
    sd = x.std()
    if sd == 0:
        raise ConstantColumn(f"column {name} has zero variance")
    return (x - x.mean()) / sd


def _mutual_info_diff(xi_std, xj_std, ri_j, rj_i):
    """Entropy difference between the two causal directions of a pair."""
    left = max_entropy_entropy_approx(xj_std) + max_entropy_entropy_approx(
        ri_j / np.std(ri_j)
    )
    right = max_entropy_entropy_approx(xi_std) + max_entropy_entropy_approx(
        rj_i / np.std(rj_i)
    )
    return left - right


def causal_order_search(values, names=None, cancel=NEVER):
    """Greedy exogenous-first ordering of the columns of `values`."""
    x = np.asarray(values, dtype=float).copy()
    p = x.shape[1]
    names = names or [str(i) for i in range(p)]
    remaining = list(range(p))
    order = []
    while remaining:
        cancel.check()
        if len(remaining) == 1:
            order.append(remaining[0])
            break
        std_cols = {j: _standardize_column(x[:, j], names[j]) for j in remaining}
        scores = []
        for i in remaining:
            m = 0.0
            for j in remaining:
                if i == j:
                    continue
                ri_j = _residual(std_cols[i], std_cols[j])
                rj_i = _residual(std_cols[j], std_cols[i])
                diff = _mutual_info_diff(std_cols[i], std_cols[j], ri_j, rj_i)
                m += min(0.0, diff) ** 2
            scores.append(m)
        exo = remaining[int(np.argmin(scores))]
        order.append(exo)
        for j in remaining:
            if j != exo:
                x[:, j] = _residual(x[:, j], x[:, exo])
        remaining.remove(exo)
    return order


def _ols_with_pruning(values, order):
    """Weights by OLS on predecessors; coefficients with p > 0.05 are dropped."""
    n, p = values.shape
    weights = np.zeros((p, p))
    for pos, j in enumerate(order):
        predecessors = order[:pos]
        if not predecessors:
            continue
        design = np.column_stack([values[:, predecessors], np.ones(n)])
        beta, *_ = np.linalg.lstsq(design, values[:, j], rcond=None)
        resid = values[:, j] - design @ beta
        dof = n - design.shape[1]
        if dof <= 0:
            continue
        sigma2 = float(resid @ resid) / dof
        try:
            cov = sigma2 * np.linalg.inv(design.T @ design)
        except np.linalg.LinAlgError:
            continue
        se = np.sqrt(np.maximum(np.diag(cov), 1e-300))
        tvals = beta / se
        pvals = 2.0 * sps.t.sf(np.abs(tvals), dof)
        for k, i in enumerate(predecessors):
            if pvals[k] <= PRUNE_P_VALUE:
                weights[i, j] = beta[k]
    return weights


def direct_lingam(data, cancel=NEVER):
    """Weighted DAG from a linear non-Gaussian sample."""
    from ..graphs import Dag

    if isinstance(data, Dataset):
        values = data.values
        names = data.column_names
    else:
        values = np.asarray(data, dtype=float)
        names = None
    if np.isnan(values).any():
        raise DataContainsMissing("impute missing values before DirectLiNGAM")

    p = values.shape[1]
    std = values.std(axis=0)
    if (std == 0).any():
        bad = int(np.flatnonzero(std == 0)[0])
        label = names[bad] if names else str(bad)
        raise ConstantColumn(f"column {label} has zero variance")
    standardized = (values - values.mean(axis=0)) / std

    order = causal_order_search(standardized, names, cancel=cancel)
    weights = _ols_with_pruning(standardized, order)
    edges = weights != 0
    return Dag(p, edges, weights if edges.any() else None, names or [])
