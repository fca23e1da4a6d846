"""Conditional independence tests: Fisher-Z, stratified chi-squared, rank scores.

A shared SufficientStats (correlation matrix plus sample count) serves many
Fisher-Z queries; tests are pure and safe to evaluate concurrently against
the same stats object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .dataset import ColumnMeta, Dataset
from .errors import ConstantColumn, NonDiscreteColumn, SingularSubmatrix

CLAMP = 1.0 - 1e-12


@dataclass(frozen=True)
class CiResult:
    statistic: float
    p_value: float
    conditioning_size: int
    reliable: bool


@dataclass(frozen=True)
class SufficientStats:
    correlation: np.ndarray
    n: int

    def __post_init__(self):
        corr = np.asarray(self.correlation, dtype=float)
        object.__setattr__(self, "correlation", corr)
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-8):
            raise ValueError("correlation matrix must have a unit diagonal")


def sufficient_stats(data_or_matrix):
    """Correlation stats from a Dataset or raw matrix; constant columns rejected."""
    values = data_or_matrix.values if isinstance(data_or_matrix, Dataset) else data_or_matrix
    values = np.asarray(values, dtype=float)
    if np.isnan(values).any():
        raise ValueError("impute missing values before computing sufficient stats")
    sds = values.std(axis=0)
    if (sds == 0).any():
        bad = int(np.flatnonzero(sds == 0)[0])
        raise ConstantColumn(f"column {bad} has zero variance")
    corr = np.corrcoef(values, rowvar=False)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return SufficientStats(corr, values.shape[0])


def partial_correlation(stats, i, j, cond):
    """Partial correlation of (i, j) given cond via precision-matrix inversion.

    |r| is clamped to 1 - 1e-12 so downstream atanh stays finite.
    """
    cond = sorted(cond)
    if i == j or i in cond or j in cond:
        raise ValueError("i, j must be distinct and outside the conditioning set")
    if not cond:
        # marginal case: the precision formula reduces to the raw entry,
        # so perfectly collinear pairs clamp instead of failing to invert
        return float(np.clip(stats.correlation[i, j], -CLAMP, CLAMP))
    idx = [i, j] + cond
    sub = stats.correlation[np.ix_(idx, idx)]
    try:
        omega = np.linalg.inv(sub)
    except np.linalg.LinAlgError as exc:
        raise SingularSubmatrix(f"singular correlation submatrix for {idx}") from exc
    denom = omega[0, 0] * omega[1, 1]
    if not np.isfinite(omega).all() or denom <= 0:
        raise SingularSubmatrix(f"ill-conditioned correlation submatrix for {idx}")
    r = -omega[0, 1] / np.sqrt(denom)
    return float(np.clip(r, -CLAMP, CLAMP))


def fisher_z_test(stats, i, j, cond=()):
    """Fisher-Z conditional independence test.

    With n <= |cond| + 3 the statistic is undefined; the test then reports
    independence with reliable=False instead of raising, which keeps
    constraint-based searches total.
    """
    cond = sorted(cond)
    if stats.n <= len(cond) + 3:
        return CiResult(0.0, 1.0, len(cond), False)
    r = partial_correlation(stats, i, j, cond)
    z = np.arctanh(r)
    statistic = float(np.sqrt(stats.n - len(cond) - 3) * abs(z))
    p = float(2.0 * sps.norm.sf(statistic))
    return CiResult(statistic, p, len(cond), True)


def _discrete_column(data, j):
    meta = data.column_meta[j]
    if meta.kind != "discrete":
        raise NonDiscreteColumn(f"column {meta.name} is not discrete")
    col = data.values[:, j]
    return col, meta.cardinality or int(np.nanmax(col)) + 1


def chi_squared_test(data, i, j, cond=()):
    """Pearson chi-squared test of i vs j, stratified by the conditioning columns.

    Degrees of freedom accumulate (c_i - 1)(c_j - 1) over nonempty strata.
    When n < 10 * df the result is flagged unreliable and p forced to 1.
    """
    cond = sorted(cond)
    xi, ci = _discrete_column(data, i)
    xj, cj = _discrete_column(data, j)
    cond_cols = [_discrete_column(data, k)[0] for k in cond]

    keep = ~np.isnan(xi) & ~np.isnan(xj)
    for c in cond_cols:
        keep &= ~np.isnan(c)
    xi, xj = xi[keep].astype(int), xj[keep].astype(int)
    cond_cols = [c[keep].astype(int) for c in cond_cols]
    n = len(xi)

    if cond_cols:
        strata_keys = np.stack(cond_cols, axis=1)
        _, strata = np.unique(strata_keys, axis=0, return_inverse=True)
    else:
        strata = np.zeros(n, dtype=int)

    statistic = 0.0
    df = 0
    for s in np.unique(strata):
        mask = strata == s
        if not mask.any():
            continue
        table = np.zeros((ci, cj))
        np.add.at(table, (xi[mask], xj[mask]), 1.0)
        total = table.sum()
        rows = table.sum(axis=1)
        cols = table.sum(axis=0)
        expected = np.outer(rows, cols) / total
        nonzero = expected > 0
        contrib = (table - expected) ** 2 / np.where(nonzero, expected, 1.0)
        statistic += float(contrib[nonzero].sum())
        df += (ci - 1) * (cj - 1)

    if df <= 0:
        return CiResult(0.0, 1.0, len(cond), False)
    p = float(sps.chi2.sf(statistic, df))
    if n < 10 * df:
        return CiResult(statistic, 1.0, len(cond), False)
    return CiResult(statistic, p, len(cond), True)


def rank_transform(data):
    """Replace continuous columns by normal scores (inverse-Phi of rank/(n+1)).

    Monotone transformations of the inputs leave the output unchanged up to
    ties, which gives Fisher-Z a nonlinear-lite pathway.
    """
    values = data.values.copy()
    n = data.n_samples
    for j, meta in enumerate(data.column_meta):
        if meta.kind != "continuous":
            continue
        col = values[:, j]
        observed = ~np.isnan(col)
        obs = col[observed]
        if len(obs) == 0 or np.all(obs == obs[0]):
            raise ConstantColumn(f"column {meta.name} has no rank information")
        ranks = sps.rankdata(obs, method="average")
        values[observed, j] = sps.norm.ppf(ranks / (len(obs) + 1))
    return data.with_values(values)


def numeric_view(data):
    """Dataset with every column treated as continuous for correlation stats.

    Discrete codes enter the correlation numerically; callers flag such
    results low-confidence.
    """
    meta = [ColumnMeta(m.name, "continuous") for m in data.column_meta]
    return Dataset(data.values, meta, data.domain_index, data.time_index)
