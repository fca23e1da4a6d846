"""Two-phase greedy structure search over Gaussian local BIC scores.

Hill-climbs in DAG space: a forward phase of single-edge additions, then a
backward phase of deletions and reversals. The total score is the sum of
per-node local scores, so move deltas touch at most two nodes. The result
is reported as an equivalence class via dag_to_cpdag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cancellation import NEVER
from ..dataset import Dataset
from ..errors import DataContainsMissing
from ..graphs import Dag, dag_to_cpdag, is_acyclic

VARIANCE_FLOOR = 1e-12
MIN_GAIN = 1e-9


@dataclass(frozen=True)
class ScoreConfig:
    penalty_multiplier: float = 1.0
    max_in_degree: int | None = None

    def __post_init__(self):
        if self.penalty_multiplier <= 0:
            raise ValueError("penalty_multiplier must be positive")


def local_bic(values, j, parents, penalty_multiplier):
    """Gaussian local score: -(n/2) ln sigma^2_j - penalty (ln n / 2)(|Pa|+1)."""
    n = values.shape[0]
    y = values[:, j]
    if parents:
        x = np.column_stack([values[:, list(parents)], np.ones(n)])
        beta, *_ = np.linalg.lstsq(x, y, rcond=None)
        resid = y - x @ beta
    else:
        resid = y - y.mean()
    sigma2 = max(float(resid @ resid) / n, VARIANCE_FLOOR)
    penalty = penalty_multiplier * (np.log(n) / 2.0) * (len(parents) + 1)
    return -(n / 2.0) * np.log(sigma2) - penalty


def total_score(values, edges, penalty_multiplier):
    return sum(
        local_bic(values, j, list(np.flatnonzero(edges[:, j])), penalty_multiplier)
        for j in range(edges.shape[0])
    )


def score_search(data, cfg=ScoreConfig(), cancel=NEVER):
    """Greedy BIC search; returns the CPDAG of the final DAG."""
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if np.isnan(values).any():
        raise DataContainsMissing("impute missing values before score search")
    p = values.shape[1]
    edges = np.zeros((p, p), dtype=bool)
    local = np.array([local_bic(values, j, [], cfg.penalty_multiplier) for j in range(p)])

    def delta_add(i, j):
        if edges[i, j] or i == j:
            return None
        if cfg.max_in_degree is not None and edges[:, j].sum() >= cfg.max_in_degree:
            return None
        edges[i, j] = True
        ok = is_acyclic(edges)
        parents = list(np.flatnonzero(edges[:, j]))
        edges[i, j] = False
        if not ok:
            return None
        return local_bic(values, j, parents, cfg.penalty_multiplier) - local[j]

    # forward: best single addition until no strict improvement
    while True:
        cancel.check()
        best = None
        for i in range(p):
            for j in range(p):
                gain = delta_add(i, j)
                if gain is not None and gain > MIN_GAIN and (best is None or gain > best[0]):
                    best = (gain, i, j)
        if best is None:
            break
        _, i, j = best
        edges[i, j] = True
        local[j] = local_bic(values, j, list(np.flatnonzero(edges[:, j])), cfg.penalty_multiplier)

    # backward: best deletion or reversal until no strict improvement
    while True:
        cancel.check()
        best = None
        for i, j in np.argwhere(edges):
            edges[i, j] = False
            gain_del = (
                local_bic(values, j, list(np.flatnonzero(edges[:, j])), cfg.penalty_multiplier)
                - local[j]
            )
            if gain_del > MIN_GAIN and (best is None or gain_del > best[0]):
                best = (gain_del, int(i), int(j), "delete")
            gain_rev_add = delta_add(j, i)
            if gain_rev_add is not None:
                gain_rev = gain_del + gain_rev_add
                if gain_rev > MIN_GAIN and (best is None or gain_rev > best[0]):
                    best = (gain_rev, int(i), int(j), "reverse")
            edges[i, j] = True
        if best is None:
            break
        _, i, j, move = best
        edges[i, j] = False
        if move == "reverse":
            edges[j, i] = True
            local[i] = local_bic(
                values, i, list(np.flatnonzero(edges[:, i])), cfg.penalty_multiplier
            )
        local[j] = local_bic(values, j, list(np.flatnonzero(edges[:, j])), cfg.penalty_multiplier)

    return dag_to_cpdag(Dag(p, edges))
