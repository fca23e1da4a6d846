"""PC algorithm with the order-stable skeleton phase.

The skeleton search snapshots neighborhoods at the start of every
conditioning level and enumerates candidate separating sets in sorted,
lexicographic order, so results do not depend on edge-processing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..cancellation import NEVER
from ..dataset import Dataset
from ..errors import DataContainsMissing, TestMismatch
from ..graphs import Cpdag, meek_closure
from ..independence import (
    chi_squared_test,
    fisher_z_test,
    numeric_view,
    rank_transform,
    sufficient_stats,
)

PC_TESTS = ("fisher_z", "chi_squared", "rank_fisher_z")


@dataclass(frozen=True)
class PcConfig:
    alpha: float = 0.05
    max_depth: int | None = None
    test: str = "fisher_z"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.test not in PC_TESTS:
            raise ValueError(f"unknown CI test {self.test!r}")


def build_ci_test(data, test):
    """p-value function (i, j, cond) -> float for the configured test."""
    if test == "chi_squared":
        if any(m.kind != "discrete" for m in data.column_meta):
            raise TestMismatch("chi-squared requires all-discrete columns")
        return lambda i, j, cond: chi_squared_test(data, i, j, cond).p_value
    working = rank_transform(data) if test == "rank_fisher_z" else data
    stats = sufficient_stats(numeric_view(working))
    return lambda i, j, cond: fisher_z_test(stats, i, j, cond).p_value


def skeleton_search(n_nodes, ci_p_value, alpha, max_depth=None, cancel=NEVER):
    """Stable skeleton phase. Returns (adjacency, sepsets)."""
    adj = np.ones((n_nodes, n_nodes), dtype=bool)
    np.fill_diagonal(adj, False)
    sepsets = {}

    depth = 0
    while True:
        cancel.check()
        snapshot = adj.copy()
        max_degree = int(snapshot.sum(axis=1).max()) if n_nodes else 0
        if max_degree - 1 < depth:
            break
        if max_depth is not None and depth > max_depth:
            break
        for i in range(n_nodes):
            for j in range(i + 1, n_nodes):
                if not adj[i, j]:
                    continue
                found = False
                for base in (i, j):
                    other = j if base == i else i
                    neighbors = [k for k in np.flatnonzero(snapshot[base]) if k != other]
                    if len(neighbors) < depth:
                        continue
                    for cond in combinations(neighbors, depth):
                        if ci_p_value(base, other, list(cond)) > alpha:
                            adj[i, j] = adj[j, i] = False
                            sepsets[(i, j)] = frozenset(cond)
                            sepsets[(j, i)] = frozenset(cond)
                            found = True
                            break
                    if found:
                        break
        depth += 1
    return adj, sepsets


def maxp_sepsets(adj, ci_p_value, max_depth=None, cancel=NEVER):
    """Orientation sepsets chosen by maximum p-value over final neighborhoods.

    With an oracle every true separator scores 1, so collider decisions stay
    exact; on finite samples the max-p choice is markedly more stable than
    the sepset that happened to trigger removal mid-search.
    """
    n = adj.shape[0]
    chosen = {}
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i, j]:
                continue
            cancel.check()
            best_p, best_s = -1.0, frozenset()
            for base in (i, j):
                other = j if base == i else i
                neighbors = [k for k in np.flatnonzero(adj[base]) if k != other]
                limit = len(neighbors) if max_depth is None else min(len(neighbors), max_depth)
                for size in range(limit + 1):
                    for cond in combinations(neighbors, size):
                        p = ci_p_value(i, j, list(cond))
                        if p > best_p:
                            best_p, best_s = p, frozenset(cond)
            chosen[(i, j)] = best_s
            chosen[(j, i)] = best_s
    return chosen


def orient_v_structures(adj, sepsets):
    """Collider orientation from separating sets; first orientation wins ties."""
    n = adj.shape[0]
    directed = np.zeros((n, n), dtype=bool)
    undirected = adj.copy()
    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                if i == k or j == k:
                    continue
                if adj[i, k] and adj[j, k] and not adj[i, j]:
                    sep = sepsets.get((i, j))
                    if sep is None or k in sep:
                        continue
                    if directed[k, i] or directed[k, j]:
                        continue  # conflicting collider; keep the earlier one
                    directed[i, k] = True
                    directed[j, k] = True
                    undirected[i, k] = undirected[k, i] = False
                    undirected[j, k] = undirected[k, j] = False
    return Cpdag(n, directed, undirected)


def pc(data, cfg=PcConfig(), ci_p_value=None, cancel=NEVER):
    """PC: stable skeleton, sepset colliders, Meek closure.

    `ci_p_value` overrides the data-driven CI test; passing a d-separation
    oracle turns the run into an exactness check.
    """
    if isinstance(data, Dataset):
        if np.isnan(data.values).any():
            raise DataContainsMissing("impute missing values before running PC")
        n_nodes = data.n_columns
    else:
        n_nodes = int(data)
        if ci_p_value is None:
            raise ValueError("a CI test is required when no dataset is given")
    if ci_p_value is None:
        ci_p_value = build_ci_test(data, cfg.test)
    adj, _ = skeleton_search(n_nodes, ci_p_value, cfg.alpha, cfg.max_depth, cancel)
    oriented = maxp_sepsets(adj, ci_p_value, cfg.max_depth, cancel)
    pattern = orient_v_structures(adj, oriented)
    return meek_closure(pattern)
