"""Markov-blanket discovery (grow/shrink with interleaved pruning) and
assembly of per-node blankets into a CPDAG.

Blanket symmetry is enforced with the AND rule; adjacency survives only if
no subset of the smaller blanket separates the pair. Colliders follow from
the recorded separating sets, then Meek closure completes the pattern.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..cancellation import NEVER
from ..graphs import Cpdag, meek_closure
from .pc import build_ci_test, orient_v_structures


def iamb(data_or_n, target, alpha=0.05, test="fisher_z", ci_p_value=None, cancel=NEVER):
    """Markov blanket of `target`: forward growth with interleaved shrinking.

    Adds the most-dependent variable while its p-value clears alpha, then
    removes any member rendered independent given the rest. Ties break on
    the lower column index.
    """
    if ci_p_value is None:
        ci_p_value = build_ci_test(data_or_n, test)
        n_vars = data_or_n.n_columns
    else:
        n_vars = int(data_or_n)

    blanket = []

    def shrink():
        changed = True
        while changed:
            changed = False
            for member in list(blanket):
                rest = [m for m in blanket if m != member]
                if ci_p_value(target, member, rest) > alpha:
                    blanket.remove(member)
                    changed = True

    while True:
        cancel.check()
        best = None
        for v in range(n_vars):
            if v == target or v in blanket:
                continue
            p = ci_p_value(target, v, list(blanket))
            if p < alpha and (best is None or p < best[0]):
                best = (p, v)
        if best is None:
            break
        blanket.append(best[1])
        shrink()
    return sorted(blanket)


def mb_to_cpdag(blankets, data_or_n, alpha=0.05, test="fisher_z", ci_p_value=None, cancel=NEVER):
    """CPDAG from per-node blankets via AND-rule adjacency plus subset CI tests."""
    if ci_p_value is None:
        ci_p_value = build_ci_test(data_or_n, test)
        n = data_or_n.n_columns
    else:
        n = int(data_or_n)

    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in blankets[i]:
            if i in blankets[j]:
                adj[i, j] = adj[j, i] = True

    def candidate_pool(i, j):
        a = [v for v in blankets[i] if v != j]
        b = [v for v in blankets[j] if v != i]
        return a if len(a) <= len(b) else b

    sepsets = {}
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i, j]:
                continue
            cancel.check()
            pool = candidate_pool(i, j)
            found = False
            for size in range(len(pool) + 1):
                for cond in combinations(pool, size):
                    if ci_p_value(i, j, list(cond)) > alpha:
                        adj[i, j] = adj[j, i] = False
                        sepsets[(i, j)] = frozenset(cond)
                        sepsets[(j, i)] = frozenset(cond)
                        found = True
                        break
                if found:
                    break

    # separating sets for pairs the AND rule already kept apart
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i, j] or (i, j) in sepsets:
                continue
            pool = candidate_pool(i, j)
            best = None
            for size in range(len(pool) + 1):
                for cond in combinations(pool, size):
                    p = ci_p_value(i, j, list(cond))
                    if p > alpha and (best is None or p > best[0]):
                        best = (p, frozenset(cond))
                if best is not None:
                    break
            if best is not None:
                sepsets[(i, j)] = best[1]
                sepsets[(j, i)] = best[1]

    pattern = orient_v_structures(adj, sepsets)
    return meek_closure(pattern)


def iamb_cpdag(data, alpha=0.05, test="fisher_z", ci_p_value=None, cancel=NEVER):
    """Full-graph discovery: IAMB blankets for every node, then assembly."""
    if ci_p_value is None:
        ci_p_value = build_ci_test(data, test)
        n = data.n_columns
    else:
        n = int(data)
    blankets = [
        iamb(n, t, alpha=alpha, ci_p_value=ci_p_value, cancel=cancel) for t in range(n)
    ]
    return mb_to_cpdag(blankets, n, alpha=alpha, ci_p_value=ci_p_value, cancel=cancel)
