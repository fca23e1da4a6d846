"""Scoring of algorithm outputs against ground truth.

Equivalence-class outputs are converted to DAGs by sampling seeded
consistent extensions and keeping the best-scoring one. Finite-sample
patterns sometimes admit no consistent extension at all; those fall back
to orienting the skeleton along a seeded linear extension of the directed
part, which preserves the skeleton and every directed edge. Temporal
outputs are compared on the summary graph with the diagonal dropped.
"""

from __future__ import annotations

import numpy as np

from .errors import NoConsistentExtension
from .graphs import (
    Cpdag,
    Dag,
    SummaryGraph,
    TemporalGraph,
    cpdag_to_dag,
    structural_metrics,
    summary_graph,
)

DEFAULT_EXTENSION_SAMPLES = 60


def random_linear_extension(directed, rng):
    """Topological order of the directed part with seeded tie-breaking.

    Falls back to a random permutation if the directed part is cyclic.
    """
    n = directed.shape[0]
    indeg = directed.sum(axis=0).astype(int).copy()
    available = [int(v) for v in np.flatnonzero(indeg == 0)]
    order = []
    while available:
        pick = available.pop(int(rng.integers(len(available))))
        order.append(pick)
        for w in np.flatnonzero(directed[pick]):
            indeg[w] -= 1
            if indeg[w] == 0:
                available.append(int(w))
    if len(order) != n:
        return [int(v) for v in rng.permutation(n)]
    return order


def forced_extension(cpdag, rng_seed):
    """Skeleton-preserving DAG for patterns without a consistent extension."""
    rng = np.random.default_rng(rng_seed)
    order = random_linear_extension(cpdag.directed, rng)
    rank = {v: k for k, v in enumerate(order)}
    n = cpdag.n_nodes
    edges = np.zeros((n, n), dtype=bool)
    skeleton = cpdag.skeleton
    for i in range(n):
        for j in range(i + 1, n):
            if not skeleton[i, j]:
                continue
            if cpdag.directed[i, j] and rank[i] < rank[j]:
                edges[i, j] = True
            elif cpdag.directed[j, i] and rank[j] < rank[i]:
                edges[j, i] = True
            elif rank[i] < rank[j]:
                edges[i, j] = True
            else:
                edges[j, i] = True
    return Dag(n, edges)


def extension_for_metrics(cpdag, rng_seed):
    try:
        return cpdag_to_dag(cpdag, rng_seed)
    except NoConsistentExtension:
        return forced_extension(cpdag, rng_seed)


def to_summary(graph):
    if isinstance(graph, TemporalGraph):
        return summary_graph(graph)
    if isinstance(graph, SummaryGraph):
        return graph
    if isinstance(graph, Dag):
        edges = graph.edges.copy()
        np.fill_diagonal(edges, False)
        return SummaryGraph(graph.n_nodes, edges)
    raise TypeError(f"cannot view {type(graph).__name__} as a summary graph")


def evaluate_against_truth(predicted, truth, extension_samples=DEFAULT_EXTENSION_SAMPLES):
    """EdgeMetrics of a predicted graph of any kind against the ground truth.

    CPDAGs are scored by the best of `extension_samples` seeded DAG
    extensions: ties on F1 break toward lower SHD, then the earlier seed,
    keeping the procedure deterministic.
    """
    if isinstance(truth, TemporalGraph) or isinstance(predicted, (TemporalGraph, SummaryGraph)):
        return structural_metrics(to_summary(predicted), to_summary(truth))
    truth_dag = truth
    if isinstance(predicted, Cpdag):
        best = None
        for seed in range(extension_samples):
            candidate = extension_for_metrics(predicted, seed)
            m = structural_metrics(candidate, truth_dag)
            if best is None or m.f1 > best.f1 or (m.f1 == best.f1 and m.shd < best.shd):
                best = m
        return best
    return structural_metrics(predicted, truth_dag)
