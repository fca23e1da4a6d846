"""Graph tuning: bootstrap edge confidence, threshold refinement, user
constraints.

Bootstrap replicates derive their seeds from the master seed by counter and
reduce in replicate order, so frequencies are bit-reproducible regardless
of execution overlap. Refinement removes weak edges first, then adds
confident missing ones, then repairs any cycle by dropping its
lowest-frequency edge.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .cancellation import NEVER
from .dataset import Dataset
from .discovery import run_algorithm
from .errors import ConflictingConstraints, CycleFromConstraints
from .evaluation import extension_for_metrics
from .graphs import Cpdag, Dag, SummaryGraph, TemporalGraph, is_acyclic, summary_graph

logger = logging.getLogger(__name__)

DEFAULT_BOOTSTRAP_SAMPLES = 100
DEFAULT_HI = 0.9
DEFAULT_LO = 0.1


@dataclass(frozen=True)
class EdgeConfidence:
    frequency: np.ndarray  # directed i->j bootstrap frequency
    b_samples: int
    skipped: int = 0

    def __post_init__(self):
        freq = np.asarray(self.frequency, dtype=float)
        object.__setattr__(self, "frequency", freq)
        if freq.diagonal().any():
            raise ValueError("frequency diagonal must be zero")
        if ((freq < 0) | (freq > 1)).any():
            raise ValueError("frequencies must lie in [0, 1]")

    def as_dict(self):
        return {
            "frequency": self.frequency.tolist(),
            "b_samples": self.b_samples,
            "skipped": self.skipped,
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True) + "\n"


def confidence_from_dict(obj):
    return EdgeConfidence(
        np.asarray(obj["frequency"], dtype=float), obj["b_samples"], obj.get("skipped", 0)
    )


@dataclass(frozen=True)
class ConstraintSet:
    required_edges: frozenset = field(default_factory=frozenset)
    forbidden_edges: frozenset = field(default_factory=frozenset)
    forbidden_as_effect: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        req = frozenset(tuple(e) for e in self.required_edges)
        forb = frozenset(tuple(e) for e in self.forbidden_edges)
        object.__setattr__(self, "required_edges", req)
        object.__setattr__(self, "forbidden_as_effect", frozenset(self.forbidden_as_effect))
        object.__setattr__(self, "forbidden_edges", forb)
        overlap = req & forb
        if overlap:
            raise ConflictingConstraints(f"edges both required and forbidden: {sorted(overlap)}")
        reciprocal = {(i, j) for i, j in req if (j, i) in req}
        if reciprocal:
            raise ConflictingConstraints(
                f"both orientations required for: {sorted(reciprocal)}"
            )
        blocked = {(i, j) for i, j in req if j in self.forbidden_as_effect}
        if blocked:
            raise ConflictingConstraints(
                f"required edges point into forbidden-effect nodes: {sorted(blocked)}"
            )

    @property
    def empty(self):
        return not (self.required_edges or self.forbidden_edges or self.forbidden_as_effect)

    def merged(self, other):
        return ConstraintSet(
            self.required_edges | other.required_edges,
            self.forbidden_edges | other.forbidden_edges,
            self.forbidden_as_effect | other.forbidden_as_effect,
        )

    def as_dict(self):
        return {
            "required": sorted([list(e) for e in self.required_edges]),
            "forbidden": sorted([list(e) for e in self.forbidden_edges]),
            "forbidden_as_effect": sorted(self.forbidden_as_effect),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True) + "\n"


def constraints_from_dict(obj):
    return ConstraintSet(
        frozenset(tuple(e) for e in obj.get("required", [])),
        frozenset(tuple(e) for e in obj.get("forbidden", [])),
        frozenset(obj.get("forbidden_as_effect", [])),
    )


def _resample_tabular(data, rng):
    rows = rng.integers(0, data.n_samples, data.n_samples)
    return Dataset(
        data.values[rows],
        data.column_meta,
        data.domain_index[rows] if data.domain_index is not None else None,
        None,
    )


def _resample_block(data, rng, block_length):
    """Moving-block bootstrap preserving short-range lag structure."""
    n = data.n_samples
    block_length = max(1, min(block_length, n))
    starts = rng.integers(0, n - block_length + 1, int(np.ceil(n / block_length)))
    rows = np.concatenate([np.arange(s, s + block_length) for s in starts])[:n]
    return Dataset(data.values[rows], data.column_meta, None, np.arange(n))


def _directed_votes(graph):
    """Vote matrix of one replicate; undirected CPDAG edges split half-half."""
    if isinstance(graph, Cpdag):
        votes = graph.directed.astype(float) + 0.5 * graph.undirected.astype(float)
    elif isinstance(graph, TemporalGraph):
        votes = summary_graph(graph).edges.astype(float)
    elif isinstance(graph, (Dag, SummaryGraph)):
        votes = graph.edges.astype(float)
        votes = votes.copy()
        np.fill_diagonal(votes, 0.0)
    else:
        raise TypeError(f"cannot count votes for {type(graph).__name__}")
    return votes


def bootstrap_edge_frequencies(
    data, algorithm_id, config=None, b_samples=DEFAULT_BOOTSTRAP_SAMPLES, seed=0, cancel=NEVER
):
    """Directed edge frequency over B resamples; frequency = votes / B.

    Failed replicates are skipped and recorded; only an all-fail run raises.
    Time-indexed data uses a moving-block bootstrap with block length
    2 * max_lag so lagged dependence survives resampling.
    """
    if b_samples < 1:
        raise ValueError("b_samples must be >= 1")
    config = config or {}
    p = data.n_columns
    votes = np.zeros((p, p))
    skipped = 0
    last_error = None
    for b in range(b_samples):
        cancel.check()
        rng = np.random.default_rng([seed, b])
        if data.is_time_series:
            lag = int(config.get("lag") or config.get("max_lag") or 3)
            resample = _resample_block(data, rng, 2 * lag)
        else:
            resample = _resample_tabular(data, rng)
        try:
            graph = run_algorithm(algorithm_id, resample, config, cancel=cancel)
        except Exception as exc:  # noqa: BLE001 - per-replicate isolation
            skipped += 1
            last_error = exc
            logger.warning("bootstrap replicate %d failed: %s", b, exc)
            continue
        votes += _directed_votes(graph)
    if skipped == b_samples:
        raise RuntimeError(f"all {b_samples} bootstrap replicates failed: {last_error}")
    return EdgeConfidence(votes / b_samples, b_samples, skipped)


def refine_graph(graph, confidence, hi=DEFAULT_HI, lo=DEFAULT_LO):
    """Threshold refinement; returns (refined Dag, uncertain edge list, log).

    Edges at frequency <= lo are dropped, absent edges at >= hi are added,
    and anything strictly between stays as-is but lands on the uncertain
    list. Cycles introduced by additions lose their lowest-frequency edge.
    """
    if not lo < hi:
        raise ValueError("thresholds must satisfy lo < hi")
    freq = confidence.frequency
    edges = graph.edges.copy()
    log = []

    for i, j in np.argwhere(edges):
        if freq[i, j] <= lo:
            edges[i, j] = False
            log.append(f"removed {i}->{j} at frequency {freq[i, j]:.2f}")
    for i, j in np.argwhere((freq >= hi) & ~edges):
        if i == j:
            continue
        edges[i, j] = True
        log.append(f"added {i}->{j} at frequency {freq[i, j]:.2f}")

    while not is_acyclic(edges):
        cycle_edges = _edges_on_some_cycle(edges)
        i, j = min(cycle_edges, key=lambda e: (freq[e[0], e[1]], e))
        edges[i, j] = False
        log.append(f"cycle repair: dropped {i}->{j} at frequency {freq[i, j]:.2f}")

    uncertain = [
        (int(i), int(j))
        for i, j in np.argwhere((freq > lo) & (freq < hi))
        if i != j
    ]
    return Dag(graph.n_nodes, edges), sorted(uncertain), log


def _edges_on_some_cycle(edges):
    """Edges (i, j) whose removal is a candidate cycle repair."""
    n = edges.shape[0]
    reach = edges.copy()
    for k in range(n):
        reach = reach | (reach[:, k : k + 1] & reach[k : k + 1, :])
    return [(int(i), int(j)) for i, j in np.argwhere(edges) if reach[j, i]]


def apply_constraints(graph, constraints):
    """Forbidden edges out, required edges in, forbidden effects cut; acyclic."""
    n = graph.n_nodes
    for i, j in constraints.required_edges | constraints.forbidden_edges:
        if not (0 <= i < n and 0 <= j < n):
            raise ConflictingConstraints(f"edge ({i}, {j}) outside the graph")
    edges = graph.edges.copy()
    for i, j in constraints.forbidden_edges:
        edges[i, j] = False
    for node in constraints.forbidden_as_effect:
        edges[:, node] = False
    for i, j in constraints.required_edges:
        edges[i, j] = True
        edges[j, i] = False  # required orientation wins over the reverse
    if not is_acyclic(edges):
        raise CycleFromConstraints("constraints force a directed cycle")
    return Dag(n, edges)


def as_dag(graph, seed=0):
    """View any algorithm output as a plain DAG for refinement."""
    if isinstance(graph, Dag):
        return graph
    if isinstance(graph, Cpdag):
        return extension_for_metrics(graph, seed)
    if isinstance(graph, TemporalGraph):
        return _summary_as_dag(summary_graph(graph))
    if isinstance(graph, SummaryGraph):
        return _summary_as_dag(graph)
    raise TypeError(f"cannot view {type(graph).__name__} as a DAG")


def _summary_as_dag(summary):
    """Break 2-cycles deterministically so refinement can run on a DAG."""
    edges = summary.edges.copy()
    for i, j in np.argwhere(edges & edges.T):
        if i < j:
            edges[j, i] = False
    while not is_acyclic(edges):
        cyc = _edges_on_some_cycle(edges)
        edges[max(cyc)] = False
    return Dag(summary.n_nodes, edges)
