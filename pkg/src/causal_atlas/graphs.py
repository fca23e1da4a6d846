"""Graph structures for causal models: DAGs, CPDAGs, temporal graphs, metrics.

Conventions used throughout the package:
  * adjacency matrices are boolean with rows = cause, columns = effect;
  * weight matrices align with the boolean adjacency (nonzero exactly on edges);
  * diagonals are always zero except in lagged matrices of temporal graphs,
    where self-loops encode autoregressive effects.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoConsistentExtension


def _default_labels(n):
    return [f"X{i}" for i in range(n)]


def topological_order(edges):
    """Kahn topological sort of a boolean adjacency matrix.

    Returns the order as a list, or None if the graph has a directed cycle.
    """
    n = edges.shape[0]
    indeg = edges.sum(axis=0).astype(int)
    queue = sorted(np.flatnonzero(indeg == 0).tolist())
    order = []
    indeg = indeg.copy()
    while queue:
        u = queue.pop(0)
        order.append(u)
        for v in np.flatnonzero(edges[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                # insertion keeps the queue sorted for determinism
                queue.append(int(v))
                queue.sort()
    if len(order) != n:
        return None
    return order


def is_acyclic(edges):
    return topological_order(edges) is not None


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph with optional edge weights."""

    n_nodes: int
    edges: np.ndarray
    weights: np.ndarray | None = None
    node_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=bool)
        object.__setattr__(self, "edges", edges)
        if edges.shape != (self.n_nodes, self.n_nodes):
            raise DimensionMismatch("adjacency shape does not match n_nodes")
        if edges.diagonal().any():
            raise ValueError("DAG adjacency must have a zero diagonal")
        if not is_acyclic(edges):
            raise ValueError("adjacency contains a directed cycle")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            object.__setattr__(self, "weights", w)
            if w.shape != edges.shape:
                raise DimensionMismatch("weights shape does not match adjacency")
            if not np.array_equal(w != 0, edges):
                raise ValueError("weights must be nonzero exactly on edges")
        if not self.node_labels:
            object.__setattr__(self, "node_labels", _default_labels(self.n_nodes))
        elif len(self.node_labels) != self.n_nodes:
            raise DimensionMismatch("node_labels length does not match n_nodes")

    @property
    def n_edges(self):
        return int(self.edges.sum())

    def parents(self, j):
        return np.flatnonzero(self.edges[:, j]).tolist()

    def topological_order(self):
        return topological_order(self.edges)


@dataclass(frozen=True)
class SummaryGraph:
    """Directed graph where cycles are permitted (time-series summary view)."""

    n_nodes: int
    edges: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=bool)
        object.__setattr__(self, "edges", edges)
        if edges.shape != (self.n_nodes, self.n_nodes):
            raise DimensionMismatch("adjacency shape does not match n_nodes")
        if edges.diagonal().any():
            raise ValueError("summary graph must have a zero diagonal")

    @property
    def n_edges(self):
        return int(self.edges.sum())


@dataclass(frozen=True)
class Cpdag:
    """Markov equivalence class: directed (compelled) plus undirected edges."""

    n_nodes: int
    directed: np.ndarray
    undirected: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directed, dtype=bool)
        u = np.asarray(self.undirected, dtype=bool)
        object.__setattr__(self, "directed", d)
        object.__setattr__(self, "undirected", u)
        for m in (d, u):
            if m.shape != (self.n_nodes, self.n_nodes):
                raise DimensionMismatch("matrix shape does not match n_nodes")
            if m.diagonal().any():
                raise ValueError("CPDAG matrices must have zero diagonals")
        if not np.array_equal(u, u.T):
            raise ValueError("undirected matrix must be symmetric")
        overlap = (d | d.T) & u
        if overlap.any():
            raise ValueError("a node pair cannot be both directed and undirected")

    @property
    def skeleton(self):
        return self.directed | self.directed.T | self.undirected

    @property
    def n_edges(self):
        return int(self.directed.sum() + self.undirected.sum() // 2)


@dataclass(frozen=True)
class TemporalGraph:
    """Instantaneous matrix W0 plus lagged matrices A_1..A_L (rows = cause)."""

    n_nodes: int
    max_lag: int
    intra: np.ndarray
    lagged: list[np.ndarray]

    def __post_init__(self):
        intra = np.asarray(self.intra, dtype=float)
        object.__setattr__(self, "intra", intra)
        if intra.shape != (self.n_nodes, self.n_nodes):
            raise DimensionMismatch("intra shape does not match n_nodes")
        if intra.diagonal().any():
            raise ValueError("intra matrix must have a zero diagonal")
        if not is_acyclic(intra != 0):
            raise ValueError("intra matrix must be acyclic")
        lagged = [np.asarray(a, dtype=float) for a in self.lagged]
        object.__setattr__(self, "lagged", lagged)
        if len(lagged) != self.max_lag:
            raise DimensionMismatch("lagged list length must equal max_lag")
        for a in lagged:
            if a.shape != (self.n_nodes, self.n_nodes):
                raise DimensionMismatch("lagged matrix shape does not match n_nodes")

    def intra_dag(self):
        return Dag(self.n_nodes, self.intra != 0, np.where(self.intra != 0, self.intra, 0.0))


@dataclass(frozen=True)
class EdgeMetrics:
    """Directed-edge agreement counts and derived scores."""

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    shd: int

    def as_dict(self):
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "shd": self.shd,
        }


def erdos_renyi_dag(n_nodes, edge_prob, rng_seed):
    """Random DAG: permute nodes, connect forward pairs independently.

    Deterministic per seed. Weights are left unset; simulators attach them.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    order = rng.permutation(n_nodes)
    edges = np.zeros((n_nodes, n_nodes), dtype=bool)
    for a in range(n_nodes):
        for b in range(a + 1, n_nodes):
            if rng.random() < edge_prob:
                edges[order[a], order[b]] = True
    return Dag(n_nodes, edges)


# ---------------------------------------------------------------------------
# Orientation machinery: v-structures, Meek rules, equivalence conversions
# ---------------------------------------------------------------------------


def _meek_pass(directed, undirected):
    """One sweep of Meek rules R1-R4; returns True if anything was oriented."""
    n = directed.shape[0]
    adj = directed | directed.T | undirected
    changed = False

    def orient(a, b):
        nonlocal changed
        undirected[a, b] = False
        undirected[b, a] = False
        directed[a, b] = True
        changed = True

    nonadj = ~adj
    np.fill_diagonal(nonadj, False)

    # R1: a -> b - c with a, c nonadjacent  =>  b -> c
    r1 = (directed.T @ nonadj) > 0
    # R2: a -> c -> b with a - b  =>  a -> b
    r2 = (directed @ directed) > 0
    for b, c in np.argwhere(undirected):
        if undirected[b, c] and r1[b, c]:
            orient(b, c)
    for a, b in np.argwhere(undirected):
        if undirected[a, b] and r2[a, b]:
            orient(a, b)

    # R3: a - b, a - c -> b, a - d -> b with c, d nonadjacent  =>  a -> b
    # R4: a - b, a - c, c -> d -> b with c, b nonadjacent      =>  a -> b
    for a, b in np.argwhere(undirected):
        if not undirected[a, b]:
            continue
        into_b = np.flatnonzero(undirected[a] & directed[:, b])
        done = False
        for i in range(len(into_b)):
            for j in range(i + 1, len(into_b)):
                if nonadj[into_b[i], into_b[j]]:
                    orient(a, b)
                    done = True
                    break
            if done:
                break
        if done:
            continue
        for c in np.flatnonzero(undirected[a] & nonadj[:, b]):
            if (directed[c] & directed[:, b]).any():
                orient(a, b)
                break
    return changed


def meek_closure(cpdag):
    """Fixed point of Meek orientation rules R1-R4. Idempotent."""
    directed = cpdag.directed.copy()
    undirected = cpdag.undirected.copy()
    while _meek_pass(directed, undirected):
        pass
    return Cpdag(cpdag.n_nodes, directed, undirected)


def _v_structure_mask(edges):
    """Boolean matrix marking edges that take part in some v-structure."""
    n = edges.shape[0]
    adj = edges | edges.T
    mask = np.zeros_like(edges)
    for z in range(n):
        pa = np.flatnonzero(edges[:, z])
        for i in range(len(pa)):
            for j in range(i + 1, len(pa)):
                x, y = pa[i], pa[j]
                if not adj[x, y]:
                    mask[x, z] = True
                    mask[y, z] = True
    return mask


def dag_to_cpdag(dag):
    """Equivalence class of a DAG: skeleton + v-structures + Meek closure."""
    compelled = _v_structure_mask(dag.edges)
    undirected = (dag.edges | dag.edges.T) & ~(compelled | compelled.T)
    return meek_closure(Cpdag(dag.n_nodes, compelled, undirected))


def cpdag_to_dag(cpdag, rng_seed):
    """Seeded random consistent extension of a CPDAG (Dor-Tarsi).

    Picks removable sink candidates in seeded random order, so every
    consistent extension is reachable; exact uniformity over the class is
    not guaranteed. Deterministic per seed.
    """
    rng = np.random.default_rng(rng_seed)
    n = cpdag.n_nodes
    directed = cpdag.directed.copy()
    undirected = cpdag.undirected.copy()
    result = cpdag.directed.copy()
    alive = np.ones(n, dtype=bool)

    remaining = n
    while remaining:
        candidates = []
        for x in np.flatnonzero(alive):
            if directed[x, alive].any():
                continue  # x has outgoing directed edges, not a sink
            und = np.flatnonzero(undirected[x] & alive)
            neigh = np.flatnonzero((directed[:, x] | directed[x] | undirected[x]) & alive)
            ok = True
            for y in und:
                others = neigh[neigh != y]
                adj_y = directed[y] | directed[:, y] | undirected[y]
                if not adj_y[others].all():
                    ok = False
                    break
            if ok:
                candidates.append(int(x))
        if not candidates:
            raise NoConsistentExtension("CPDAG admits no consistent extension")
        x = candidates[int(rng.integers(len(candidates)))]
        for y in np.flatnonzero(undirected[x] & alive):
            result[y, x] = True
        alive[x] = False
        directed[x, :] = False
        directed[:, x] = False
        undirected[x, :] = False
        undirected[:, x] = False
        remaining -= 1
    return Dag(n, result)


def structural_metrics(predicted, truth):
    """Directed-edge precision/recall/F1 and SHD, diagonal excluded.

    A reversed edge costs one FP plus one FN and SHD 1. When both graphs
    are empty the scores are defined as perfect agreement.
    """
    pe = np.asarray(predicted.edges, dtype=bool).copy()
    te = np.asarray(truth.edges, dtype=bool).copy()
    if pe.shape != te.shape:
        raise DimensionMismatch("graphs have different node counts")
    np.fill_diagonal(pe, False)
    np.fill_diagonal(te, False)

    tp = int((pe & te).sum())
    fp = int((pe & ~te).sum())
    fn = int((~pe & te).sum())

    if te.sum() == 0 and pe.sum() == 0:
        precision = recall = f1 = 1.0
    else:
        precision = tp / (tp + fp) if (tp + fp) else 0.0
        recall = tp / (tp + fn) if (tp + fn) else 0.0
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0

    # SHD over unordered pairs: any status difference among
    # {absent, i->j, j->i, both} costs 1, so a reversal costs 1.
    upper = np.triu(np.ones_like(pe), k=1)
    status_p = pe.astype(int) + 2 * pe.T.astype(int)
    status_t = te.astype(int) + 2 * te.T.astype(int)
    shd = int(((status_p != status_t) & (upper > 0)).sum())
    return EdgeMetrics(tp, fp, fn, precision, recall, f1, shd)


def summary_graph(tg):
    """Union of instantaneous and lagged edges, autoregressive diagonal dropped."""
    edges = tg.intra != 0
    for a in tg.lagged:
        edges = edges | (a != 0)
    edges = edges.copy()
    np.fill_diagonal(edges, False)
    return SummaryGraph(tg.n_nodes, edges)


def d_separated(dag, i, j, cond):
    """d-separation test on a DAG via reachability (Bayes-ball).

    Returns True when i and j are d-separated given the conditioning set.
    Used as the CI oracle in exactness tests.
    """
    cond = frozenset(cond)
    if i == j:
        return False
    edges = dag.edges
    parents = [np.flatnonzero(edges[:, v]) for v in range(dag.n_nodes)]
    children = [np.flatnonzero(edges[v]) for v in range(dag.n_nodes)]

    # ancestors of the conditioning set enable collider traversal
    an_cond = set(cond)
    stack = list(cond)
    while stack:
        v = stack.pop()
        for p in parents[v]:
            if p not in an_cond:
                an_cond.add(int(p))
                stack.append(int(p))

    # states: (node, direction) with direction "up" (from child) or "down"
    visited = set()
    stack = [(i, "up")]
    while stack:
        node, direction = stack.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node == j:
            return False
        if direction == "up" and node not in cond:
            for p in parents[node]:
                stack.append((int(p), "up"))
            for c in children[node]:
                stack.append((int(c), "down"))
        elif direction == "down":
            if node not in cond:
                for c in children[node]:
                    stack.append((int(c), "down"))
            if node in an_cond:
                for p in parents[node]:
                    stack.append((int(p), "up"))
    return True


# ---------------------------------------------------------------------------
# Serialization: JSON objects and adjacency CSV, both bit-exact round trips
# ---------------------------------------------------------------------------


def graph_to_json_obj(graph):
    """JSON-ready dict for a Dag, Cpdag, SummaryGraph, or TemporalGraph."""
    if isinstance(graph, TemporalGraph):
        return {
            "kind": "temporal",
            "n_nodes": graph.n_nodes,
            "max_lag": graph.max_lag,
            "intra": graph.intra.tolist(),
            "lagged": [a.tolist() for a in graph.lagged],
        }
    if isinstance(graph, Cpdag):
        edges = []
        for a, b in np.argwhere(graph.directed):
            edges.append({"from": int(a), "to": int(b), "directed": True})
        for a, b in np.argwhere(np.triu(graph.undirected)):
            edges.append({"from": int(a), "to": int(b), "directed": False})
        return {
            "kind": "cpdag",
            "nodes": _default_labels(graph.n_nodes),
            "edges": edges,
        }
    kind = "dag" if isinstance(graph, Dag) else "summary"
    labels = graph.node_labels if isinstance(graph, Dag) else _default_labels(graph.n_nodes)
    edges = []
    for a, b in np.argwhere(graph.edges):
        e = {"from": int(a), "to": int(b), "directed": True}
        if isinstance(graph, Dag) and graph.weights is not None:
            e["weight"] = float(graph.weights[a, b])
        edges.append(e)
    return {"kind": kind, "nodes": list(labels), "edges": edges}


def graph_from_json_obj(obj):
    kind = obj.get("kind", "dag")
    if kind == "temporal":
        return TemporalGraph(
            int(obj["n_nodes"]),
            int(obj["max_lag"]),
            np.asarray(obj["intra"], dtype=float),
            [np.asarray(a, dtype=float) for a in obj["lagged"]],
        )
    n = len(obj["nodes"])
    if kind == "cpdag":
        directed = np.zeros((n, n), dtype=bool)
        undirected = np.zeros((n, n), dtype=bool)
        for e in obj["edges"]:
            a, b = int(e["from"]), int(e["to"])
            if e["directed"]:
                directed[a, b] = True
            else:
                undirected[a, b] = True
                undirected[b, a] = True
        return Cpdag(n, directed, undirected)
    edges = np.zeros((n, n), dtype=bool)
    weights = np.zeros((n, n), dtype=float)
    any_weight = False
    for e in obj["edges"]:
        a, b = int(e["from"]), int(e["to"])
        edges[a, b] = True
        if "weight" in e:
            weights[a, b] = float(e["weight"])
            any_weight = True
    if kind == "summary":
        return SummaryGraph(n, edges)
    return Dag(n, edges, weights if any_weight else None, list(obj["nodes"]))


def graph_to_json(graph):
    return json.dumps(graph_to_json_obj(graph), sort_keys=True)


def graph_from_json(text):
    return graph_from_json_obj(json.loads(text))


def dag_to_adjacency_csv(graph):
    """Adjacency CSV: header row of labels, then one weight/indicator row per cause."""
    if isinstance(graph, Dag):
        labels = graph.node_labels
        matrix = graph.weights if graph.weights is not None else graph.edges.astype(float)
    else:
        labels = _default_labels(graph.n_nodes)
        matrix = graph.edges.astype(float)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(labels)
    for row in matrix:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def dag_from_adjacency_csv(text, weighted=None):
    rows = list(csv.reader(io.StringIO(text)))
    labels = rows[0]
    matrix = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    if matrix.shape != (len(labels), len(labels)):
        raise DimensionMismatch("adjacency CSV is not square")
    edges = matrix != 0
    if weighted is None:
        weighted = not np.array_equal(matrix, edges.astype(float))
    return Dag(len(labels), edges, matrix if weighted else None, labels)
