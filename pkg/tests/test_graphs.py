import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_atlas.errors import DimensionMismatch
from causal_atlas.graphs import (
    Cpdag,
    Dag,
    SummaryGraph,
    TemporalGraph,
    cpdag_to_dag,
    d_separated,
    dag_from_adjacency_csv,
    dag_to_adjacency_csv,
    dag_to_cpdag,
    erdos_renyi_dag,
    graph_from_json,
    graph_to_json,
    meek_closure,
    structural_metrics,
    summary_graph,
)

from .oracles import all_dags, cpdag_of_class, d_separated_bruteforce, markov_class


def dag_from_edges(n, edges):
    m = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        m[i, j] = True
    return Dag(n, m)


class TestErdosRenyi:
    def test_zero_probability_gives_empty_graph(self):
        assert erdos_renyi_dag(10, 0.0, 7).n_edges == 0

    def test_unit_probability_gives_complete_order(self):
        dag = erdos_renyi_dag(10, 1.0, 7)
        assert dag.n_edges == 45

    def test_mean_edge_count_matches_binomial(self):
        # default benchmark density: 45 pairs at 0.22 -> mean 9.9 (avg degree ~2)
        counts = [erdos_renyi_dag(10, 0.22, seed).n_edges for seed in range(1000)]
        assert abs(np.mean(counts) - 45 * 0.22) < 0.3

    def test_deterministic_per_seed(self):
        a = erdos_renyi_dag(12, 0.3, 123)
        b = erdos_renyi_dag(12, 0.3, 123)
        assert np.array_equal(a.edges, b.edges)

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            erdos_renyi_dag(5, 1.5, 0)


class TestDagToCpdag:
    def test_empty_dag(self):
        c = dag_to_cpdag(dag_from_edges(3, []))
        assert not c.directed.any() and not c.undirected.any()

    def test_collider_stays_directed(self):
        # enumeration oracle: the 3-node collider class has a single member
        dag = dag_from_edges(3, [(0, 2), (1, 2)])
        assert len(markov_class(dag.edges)) == 1
        c = dag_to_cpdag(dag)
        assert c.directed[0, 2] and c.directed[1, 2]
        assert not c.undirected.any()

    def test_chain_becomes_undirected(self):
        dag = dag_from_edges(3, [(0, 1), (1, 2)])
        assert len(markov_class(dag.edges)) == 3
        c = dag_to_cpdag(dag)
        assert not c.directed.any()
        assert c.undirected[0, 1] and c.undirected[1, 2] and not c.undirected[0, 2]

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_enumeration_oracle_exhaustively(self, n):
        for m in all_dags(n):
            expected_d, expected_u = cpdag_of_class(m)
            got = dag_to_cpdag(Dag(n, m))
            assert np.array_equal(got.directed, expected_d), m
            assert np.array_equal(got.undirected, expected_u), m


class TestMeekClosure:
    def test_rule1_orients_adjacent_tail(self):
        directed = np.zeros((3, 3), dtype=bool)
        undirected = np.zeros((3, 3), dtype=bool)
        directed[0, 1] = True
        undirected[1, 2] = undirected[2, 1] = True
        closed = meek_closure(Cpdag(3, directed, undirected))
        assert closed.directed[1, 2]

    def test_rule2_orients_transitive_edge(self):
        directed = np.zeros((3, 3), dtype=bool)
        undirected = np.zeros((3, 3), dtype=bool)
        directed[0, 1] = directed[1, 2] = True
        undirected[0, 2] = undirected[2, 0] = True
        closed = meek_closure(Cpdag(3, directed, undirected))
        assert closed.directed[0, 2]

    def test_idempotent(self):
        dag = erdos_renyi_dag(6, 0.4, 5)
        c = dag_to_cpdag(dag)
        again = meek_closure(c)
        assert np.array_equal(again.directed, c.directed)
        assert np.array_equal(again.undirected, c.undirected)


class TestCpdagToDag:
    def test_fully_directed_is_identity(self):
        dag = dag_from_edges(3, [(0, 2), (1, 2)])
        c = dag_to_cpdag(dag)
        out = cpdag_to_dag(c, 0)
        assert np.array_equal(out.edges, dag.edges)

    def test_single_undirected_edge(self):
        undirected = np.zeros((2, 2), dtype=bool)
        undirected[0, 1] = undirected[1, 0] = True
        seen = set()
        for seed in range(20):
            out = cpdag_to_dag(Cpdag(2, np.zeros((2, 2), dtype=bool), undirected), seed)
            seen.add((bool(out.edges[0, 1]), bool(out.edges[1, 0])))
            again = cpdag_to_dag(Cpdag(2, np.zeros((2, 2), dtype=bool), undirected), seed)
            assert np.array_equal(out.edges, again.edges)
        assert seen == {(True, False), (False, True)}

    def test_undirected_chain_never_collider(self):
        undirected = np.zeros((3, 3), dtype=bool)
        undirected[0, 1] = undirected[1, 0] = True
        undirected[1, 2] = undirected[2, 1] = True
        seen = set()
        for seed in range(60):
            out = cpdag_to_dag(Cpdag(3, np.zeros((3, 3), dtype=bool), undirected), seed)
            assert not (out.edges[0, 1] and out.edges[2, 1]), "collider extension"
            seen.add(tuple(map(tuple, out.edges)))
        assert len(seen) == 3

    def test_random_cpdag_extensions_are_acyclic_and_consistent(self):
        rng = np.random.default_rng(0)
        for trial in range(10_000):
            n = int(rng.integers(2, 7))
            dag = erdos_renyi_dag(n, float(rng.uniform(0.1, 0.7)), int(rng.integers(2**31)))
            c = dag_to_cpdag(dag)
            out = cpdag_to_dag(c, int(rng.integers(2**31)))
            # Dag constructor enforces acyclicity; also check class membership
            assert np.array_equal(out.edges | out.edges.T, c.skeleton)
            assert np.array_equal(dag_to_cpdag(out).directed, c.directed)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_roundtrip_is_class_invariant_exhaustive(self, n):
        for m in all_dags(n):
            c = dag_to_cpdag(Dag(n, m))
            back = cpdag_to_dag(c, 11)
            c2 = dag_to_cpdag(back)
            assert np.array_equal(c2.directed, c.directed)
            assert np.array_equal(c2.undirected, c.undirected)


class TestStructuralMetrics:
    def test_identical_graphs(self):
        g = erdos_renyi_dag(8, 0.3, 3)
        m = structural_metrics(g, g)
        assert m.precision == m.recall == m.f1 == 1.0
        assert m.shd == 0

    def test_partial_recovery_hand_counts(self):
        truth = dag_from_edges(3, [(0, 1), (1, 2)])
        pred = dag_from_edges(3, [(0, 1)])
        m = structural_metrics(pred, truth)
        assert m.tp == 1 and m.fp == 0 and m.fn == 1
        assert m.precision == 1.0 and m.recall == 0.5
        assert abs(m.f1 - 2 / 3) < 1e-12
        assert m.shd == 1

    def test_reversal_convention(self):
        truth = dag_from_edges(2, [(0, 1)])
        pred = dag_from_edges(2, [(1, 0)])
        m = structural_metrics(pred, truth)
        assert m.tp == 0 and m.fp == 1 and m.fn == 1
        assert m.precision == 0.0 and m.recall == 0.0 and m.f1 == 0.0
        assert m.shd == 1

    def test_empty_vs_empty_is_perfect(self):
        g = dag_from_edges(4, [])
        m = structural_metrics(g, g)
        assert m.f1 == 1.0 and m.shd == 0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            structural_metrics(dag_from_edges(2, []), dag_from_edges(3, []))

    def test_shd_symmetry_random_pairs(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            n = int(rng.integers(2, 8))
            a = erdos_renyi_dag(n, 0.4, int(rng.integers(2**31)))
            b = erdos_renyi_dag(n, 0.4, int(rng.integers(2**31)))
            assert structural_metrics(a, b).shd == structural_metrics(b, a).shd


class TestSummaryGraph:
    def test_all_zero(self):
        tg = TemporalGraph(3, 2, np.zeros((3, 3)), [np.zeros((3, 3))] * 2)
        assert summary_graph(tg).n_edges == 0

    def test_single_lagged_edge(self):
        lagged = [np.zeros((3, 3)) for _ in range(2)]
        lagged[1][0, 1] = 0.5
        tg = TemporalGraph(3, 2, np.zeros((3, 3)), lagged)
        s = summary_graph(tg)
        assert s.edges[0, 1] and s.n_edges == 1

    def test_two_cycle_allowed(self):
        lagged = [np.zeros((2, 2)) for _ in range(3)]
        lagged[0][0, 1] = 0.4
        lagged[2][1, 0] = -0.2
        tg = TemporalGraph(2, 3, np.zeros((2, 2)), lagged)
        s = summary_graph(tg)
        assert s.edges[0, 1] and s.edges[1, 0]

    def test_autoregressive_diagonal_dropped(self):
        lagged = [np.eye(3) * 0.5]
        tg = TemporalGraph(3, 1, np.zeros((3, 3)), lagged)
        assert summary_graph(tg).n_edges == 0


class TestDSeparation:
    def test_matches_bruteforce_on_random_graphs(self):
        rng = np.random.default_rng(9)
        for _ in range(150):
            n = int(rng.integers(3, 6))
            dag = erdos_renyi_dag(n, 0.5, int(rng.integers(2**31)))
            i, j = rng.choice(n, size=2, replace=False)
            others = [k for k in range(n) if k not in (i, j)]
            cond = [k for k in others if rng.random() < 0.4]
            assert d_separated(dag, int(i), int(j), cond) == d_separated_bruteforce(
                dag.edges, int(i), int(j), cond
            )

    def test_collider_opens_on_conditioning(self):
        dag = dag_from_edges(3, [(0, 2), (1, 2)])
        assert d_separated(dag, 0, 1, [])
        assert not d_separated(dag, 0, 1, [2])

    def test_chain_blocks_on_middle(self):
        dag = dag_from_edges(3, [(0, 1), (1, 2)])
        assert not d_separated(dag, 0, 2, [])
        assert d_separated(dag, 0, 2, [1])


class TestSerialization:
    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_json_round_trip_weighted(self, seed):
        rng = np.random.default_rng(seed)
        dag = erdos_renyi_dag(int(rng.integers(1, 8)), 0.4, seed)
        if dag.n_edges:
            w = np.zeros(dag.edges.shape)
            w[dag.edges] = rng.normal(size=dag.n_edges)
            dag = Dag(dag.n_nodes, dag.edges, w)
        back = graph_from_json(graph_to_json(dag))
        assert np.array_equal(back.edges, dag.edges)
        if dag.weights is None:
            assert back.weights is None
        else:
            assert np.array_equal(back.weights, dag.weights)
        assert graph_to_json(back) == graph_to_json(dag)

    def test_cpdag_round_trip(self):
        c = dag_to_cpdag(erdos_renyi_dag(6, 0.4, 3))
        back = graph_from_json(graph_to_json(c))
        assert np.array_equal(back.directed, c.directed)
        assert np.array_equal(back.undirected, c.undirected)

    def test_temporal_round_trip(self):
        lagged = [np.arange(9).reshape(3, 3) / 7.0, np.zeros((3, 3))]
        tg = TemporalGraph(3, 2, np.zeros((3, 3)), lagged)
        back = graph_from_json(graph_to_json(tg))
        assert all(np.array_equal(a, b) for a, b in zip(back.lagged, tg.lagged))

    def test_adjacency_csv_round_trip_bit_exact(self):
        rng = np.random.default_rng(5)
        dag = erdos_renyi_dag(5, 0.5, 17)
        w = np.zeros(dag.edges.shape)
        w[dag.edges] = rng.normal(size=dag.n_edges)
        dag = Dag(5, dag.edges, w)
        text = dag_to_adjacency_csv(dag)
        back = dag_from_adjacency_csv(text)
        assert np.array_equal(back.weights, dag.weights)
        assert dag_to_adjacency_csv(back) == text

    def test_summary_graph_json(self):
        edges = np.zeros((3, 3), dtype=bool)
        edges[0, 1] = edges[1, 0] = True
        s = SummaryGraph(3, edges)
        back = graph_from_json(graph_to_json(s))
        assert isinstance(back, SummaryGraph)
        assert np.array_equal(back.edges, edges)


class TestInvariants:
    def test_dag_rejects_cycles(self):
        m = np.zeros((2, 2), dtype=bool)
        m[0, 1] = m[1, 0] = True
        with pytest.raises(ValueError):
            Dag(2, m)

    def test_dag_rejects_diagonal(self):
        m = np.eye(3, dtype=bool)
        with pytest.raises(ValueError):
            Dag(3, m)

    def test_cpdag_rejects_overlap(self):
        d = np.zeros((2, 2), dtype=bool)
        u = np.zeros((2, 2), dtype=bool)
        d[0, 1] = True
        u[0, 1] = u[1, 0] = True
        with pytest.raises(ValueError):
            Cpdag(2, d, u)

    def test_weights_must_match_edges(self):
        m = np.zeros((2, 2), dtype=bool)
        m[0, 1] = True
        with pytest.raises(ValueError):
            Dag(2, m, np.zeros((2, 2)))
