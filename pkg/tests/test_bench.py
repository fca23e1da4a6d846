import json
import time

import numpy as np
import pytest

from causal_atlas.bench import (
    ScenarioSuite,
    aggregate,
    default_suites,
    materialize,
    records_from_jsonl,
    records_to_csv,
    records_to_jsonl,
    run_benchmark,
    suite_from_json,
)
from causal_atlas.discovery import register_runner
from causal_atlas.errors import UnknownFormat
from causal_atlas.graphs import Dag
from causal_atlas.report import emit_benchmark_report
from causal_atlas.sim_tabular import TabularScenario


def tiny_suite(seeds=2, timeout=120.0):
    return ScenarioSuite(
        "tiny",
        {"s1": TabularScenario(n_nodes=5, n_samples=300), "s2": TabularScenario(n_nodes=5, n_samples=300, edge_prob=0.4)},
        seeds_per_scenario=seeds,
        timeout_seconds=timeout,
    )


class TestDefaultSuites:
    def test_tabular_default_matches_baseline(self):
        s = default_suites()["tabular_default"].scenarios["default"]
        assert (s.n_nodes, s.n_samples, s.edge_prob) == (10, 1000, 0.22)
        assert s.function_type == "linear" and s.noise == "gaussian"
        assert s.noise_scale == 1.0 and s.missing_rate == 0.0

    def test_ts_lag_axis_values(self):
        suite = default_suites()["ts_lag"]
        lags = sorted(s.max_lag for s in suite.scenarios.values())
        assert lags == [3, 5, 10, 20]

    def test_every_suite_round_trips_json(self):
        for name, suite in default_suites().items():
            back = suite_from_json(suite.to_json())
            assert back.to_json() == suite.to_json(), name


class TestRunBenchmark:
    def test_record_count_is_grid_size(self):
        suite = tiny_suite(seeds=3)
        records = run_benchmark(suite, ["pc", "score_search"])
        assert len(records) == 2 * 2 * 3

    def test_metrics_deterministic_across_parallelism(self):
        suite = tiny_suite(seeds=2)
        serial = run_benchmark(suite, ["pc"], parallelism=1)
        parallel = run_benchmark(suite, ["pc"], parallelism=4)
        for a, b in zip(serial, parallel):
            assert (a.scenario_id, a.algorithm_id, a.seed) == (
                b.scenario_id, b.algorithm_id, b.seed,
            )
            assert a.metrics == b.metrics
            assert a.status == b.status

    def test_sleepy_algorithm_times_out_others_unaffected(self):
        def sleepy(data, params, cancel):
            # cooperative: polls the token as required of iterative solvers
            for _ in range(200):
                time.sleep(0.05)
                cancel.check()
            return Dag(data.n_columns, np.zeros((data.n_columns,) * 2, dtype=bool))

        register_runner("sleepy_test_algo", sleepy)
        suite = ScenarioSuite(
            "t", {"s": TabularScenario(n_nodes=4, n_samples=100)},
            seeds_per_scenario=1, timeout_seconds=1.0,
        )
        records = run_benchmark(suite, ["sleepy_test_algo", "pc"])
        by_algo = {r.algorithm_id: r for r in records}
        assert by_algo["sleepy_test_algo"].status == "timeout"
        assert by_algo["sleepy_test_algo"].metrics is None
        assert by_algo["pc"].status == "ok"

    def test_error_recorded_not_raised(self):
        def broken(data, params, cancel):
            raise ValueError("bad input")

        register_runner("broken_test_algo", broken)
        suite = tiny_suite(seeds=1)
        records = run_benchmark(suite, ["broken_test_algo"])
        assert all(r.status.startswith("error:") for r in records)
        assert all(r.metrics is None for r in records)


class TestAggregate:
    def _record(self, f1, scenario="s", algo="a", seed=0, status="ok"):
        from causal_atlas.bench import RunRecord

        metrics = None if status != "ok" else {
            "f1": f1, "precision": f1, "recall": f1, "shd": 1, "tp": 1, "fp": 0, "fn": 0,
        }
        return RunRecord(scenario, algo, {}, seed, metrics, 0.5, status)

    def test_mean_and_sample_std(self):
        records = [self._record(f, seed=k) for k, f in enumerate((0.8, 0.9, 1.0))]
        agg = aggregate(records)[("s", "a")]
        assert abs(agg["mean_f1"] - 0.9) < 1e-12
        assert abs(agg["std_f1"] - 0.1) < 1e-12

    def test_all_timeout_cell_is_none(self):
        records = [self._record(0, seed=k, status="timeout") for k in range(3)]
        agg = aggregate(records)[("s", "a")]
        assert agg["mean_f1"] is None
        assert agg["completion_rate"] == 0.0

    def test_single_record_std_zero(self):
        agg = aggregate([self._record(0.7)])[("s", "a")]
        assert agg["std_f1"] == 0.0

    def test_permutation_invariant(self):
        records = [self._record(f, seed=k) for k, f in enumerate((0.5, 0.6, 0.9))]
        assert aggregate(records) == aggregate(records[::-1])

    def test_na_marker_in_reports(self):
        records = [self._record(0, seed=k, status="timeout") for k in range(2)]
        agg = aggregate(records)
        md = emit_benchmark_report(agg, "markdown")
        csv_text = emit_benchmark_report(agg, "csv")
        assert "N/A" in md and "N/A" in csv_text

    def test_unknown_format_rejected(self):
        with pytest.raises(UnknownFormat):
            emit_benchmark_report({}, "pdf")


class TestRecordsIO:
    def test_jsonl_round_trip(self):
        records = run_benchmark(tiny_suite(seeds=1), ["pc"])
        text = records_to_jsonl(records)
        back = records_from_jsonl(text)
        assert [r.as_dict() for r in back] == [r.as_dict() for r in records]

    def test_csv_has_header_and_rows(self):
        records = run_benchmark(tiny_suite(seeds=1), ["pc"])
        text = records_to_csv(records)
        lines = text.strip().splitlines()
        assert lines[0].startswith("scenario_id,")
        assert len(lines) == len(records) + 1

    def test_no_absolute_paths_in_reports(self):
        records = run_benchmark(tiny_suite(seeds=1), ["pc"])
        md = emit_benchmark_report(aggregate(records), "markdown")
        assert "/root" not in md and "/home" not in md


class TestMaterialize:
    def test_seed_offsets_differ(self):
        s = TabularScenario(n_nodes=5, n_samples=100)
        _, d0 = materialize(s, 0)
        _, d1 = materialize(s, 1)
        assert not np.array_equal(d0.values, d1.values)

    def test_time_series_scenarios_materialize(self):
        from causal_atlas.sim_timeseries import TsScenario
        from causal_atlas.graphs import TemporalGraph

        truth, data = materialize(TsScenario(n_nodes=3, n_steps=300), 0)
        assert isinstance(truth, TemporalGraph)
        assert data.is_time_series
