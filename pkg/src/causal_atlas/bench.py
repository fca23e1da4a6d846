"""Scenario suites, capped parallel execution, and aggregation.

Every scheduled (scenario, algorithm, seed) triple yields exactly one
RunRecord. Timeouts rely on cooperative cancellation tokens polled inside
the iterative solvers, backed by a watchdog on the worker future; a run
that overshoots is recorded as a timeout and the harness moves on. Results
merge by key, never by completion order, so metrics are deterministic
under any parallelism.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field

import numpy as np

from . import sim_tabular, sim_timeseries
from .cancellation import with_timeout
from .discovery import run_algorithm
from .errors import Cancelled
from .evaluation import evaluate_against_truth
from .graphs import summary_graph

DEFAULT_TIMEOUT_SECONDS = 120.0
WATCHDOG_GRACE_SECONDS = 10.0
DEFAULT_SEEDS_PER_SCENARIO = 10


@dataclass(frozen=True)
class RunRecord:
    scenario_id: str
    algorithm_id: str
    config: dict
    seed: int
    metrics: dict | None
    runtime_seconds: float
    status: str  # "ok" | "timeout" | "error:<message>"

    def __post_init__(self):
        ok = self.status == "ok"
        if ok != (self.metrics is not None):
            raise ValueError("metrics must be present exactly when status is ok")

    def as_dict(self):
        return {
            "scenario_id": self.scenario_id,
            "algorithm_id": self.algorithm_id,
            "config": self.config,
            "seed": self.seed,
            "metrics": self.metrics,
            "runtime_seconds": self.runtime_seconds,
            "status": self.status,
        }


def record_from_dict(obj):
    return RunRecord(
        obj["scenario_id"],
        obj["algorithm_id"],
        obj["config"],
        obj["seed"],
        obj["metrics"],
        obj["runtime_seconds"],
        obj["status"],
    )


@dataclass(frozen=True)
class ScenarioSuite:
    name: str
    scenarios: dict  # scenario_id -> TabularScenario | TsScenario
    seeds_per_scenario: int = DEFAULT_SEEDS_PER_SCENARIO
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("a suite needs at least one scenario")

    def as_dict(self):
        return {
            "name": self.name,
            "scenarios": {k: s.as_dict() for k, s in self.scenarios.items()},
            "seeds_per_scenario": self.seeds_per_scenario,
            "timeout_seconds": self.timeout_seconds,
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


def suite_from_dict(obj):
    scenarios = {}
    for key, sdict in obj["scenarios"].items():
        if sdict.get("kind") == "time_series":
            scenarios[key] = sim_timeseries.scenario_from_dict(sdict)
        else:
            scenarios[key] = sim_tabular.scenario_from_dict(sdict)
    return ScenarioSuite(
        obj["name"],
        scenarios,
        obj.get("seeds_per_scenario", DEFAULT_SEEDS_PER_SCENARIO),
        obj.get("timeout_seconds", DEFAULT_TIMEOUT_SECONDS),
    )


def suite_from_json(text):
    return suite_from_dict(json.loads(text))


def default_suites():
    """Desk-scaled versions of the benchmark axes."""
    t = sim_tabular.TabularScenario
    ts = sim_timeseries.TsScenario
    small_ts = dict(
        n_nodes=5, max_lag=3, intra_degree=1.0, inter_degree=1.0,
        weight_range_intra=(0.3, 0.5), weight_range_inter=(0.3, 0.5), n_steps=2000,
    )

    suites = {
        "tabular_default": ScenarioSuite(
            "tabular_default", {"default": t()}
        ),
        "tabular_density": ScenarioSuite(
            "tabular_density",
            {f"density_{p}": t(edge_prob=p) for p in (0.11, 0.22, 0.33, 0.56)},
        ),
        "tabular_nodes": ScenarioSuite(
            "tabular_nodes",
            {f"nodes_{p}": t(n_nodes=p) for p in (5, 10, 25, 50)},
        ),
        "tabular_samples": ScenarioSuite(
            "tabular_samples",
            {f"samples_{n}": t(n_samples=n) for n in (500, 1000, 2500, 5000)},
        ),
        "tabular_noise": ScenarioSuite(
            "tabular_noise",
            {f"noise_{k}": t(noise=k, n_samples=5000) for k in ("gaussian", "uniform")},
        ),
        "tabular_discrete": ScenarioSuite(
            "tabular_discrete",
            {f"discrete_{r}": t(discrete_ratio=r) for r in (0.0, 0.2)},
        ),
        "tabular_measurement_error": ScenarioSuite(
            "tabular_measurement_error",
            {
                "error_0.3_sd_0.1": t(measurement_error_ratio=0.3, measurement_error_sd=0.1),
                "error_0.3_sd_0.5": t(measurement_error_ratio=0.3, measurement_error_sd=0.5),
            },
        ),
        "tabular_missing": ScenarioSuite(
            "tabular_missing",
            {f"missing_{r}": t(missing_rate=r) for r in (0.1, 0.3)},
        ),
        "tabular_domains": ScenarioSuite(
            "tabular_domains",
            {f"domains_{d}": t(n_domains=d) for d in (1, 2, 5)},
        ),
        "ts_default": ScenarioSuite(
            "ts_default", {"default": ts()}, seeds_per_scenario=5
        ),
        "ts_small": ScenarioSuite(
            "ts_small", {"small": ts(**small_ts)}, seeds_per_scenario=5
        ),
        "ts_nodes": ScenarioSuite(
            "ts_nodes",
            {f"nodes_{p}": ts(n_nodes=p) for p in (5, 10, 20)},
            seeds_per_scenario=5,
        ),
        "ts_lag": ScenarioSuite(
            "ts_lag",
            {
                f"lag_{lag}": ts(max_lag=lag, n_steps=max(1000, 50 * lag + 500))
                for lag in (3, 5, 10, 20)
            },
            seeds_per_scenario=5,
        ),
        "ts_samples": ScenarioSuite(
            "ts_samples",
            {f"steps_{n}": ts(n_steps=n) for n in (500, 1000, 2000, 5000)},
            seeds_per_scenario=5,
        ),
        "ts_noise": ScenarioSuite(
            "ts_noise",
            {
                f"noise_{k}": ts(noise=k, **small_ts)
                for k in ("gaussian", "exponential")
            },
            seeds_per_scenario=5,
        ),
    }
    return suites


def materialize(scenario, seed):
    """Simulate (truth, dataset) for a scenario with the given seed offset."""
    if isinstance(scenario, sim_timeseries.TsScenario):
        import dataclasses

        seeded = dataclasses.replace(scenario, seed=seed)
        truth = sim_timeseries.stabilize(sim_timeseries.generate_temporal_graph(seeded))
        return truth, sim_timeseries.simulate_temporal(truth, seeded)
    import dataclasses

    seeded = dataclasses.replace(scenario, seed=seed)
    return sim_tabular.simulate_tabular(seeded)


def _prepare_for_algorithm(data):
    if np.isnan(data.values).any():
        from .diagnostics import impute

        return impute(data)
    return data


def _execute_one(scenario_id, scenario, algorithm_id, config, seed, timeout):
    token = with_timeout(timeout)
    started = time.monotonic()
    try:
        truth, data = materialize(scenario, seed)
        data = _prepare_for_algorithm(data)
        graph = run_algorithm(algorithm_id, data, config, cancel=token)
        if token.expired():
            metrics, status = None, "timeout"  # finished but past the cap
        else:
            metrics = evaluate_against_truth(graph, truth).as_dict()
            status = "ok"
    except Cancelled:
        metrics, status = None, "timeout"
    except Exception as exc:  # noqa: BLE001 - harness records, never crashes
        metrics, status = None, f"error:{type(exc).__name__}: {exc}"
    runtime = time.monotonic() - started
    return RunRecord(scenario_id, algorithm_id, config, seed, metrics, runtime, status)


def _default_config_for(scenario, algorithm_id):
    config = {}
    if isinstance(scenario, sim_timeseries.TsScenario):
        key = "max_lag" if algorithm_id.startswith("granger") else "lag"
        config[key] = scenario.max_lag
    return config


def run_benchmark(
    suite,
    algorithm_ids,
    timeout_override=None,
    parallelism=1,
    configs=None,
):
    """Execute the full grid; exactly one record per scheduled triple."""
    timeout = timeout_override if timeout_override is not None else suite.timeout_seconds
    tasks = []
    for scenario_id in sorted(suite.scenarios):
        scenario = suite.scenarios[scenario_id]
        for algorithm_id in algorithm_ids:
            config = dict((configs or {}).get(algorithm_id, _default_config_for(scenario, algorithm_id)))
            for seed in range(suite.seeds_per_scenario):
                tasks.append((scenario_id, scenario, algorithm_id, config, seed))

    records = {}
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        submitted = [
            (
                (scenario_id, algorithm_id, seed),
                config,
                pool.submit(
                    _execute_one, scenario_id, scenario, algorithm_id, config, seed, timeout
                ),
            )
            for scenario_id, scenario, algorithm_id, config, seed in tasks
        ]
        for key, config, future in submitted:
            scenario_id, algorithm_id, seed = key
            try:
                records[key] = future.result(timeout=timeout + WATCHDOG_GRACE_SECONDS)
            except FutureTimeout:
                records[key] = RunRecord(
                    scenario_id, algorithm_id, config, seed, None, timeout, "timeout"
                )
            except Exception as exc:  # noqa: BLE001
                records[key] = RunRecord(
                    scenario_id,
                    algorithm_id,
                    config,
                    seed,
                    None,
                    0.0,
                    f"error:{type(exc).__name__}: {exc}",
                )
    return [records[k] for k in sorted(records)]


def aggregate(records):
    """Per (scenario, algorithm): mean F1 +- sample std, runtime, completion."""
    groups = {}
    for r in records:
        groups.setdefault((r.scenario_id, r.algorithm_id), []).append(r)
    out = {}
    for key in sorted(groups):
        # canonical order: permutation invariance down to the last float bit
        rs = sorted(groups[key], key=lambda r: r.seed)
        f1s = [r.metrics["f1"] for r in rs if r.status == "ok"]
        shds = [r.metrics["shd"] for r in rs if r.status == "ok"]
        runtimes = [r.runtime_seconds for r in rs if r.status == "ok"]
        completion = len(f1s) / len(rs)
        out[key] = {
            "mean_f1": float(np.mean(f1s)) if f1s else None,
            "std_f1": float(np.std(f1s, ddof=1)) if len(f1s) > 1 else (0.0 if f1s else None),
            "mean_shd": float(np.mean(shds)) if shds else None,
            "mean_runtime": float(np.mean(runtimes)) if runtimes else None,
            "completion_rate": completion,
            "n_runs": len(rs),
        }
    return out


def records_to_jsonl(records):
    return "".join(json.dumps(r.as_dict(), sort_keys=True) + "\n" for r in records)


def records_from_jsonl(text):
    return [record_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["scenario_id", "algorithm_id", "seed", "status", "runtime_seconds",
         "f1", "precision", "recall", "shd"]
    )
    for r in records:
        m = r.metrics or {}
        writer.writerow(
            [
                r.scenario_id,
                r.algorithm_id,
                r.seed,
                r.status,
                repr(r.runtime_seconds),
                repr(m["f1"]) if m else "",
                repr(m["precision"]) if m else "",
                repr(m["recall"]) if m else "",
                m.get("shd", ""),
            ]
        )
    return buf.getvalue()
