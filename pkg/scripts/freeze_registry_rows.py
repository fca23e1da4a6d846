"""Measure the selector's embedded benchmark evidence and rewrite
src/causal_atlas/registry_rows.py.

Runs every implemented algorithm over a fingerprint grid (5 seeds per
cell) with the package's own harness and freezes mean F1 and runtime.
The density coordinate of each row is the measured correlation density
of the cell's datasets, matching what profile_dataset reports.
"""

from __future__ import annotations

import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from causal_atlas.bench import ScenarioSuite, aggregate, materialize, run_benchmark  # noqa: E402
from causal_atlas.diagnostics import correlation_density, profile_dataset  # noqa: E402
from causal_atlas.discovery import TABULAR_IDS, TIMESERIES_IDS  # noqa: E402
from causal_atlas.selection import configure_hyperparameters  # noqa: E402
from causal_atlas.sim_tabular import TabularScenario  # noqa: E402
from causal_atlas.sim_timeseries import TsScenario  # noqa: E402

SEEDS = 5

TABULAR_CELLS = {
    "lin_gauss_default": TabularScenario(),
    "lin_gauss_dense": TabularScenario(edge_prob=0.5),
    "lin_unif_default": TabularScenario(noise="uniform", n_samples=5000),
    "lin_unif_sparse": TabularScenario(noise="uniform", n_samples=5000, edge_prob=0.11),
    "lin_unif_dense": TabularScenario(noise="uniform", n_samples=5000, edge_prob=0.5),
    "mlp_gauss_default": TabularScenario(function_type="mlp", n_samples=2000),
    "mlp_gauss_sparse": TabularScenario(function_type="mlp", n_samples=2000, edge_prob=0.11),
    "mlp_gauss_dense": TabularScenario(function_type="mlp", n_samples=2000, edge_prob=0.5),
    "mlp_unif_sparse": TabularScenario(
        function_type="mlp", noise="uniform", n_samples=2000, edge_prob=0.11
    ),
    "mlp_unif_dense": TabularScenario(
        function_type="mlp", noise="uniform", n_samples=2000, edge_prob=0.5
    ),
}

TS_SMALL = dict(
    n_nodes=5, max_lag=3, intra_degree=1.0, inter_degree=1.0,
    weight_range_intra=(0.3, 0.5), weight_range_inter=(0.3, 0.5), n_steps=2000,
)
TS_CELLS = {
    "ts_gauss_default": TsScenario(),
    "ts_exp_default": TsScenario(noise="exponential"),
    "ts_gauss_small": TsScenario(**TS_SMALL),
    "ts_unif_small": TsScenario(noise="uniform", **TS_SMALL),
}


def cell_density(scenario):
    values = []
    for seed in range(SEEDS):
        _, data = materialize(scenario, seed)
        values.append(correlation_density(data))
    return round(float(np.mean(values)), 3)


def measure(cells, algorithm_ids):
    """One suite per cell so every algorithm runs with the configuration
    the selector would actually deploy on that cell's profile."""
    rows = {}
    for cell_id, scenario in cells.items():
        _, probe = materialize(scenario, 0)
        profile = profile_dataset(probe)
        configs = {
            algorithm_id: configure_hyperparameters(algorithm_id, profile)[0]
            for algorithm_id in algorithm_ids
        }
        suite = ScenarioSuite(
            cell_id, {cell_id: scenario}, seeds_per_scenario=SEEDS, timeout_seconds=300.0
        )
        records = run_benchmark(suite, list(algorithm_ids), parallelism=2, configs=configs)
        aggregates = aggregate(records)
        density = cell_density(scenario)
        if isinstance(scenario, TsScenario):
            n, p = scenario.n_steps, scenario.n_nodes
            linear, gaussian = True, scenario.noise == "gaussian"
        else:
            n, p = scenario.n_samples, scenario.n_nodes
            linear = scenario.function_type == "linear"
            gaussian = scenario.noise == "gaussian"
        for algorithm_id in algorithm_ids:
            agg = aggregates[(cell_id, algorithm_id)]
            f1 = agg["mean_f1"] if agg["mean_f1"] is not None else 0.0
            rt = agg["mean_runtime"] if agg["mean_runtime"] is not None else 300.0
            rows.setdefault(algorithm_id, []).append(
                (n, p, density, linear, gaussian, round(f1, 3), round(rt, 3))
            )
    return rows


def main():
    started = time.time()
    rows = measure(TABULAR_CELLS, TABULAR_IDS)
    rows.update(measure(TS_CELLS, TIMESERIES_IDS))

    lines = [
        '"""Embedded benchmark evidence for the selector.',
        "",
        "Measured at desk scale by scripts/freeze_registry_rows.py (5 seeds per",
        "fingerprint, this package's own harness). Row format:",
        "(n_samples, n_vars, corr_density, linear, gaussian, mean_f1, mean_runtime_s).",
        "Regenerate with:  python3 scripts/freeze_registry_rows.py",
        '"""',
        "",
        "BENCHMARK_ROWS = {",
    ]
    for algorithm_id in sorted(rows):
        lines.append(f'    "{algorithm_id}": [')
        for row in rows[algorithm_id]:
            lines.append(f"        {row},")
        lines.append("    ],")
    lines.append("}")
    out = ROOT / "src" / "causal_atlas" / "registry_rows.py"
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} in {time.time() - started:.0f}s")
    for algorithm_id in sorted(rows):
        print(algorithm_id, rows[algorithm_id])


if __name__ == "__main__":
    main()
