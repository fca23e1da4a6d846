"""Command-line interface.

Subcommands: simulate, diagnose, discover, select, bench, pipeline, serve.
Exit codes: 0 success, 2 usage error, 3 data error, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import dataset as ds
from . import sim_tabular, sim_timeseries
from .diagnostics import profile_dataset
from .discovery import ALGORITHM_IDS, run_algorithm
from .errors import CausalAtlasError, EmptyDataset, MalformedCsv, UnknownAlgorithm
from .graphs import graph_to_json
from .pipeline import PipelineConfig, RunDirectory, finalize_report, run_pipeline
from .report import emit_benchmark_report
from .selection import select_algorithm

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def _read_dataset(path):
    try:
        return ds.from_csv(Path(path).read_text())
    except FileNotFoundError as exc:
        raise MalformedCsv(f"cannot read {path}: {exc}") from exc


def _cmd_simulate(args):
    scenario_obj = json.loads(Path(args.scenario).read_text())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if scenario_obj.get("kind") == "time_series":
        scenario = sim_timeseries.scenario_from_dict(scenario_obj)
        if args.seed is not None:
            import dataclasses

            scenario = dataclasses.replace(scenario, seed=args.seed)
        truth = sim_timeseries.stabilize(sim_timeseries.generate_temporal_graph(scenario))
        data = sim_timeseries.simulate_temporal(truth, scenario)
        from .graphs import summary_graph

        truths = {"temporal": truth, "summary": summary_graph(truth)}
    else:
        scenario = sim_tabular.scenario_from_dict(scenario_obj)
        if args.seed is not None:
            import dataclasses

            scenario = dataclasses.replace(scenario, seed=args.seed)
        truth, data = sim_tabular.simulate_tabular(scenario)
        truths = {"dag": truth}
    (out_dir / "data.csv").write_text(ds.to_csv(data))
    (out_dir / "meta.json").write_text(ds.sidecar_json(data, truths))
    print(f"wrote {out_dir / 'data.csv'} and {out_dir / 'meta.json'}")
    return EXIT_OK


def _cmd_diagnose(args):
    data = _read_dataset(args.data)
    hints = json.loads(args.hints) if args.hints else {}
    profile = profile_dataset(data, hints)
    text = profile.to_json()
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_discover(args):
    data = _read_dataset(args.data)
    from .diagnostics import impute, infer_schema
    import numpy as np

    data = infer_schema(data)
    if np.isnan(data.values).any():
        data = impute(data)
    config = json.loads(args.config) if args.config else {}
    graph = run_algorithm(args.algorithm, data, config)
    text = graph_to_json(graph) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_select(args):
    data = _read_dataset(args.data)
    hints = json.loads(args.hints) if args.hints else {}
    profile = profile_dataset(data, hints)
    trace = select_algorithm(profile, hints=hints, advisor_endpoint=args.advisor_endpoint)
    text = trace.to_json()
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_bench(args):
    suites = bench_mod.default_suites()
    if args.suite in suites:
        suite = suites[args.suite]
    else:
        suite_path = Path(args.suite)
        if not suite_path.exists():
            known = ", ".join(sorted(suites))
            print(f"unknown suite {args.suite!r}; known: {known}", file=sys.stderr)
            return EXIT_USAGE
        suite = bench_mod.suite_from_json(suite_path.read_text())
    algorithms = args.algorithms.split(",")
    for a in algorithms:
        if a not in ALGORITHM_IDS:
            raise UnknownAlgorithm(f"unknown algorithm id {a!r}")
    if args.seeds is not None:
        import dataclasses

        suite = dataclasses.replace(suite, seeds_per_scenario=args.seeds)
    records = bench_mod.run_benchmark(
        suite, algorithms, timeout_override=args.timeout_seconds,
        parallelism=args.parallelism,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "records.jsonl").write_text(bench_mod.records_to_jsonl(records))
    (out_dir / "records.csv").write_text(bench_mod.records_to_csv(records))
    aggregates = bench_mod.aggregate(records)
    (out_dir / "report.md").write_text(
        emit_benchmark_report(aggregates, "markdown", timestamp=args.timestamp)
    )
    (out_dir / "report.json").write_text(
        emit_benchmark_report(aggregates, "json", timestamp=args.timestamp)
    )
    print(f"wrote {len(records)} records to {out_dir}")
    return EXIT_OK


def _cmd_pipeline(args):
    data = _read_dataset(args.data)
    hints = json.loads(args.hints) if args.hints else {}
    config = PipelineConfig(
        seed=args.seed or 0,
        hints=hints,
        bootstrap_samples=args.bootstrap_samples,
        advisor_endpoint=args.advisor_endpoint,
        algorithm_override=args.algorithm,
        timestamp=args.timestamp,
    )
    out_dir = Path(args.out_dir)
    rundir = RunDirectory(out_dir)
    state = run_pipeline(data, config, rundir)
    if state.phase == "failed":
        print(f"pipeline failed: {state.error}", file=sys.stderr)
        return EXIT_RUNTIME
    report = finalize_report(state, data, config, rundir)
    sys.stdout.write(report)
    print(f"artifacts in {out_dir}", file=sys.stderr)
    return EXIT_OK


def _cmd_serve(args):
    from .service import serve

    server, manager = serve(args.runs_dir, port=args.port)
    host, port = server.server_address
    print(f"causal-atlas service on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        manager.shutdown()
        server.server_close()
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="causal-atlas",
        description="Deterministic causal-analysis engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="scenario JSON -> CSV + ground truth sidecar")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default="sim_out")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("diagnose", help="CSV -> dataset profile JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--hints", default=None, help="JSON object of user hints")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_diagnose)

    p = sub.add_parser("discover", help="CSV + algorithm -> graph JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--algorithm", required=True, choices=sorted(ALGORITHM_IDS))
    p.add_argument("--config", default=None, help="JSON parameter map")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_discover)

    p = sub.add_parser("select", help="CSV -> selection trace JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--hints", default=None)
    p.add_argument("--advisor-endpoint", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("bench", help="run a scenario suite over algorithms")
    p.add_argument("--suite", required=True, help="suite name or JSON file")
    p.add_argument("--algorithms", required=True, help="comma-separated ids")
    p.add_argument("--timeout-seconds", type=float, default=None)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--seeds", type=int, default=None, help="seeds per scenario")
    p.add_argument("--timestamp", default=None)
    p.add_argument("--out-dir", default="bench_out")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("pipeline", help="CSV -> end-to-end report")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hints", default=None)
    p.add_argument("--bootstrap-samples", type=int, default=100)
    p.add_argument("--advisor-endpoint", default=None)
    p.add_argument("--algorithm", default=None, choices=sorted(ALGORITHM_IDS))
    p.add_argument("--timestamp", default=None, help="fixed timestamp for reproducible reports")
    p.add_argument("--out-dir", default="run_out")
    p.set_defaults(fn=_cmd_pipeline)

    p = sub.add_parser("serve", help="start the local HTTP service")
    p.add_argument("--runs-dir", default="runs")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (MalformedCsv, EmptyDataset) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except UnknownAlgorithm as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CausalAtlasError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except json.JSONDecodeError as exc:
        print(f"data error: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
