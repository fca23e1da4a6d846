"""End-to-end autonomous workflow and its on-disk run representation.

A run moves through: pending -> profiling -> selecting -> discovering ->
bootstrapping -> awaiting_review -> done (failed from anywhere). Submitting
constraints from awaiting_review or done loops back to discovering; the
union of all submitted constraint sets is applied after every refinement,
so later revisions honor earlier ones. Every artifact is persisted in the
run directory as soon as its phase completes; reopening the directory
reproduces the artifacts byte-exactly.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dataset as ds
from .diagnostics import drop_constant, impute, infer_schema, profile_dataset, profile_from_dict
from .discovery import run_algorithm
from .errors import InvalidPhase, NotFound
from .graphs import graph_from_json, graph_to_json
from .postprocess import (
    ConstraintSet,
    apply_constraints,
    as_dag,
    bootstrap_edge_frequencies,
    confidence_from_dict,
    constraints_from_dict,
    refine_graph,
)
from .report import emit_report, render_graph_figure, render_profile_figure
from .selection import select_algorithm, trace_from_dict

PHASES = (
    "pending",
    "profiling",
    "selecting",
    "discovering",
    "bootstrapping",
    "awaiting_review",
    "done",
    "failed",
)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    bootstrap_samples: int = 100
    hi: float = 0.9
    lo: float = 0.1
    hints: dict = field(default_factory=dict)
    advisor_endpoint: str | None = None
    algorithm_override: str | None = None
    timestamp: str | None = None
    render_figures: bool = True


@dataclass
class RunState:
    run_id: str
    phase: str = "pending"
    profile: object = None
    trace: object = None
    graph: object = None
    confidence: object = None
    uncertain_edges: list = field(default_factory=list)
    refinement_log: list = field(default_factory=list)
    constraint_history: list = field(default_factory=list)
    error: str | None = None

    def snapshot(self):
        """JSON-ready view with completed artifacts only."""
        out = {"run_id": self.run_id, "phase": self.phase, "error": self.error}
        out["profile"] = self.profile.as_dict() if self.profile else None
        out["trace"] = self.trace.as_dict() if self.trace else None
        out["graph"] = json.loads(graph_to_json(self.graph)) if self.graph is not None else None
        out["confidence"] = self.confidence.as_dict() if self.confidence else None
        out["uncertain_edges"] = [list(e) for e in self.uncertain_edges]
        out["constraint_history"] = [c.as_dict() for c in self.constraint_history]
        return out


class RunDirectory:
    """Disk layout: runs/<id>/{dataset.csv, profile.json, trace.json,
    graph.json, confidence.json, constraints-N.json, report.md, ...}."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name):
        return self.root / name

    def write(self, name, text):
        self.path(name).write_text(text)

    def read(self, name):
        p = self.path(name)
        return p.read_text() if p.exists() else None

    def constraint_files(self):
        return sorted(self.root.glob("constraints-*.json"))


def merged_constraints(history):
    merged = ConstraintSet()
    for c in history:
        merged = merged.merged(c)
    return merged


def _discover_and_refine(data, state, config, rundir=None):
    """Discovery, bootstrap, refinement, constraint application; mutates state."""
    trace = state.trace
    algorithm_id, algo_config = trace.chosen, trace.config

    state.phase = "discovering"
    clean = impute(data) if np.isnan(data.values).any() else data
    ranked = [cid for cid, _, _ in trace.ranked]
    last_error = None
    graph = None
    for candidate in [algorithm_id] + [c for c in ranked if c != algorithm_id]:
        if candidate == algorithm_id:
            cfg = algo_config
        else:
            from .selection import configure_hyperparameters

            cfg, _ = configure_hyperparameters(candidate, state.profile)
        try:
            graph = run_algorithm(candidate, clean, cfg)
            if candidate != algorithm_id:
                state.trace = replace(
                    state.trace,
                    chosen=candidate,
                    config=cfg,
                    rationale=state.trace.rationale
                    + [f"fallback to {candidate}: {algorithm_id} failed ({last_error})"],
                )
                algorithm_id, algo_config = candidate, cfg
            break
        except Exception as exc:  # noqa: BLE001 - fall back to next candidate
            last_error = exc
            continue
    if graph is None:
        raise RuntimeError(f"every candidate algorithm failed; last error: {last_error}")

    state.phase = "bootstrapping"
    confidence = bootstrap_edge_frequencies(
        clean,
        algorithm_id,
        algo_config,
        b_samples=config.bootstrap_samples,
        seed=config.seed,
    )
    refined, uncertain, log = refine_graph(
        as_dag(graph, seed=config.seed), confidence, hi=config.hi, lo=config.lo
    )
    constraints = merged_constraints(state.constraint_history)
    if not constraints.empty:
        refined = apply_constraints(refined, constraints)
        log.append("user constraints applied")
        uncertain = [
            e
            for e in uncertain
            if e not in constraints.forbidden_edges and e not in constraints.required_edges
        ]
    state.graph = refined
    state.confidence = confidence
    state.uncertain_edges = uncertain
    state.refinement_log = log

    if rundir:
        rundir.write("graph.json", graph_to_json(refined) + "\n")
        rundir.write("confidence.json", confidence.to_json())
        rundir.write("trace.json", state.trace.to_json())
    state.phase = "awaiting_review"
    return state


def run_pipeline(data, config=PipelineConfig(), rundir=None, run_id=None):
    """Execute the autonomous workflow on a dataset; returns the RunState."""
    state = RunState(run_id or uuid.uuid4().hex[:12])
    try:
        if rundir:
            rundir.write("dataset.csv", ds.to_csv(data))
        state.phase = "profiling"
        typed = infer_schema(data)
        typed, removed = drop_constant(typed)
        hints = dict(config.hints)
        state.profile = profile_dataset(typed, hints)
        if rundir:
            rundir.write("profile.json", state.profile.to_json())

        state.phase = "selecting"
        if config.algorithm_override:
            from .selection import REGISTRY, configure_hyperparameters, SelectionTrace

            cfg, rationale = configure_hyperparameters(config.algorithm_override, state.profile)
            state.trace = SelectionTrace(
                filtered_out=[],
                ranked=[(config.algorithm_override, 0.0, 0.0)],
                chosen=config.algorithm_override,
                config=cfg,
                rationale=["user override: " + config.algorithm_override] + rationale,
            )
        else:
            state.trace = select_algorithm(
                state.profile, hints=hints, advisor_endpoint=config.advisor_endpoint
            )
        if rundir:
            rundir.write("trace.json", state.trace.to_json())

        _discover_and_refine(typed, state, config, rundir)
        return state
    except Exception as exc:  # noqa: BLE001 - failure is a terminal phase
        state.phase = "failed"
        state.error = f"{type(exc).__name__}: {exc}"
        if rundir:
            rundir.write("error.txt", state.error + "\n")
        return state


def resubmit_with_constraints(data, state, constraints, config, rundir=None, phase_checked=False):
    """The review loop: record constraints, re-run discovery and bootstrap.

    `phase_checked=True` is for callers (the service) that already validated
    and transitioned the phase under their own lock.
    """
    if not phase_checked and state.phase not in ("awaiting_review", "done"):
        raise InvalidPhase(f"cannot submit constraints in phase {state.phase}")
    state.constraint_history.append(constraints)
    if rundir:
        rundir.write(
            f"constraints-{len(state.constraint_history)}.json", constraints.to_json()
        )
    typed = infer_schema(data)
    typed, _ = drop_constant(typed)
    return _discover_and_refine(typed, state, config, rundir)


def report_result(state, data=None):
    return {
        "profile": state.profile,
        "trace": state.trace,
        "graph": state.graph,
        "confidence": state.confidence,
        "uncertain_edges": state.uncertain_edges,
        "refinement_log": state.refinement_log,
        "constraints_history": state.constraint_history,
        "column_names": data.column_names if data is not None else None,
        "seed": None,
    }


def finalize_report(state, data, config, rundir=None):
    """Render the report (and figures); marks the run done."""
    result = report_result(state, data)
    result["seed"] = config.seed
    md = emit_report(result, "markdown", timestamp=config.timestamp)
    js = emit_report(result, "json", timestamp=config.timestamp)
    csv_text = emit_report(result, "csv", timestamp=config.timestamp)
    if rundir:
        rundir.write("report.md", md)
        rundir.write("report.json", js)
        rundir.write("edges.csv", csv_text)
        if config.render_figures and state.graph is not None:
            render_graph_figure(
                state.graph,
                rundir.path("graph.png"),
                confidence=state.confidence,
                column_names=data.column_names,
                title="discovered causal graph",
            )
            render_profile_figure(data, rundir.path("distributions.png"))
    state.phase = "done"
    return md


def reopen_run(rundir):
    """Rebuild a RunState from a persisted run directory."""
    state = RunState(run_id=rundir.root.name)
    dataset_text = rundir.read("dataset.csv")
    if dataset_text is None:
        raise NotFound(f"run directory {rundir.root} has no dataset")
    profile_text = rundir.read("profile.json")
    if profile_text:
        state.profile = profile_from_dict(json.loads(profile_text))
    trace_text = rundir.read("trace.json")
    if trace_text:
        state.trace = trace_from_dict(json.loads(trace_text))
    graph_text = rundir.read("graph.json")
    if graph_text:
        state.graph = graph_from_json(graph_text)
    conf_text = rundir.read("confidence.json")
    if conf_text:
        state.confidence = confidence_from_dict(json.loads(conf_text))
    for path in rundir.constraint_files():
        state.constraint_history.append(constraints_from_dict(json.loads(path.read_text())))
    if rundir.read("report.md") is not None:
        state.phase = "done"
    elif state.graph is not None:
        state.phase = "awaiting_review"
    elif rundir.read("error.txt"):
        state.phase = "failed"
        state.error = rundir.read("error.txt").strip()
    return state, ds.from_csv(dataset_text)
