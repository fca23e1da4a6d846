"""Report emission: Markdown for humans, JSON/CSV for machines, plus
matplotlib figures rendered next to the delimited output.

Reports are byte-deterministic given an injected timestamp. The graph
figure uses a fixed circular layout with edge width and color mapped to
bootstrap confidence, so re-renders of the same artifacts are identical.
"""

from __future__ import annotations

import csv
import io
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import __version__
from .errors import UnknownFormat
from .graphs import Cpdag, Dag, SummaryGraph, TemporalGraph, graph_to_json_obj, summary_graph

FIXED_EPOCH = "1970-01-01T00:00:00Z"
REPORT_FORMATS = ("markdown", "json", "csv")


def _edge_rows(graph, confidence=None):
    """Rows (from, to, kind, weight, frequency) for every edge of any graph type."""
    rows = []
    freq = confidence.frequency if confidence is not None else None

    def frequency_of(i, j):
        return float(freq[i, j]) if freq is not None else None

    if isinstance(graph, Cpdag):
        for i, j in np.argwhere(graph.directed):
            rows.append((int(i), int(j), "directed", None, frequency_of(i, j)))
        for i, j in np.argwhere(np.triu(graph.undirected)):
            rows.append((int(i), int(j), "undirected", None, frequency_of(i, j)))
    elif isinstance(graph, TemporalGraph):
        s = summary_graph(graph)
        for i, j in np.argwhere(s.edges):
            rows.append((int(i), int(j), "summary", None, frequency_of(i, j)))
    else:
        weights = graph.weights if isinstance(graph, Dag) else None
        for i, j in np.argwhere(graph.edges):
            w = float(weights[i, j]) if weights is not None else None
            rows.append((int(i), int(j), "directed", w, frequency_of(i, j)))
    return rows


def _node_labels(graph, column_names=None):
    if column_names:
        return list(column_names)
    if isinstance(graph, Dag):
        return list(graph.node_labels)
    n = graph.n_nodes
    return [f"X{i}" for i in range(n)]


def pipeline_report_payload(result, timestamp=None):
    """Canonical JSON-ready payload shared by every output format.

    `result` is a mapping with optional keys: profile, trace, graph,
    confidence, uncertain_edges, refinement_log, constraints_history,
    column_names, seed.
    """
    graph = result.get("graph")
    confidence = result.get("confidence")
    payload = {
        "generated_at": timestamp or FIXED_EPOCH,
        "engine_version": __version__,
        "seed": result.get("seed"),
        "profile": result["profile"].as_dict() if result.get("profile") else None,
        "selection": result["trace"].as_dict() if result.get("trace") else None,
        "graph": graph_to_json_obj(graph) if graph is not None else None,
        "edges": _edge_rows(graph, confidence) if graph is not None else [],
        "confidence": confidence.as_dict() if confidence is not None else None,
        "uncertain_edges": [list(e) for e in result.get("uncertain_edges", [])],
        "refinement_log": list(result.get("refinement_log", [])),
        "constraints_history": [c.as_dict() for c in result.get("constraints_history", [])],
        "metrics": result.get("metrics"),
        "column_names": result.get("column_names"),
    }
    return payload


def _markdown_pipeline(payload):
    lines = []
    out = lines.append
    out("# Causal analysis report")
    out("")
    out(f"- generated: {payload['generated_at']}")
    out(f"- engine: causal-atlas {payload['engine_version']}")
    if payload.get("seed") is not None:
        out(f"- seed: {payload['seed']}")
    out("")
    if payload.get("profile"):
        p = payload["profile"]
        out("## Dataset profile")
        out("")
        out("| property | value |")
        out("| --- | --- |")
        for key in (
            "n_samples", "n_vars", "data_kind", "discrete_ratio", "missing_rate",
            "linearity", "gaussian_noise", "heterogeneous", "stationary", "suggested_lag",
        ):
            out(f"| {key} | {p[key]} |")
        out("")
    if payload.get("selection"):
        s = payload["selection"]
        out("## Algorithm selection")
        out("")
        out(f"Chosen algorithm: **{s['chosen']}** with configuration `{json.dumps(s['config'], sort_keys=True)}`")
        out("")
        if s["filtered_out"]:
            out("Filtered out:")
            out("")
            for cid, reason in s["filtered_out"]:
                out(f"- {cid}: {reason}")
            out("")
        out("Ranking (theoretical / empirical):")
        out("")
        for cid, theo, emp in s["ranked"]:
            out(f"- {cid}: {theo:.1f} / {emp:.3f}")
        out("")
        out("Rationale:")
        out("")
        for line in s["rationale"]:
            out(f"- {line}")
        out("")
    names = payload.get("column_names")
    if payload.get("edges") or payload.get("graph"):
        out("## Discovered graph")
        out("")
        out("| from | to | kind | weight | confidence |")
        out("| --- | --- | --- | --- | --- |")
        for i, j, kind, w, f in payload["edges"]:
            a = names[i] if names else f"X{i}"
            b = names[j] if names else f"X{j}"
            w_s = f"{w:.3f}" if w is not None else ""
            f_s = f"{f:.2f}" if f is not None else ""
            out(f"| {a} | {b} | {kind} | {w_s} | {f_s} |")
        out("")
    if payload.get("uncertain_edges"):
        out("## Uncertain edges (for review)")
        out("")
        for i, j in payload["uncertain_edges"]:
            a = names[i] if names else f"X{i}"
            b = names[j] if names else f"X{j}"
            out(f"- {a} -> {b}")
        out("")
    if payload.get("refinement_log"):
        out("## Bootstrap refinement")
        out("")
        for line in payload["refinement_log"]:
            out(f"- {line}")
        out("")
    if payload.get("constraints_history"):
        out("## Constraint history")
        out("")
        for k, c in enumerate(payload["constraints_history"], 1):
            out(f"- revision {k}: required={c['required']} forbidden={c['forbidden']} "
                f"forbidden_as_effect={c['forbidden_as_effect']}")
        out("")
    if payload.get("metrics"):
        out("## Metrics against ground truth")
        out("")
        out("| metric | value |")
        out("| --- | --- |")
        for k, v in sorted(payload["metrics"].items()):
            out(f"| {k} | {v} |")
        out("")
    return "\n".join(lines) + "\n"


def _csv_pipeline(payload):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["from", "to", "kind", "weight", "confidence"])
    for i, j, kind, w, f in payload["edges"]:
        writer.writerow([i, j, kind, "" if w is None else repr(w), "" if f is None else repr(f)])
    return buf.getvalue()


def emit_report(result, fmt="markdown", timestamp=None):
    """Render a pipeline result. Formats: markdown, json, csv."""
    if fmt not in REPORT_FORMATS:
        raise UnknownFormat(f"unknown report format {fmt!r}")
    payload = pipeline_report_payload(result, timestamp)
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return _csv_pipeline(payload)
    return _markdown_pipeline(payload)


def emit_benchmark_report(aggregates, fmt="markdown", timestamp=None):
    """Render benchmark aggregates; all-failed cells appear as N/A."""
    if fmt not in REPORT_FORMATS:
        raise UnknownFormat(f"unknown report format {fmt!r}")
    rows = []
    for (scenario_id, algorithm_id), agg in sorted(aggregates.items()):
        rows.append(
            {
                "scenario_id": scenario_id,
                "algorithm_id": algorithm_id,
                "mean_f1": agg["mean_f1"],
                "std_f1": agg["std_f1"],
                "mean_runtime": agg["mean_runtime"],
                "completion_rate": agg["completion_rate"],
                "n_runs": agg["n_runs"],
            }
        )
    if fmt == "json":
        return json.dumps(
            {"generated_at": timestamp or FIXED_EPOCH, "rows": rows}, sort_keys=True, indent=2
        ) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scenario_id", "algorithm_id", "mean_f1", "std_f1",
                         "mean_runtime", "completion_rate", "n_runs"])
        for r in rows:
            writer.writerow(
                [
                    r["scenario_id"], r["algorithm_id"],
                    "N/A" if r["mean_f1"] is None else repr(r["mean_f1"]),
                    "N/A" if r["std_f1"] is None else repr(r["std_f1"]),
                    "N/A" if r["mean_runtime"] is None else repr(r["mean_runtime"]),
                    repr(r["completion_rate"]), r["n_runs"],
                ]
            )
        return buf.getvalue()
    lines = [
        "# Benchmark report",
        "",
        f"- generated: {timestamp or FIXED_EPOCH}",
        f"- engine: causal-atlas {__version__}",
        "",
        "| scenario | algorithm | mean F1 | std | mean runtime (s) | completed |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for r in rows:
        f1 = "N/A" if r["mean_f1"] is None else f"{r['mean_f1']:.3f}"
        std = "N/A" if r["std_f1"] is None else f"{r['std_f1']:.3f}"
        rt = "N/A" if r["mean_runtime"] is None else f"{r['mean_runtime']:.2f}"
        lines.append(
            f"| {r['scenario_id']} | {r['algorithm_id']} | {f1} | {std} | {rt} "
            f"| {r['completion_rate']:.0%} |"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------


def render_graph_figure(graph, path, confidence=None, column_names=None, title=None):
    """Node-link diagram on a fixed circular layout; PNG written to `path`.

    Edge width and color follow bootstrap frequency when available.
    """
    labels = _node_labels(graph, column_names)
    n = len(labels)
    angles = 2 * np.pi * np.arange(n) / max(n, 1) + np.pi / 2
    xs, ys = np.cos(angles), np.sin(angles)

    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title)

    for i, j, kind, _w, f in _edge_rows(graph, confidence):
        strength = 1.0 if f is None else f
        width = 0.6 + 2.4 * strength
        color = plt.cm.viridis(0.15 + 0.7 * strength)
        if kind == "undirected":
            ax.plot([xs[i], xs[j]], [ys[i], ys[j]], color=color, lw=width, zorder=1)
        else:
            ax.annotate(
                "",
                xy=(xs[j], ys[j]),
                xytext=(xs[i], ys[i]),
                arrowprops=dict(
                    arrowstyle="-|>", color=color, lw=width, shrinkA=14, shrinkB=14
                ),
                zorder=1,
            )
    ax.scatter(xs, ys, s=600, c="#f4f4f8", edgecolors="#333344", zorder=2)
    for label, x, y in zip(labels, xs, ys):
        ax.text(x, y, label, ha="center", va="center", fontsize=8, zorder=3)
    pad = 1.25
    ax.set_xlim(-pad, pad)
    ax.set_ylim(-pad, pad)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def render_profile_figure(data, path, max_columns=12):
    """Per-variable histograms summarizing the dataset distributions."""
    n_cols = min(data.n_columns, max_columns)
    ncols = min(4, n_cols)
    nrows = int(np.ceil(n_cols / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(3 * ncols, 2.2 * nrows), squeeze=False)
    for k in range(nrows * ncols):
        ax = axes[k // ncols][k % ncols]
        if k >= n_cols:
            ax.axis("off")
            continue
        col = data.values[:, k]
        col = col[~np.isnan(col)]
        meta = data.column_meta[k]
        if meta.kind == "discrete":
            levels, counts = np.unique(col, return_counts=True)
            ax.bar(levels, counts, color="#4878a8")
        else:
            ax.hist(col, bins=30, color="#4878a8")
        ax.set_title(meta.name, fontsize=8)
        ax.tick_params(labelsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
