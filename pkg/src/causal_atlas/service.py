"""Local HTTP+JSON service exposing the pipeline and the review loop.

Single-user, loopback, no auth. Long work runs on a worker pool; handlers
only snapshot state or enqueue jobs, so the server loop never blocks.
Endpoints:
    POST /runs                    {"csv": ..., "hints": ..., "seed": ...}
    GET  /runs/{id}
    POST /runs/{id}/constraints   ConstraintSet JSON
    GET  /runs/{id}/report?format=md|json
    GET  /healthz
"""

from __future__ import annotations

import json
import os
import re
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import dataset as ds
from .errors import (
    CausalAtlasError,
    ConflictingConstraints,
    InvalidPhase,
    MalformedCsv,
    NotFound,
)
from .pipeline import (
    PipelineConfig,
    RunDirectory,
    finalize_report,
    report_result,
    resubmit_with_constraints,
    run_pipeline,
)
from .postprocess import constraints_from_dict
from .report import emit_report

PORT_ENV_VAR = "CAUSAL_ATLAS_PORT"
DEFAULT_PORT = 8765


class RunManager:
    """Owns run state, per-run directories, and the worker pool."""

    def __init__(self, runs_root, max_workers=2, default_config=None):
        self.runs_root = Path(runs_root)
        self.runs_root.mkdir(parents=True, exist_ok=True)
        self.pool = ThreadPoolExecutor(max_workers=max_workers)
        self.lock = threading.Lock()
        self.runs = {}  # run_id -> {"state", "data", "config", "rundir"}

    def create_run(self, csv_text, hints=None, seed=0, bootstrap_samples=None,
                   algorithm=None, advisor_endpoint=None):
        data = ds.from_csv(csv_text)  # raises MalformedCsv with location
        run_id = uuid.uuid4().hex[:12]
        config = PipelineConfig(
            seed=seed,
            hints=hints or {},
            bootstrap_samples=bootstrap_samples or 100,
            algorithm_override=algorithm,
            advisor_endpoint=advisor_endpoint,
        )
        rundir = RunDirectory(self.runs_root / run_id)
        from .pipeline import RunState

        state = RunState(run_id)
        with self.lock:
            self.runs[run_id] = {
                "state": state,
                "data": data,
                "config": config,
                "rundir": rundir,
            }
        self.pool.submit(self._execute, run_id)
        return run_id

    def _execute(self, run_id):
        entry = self.runs[run_id]
        state = run_pipeline(
            entry["data"], entry["config"], entry["rundir"], run_id=run_id
        )
        with self.lock:
            entry["state"] = state

    def _entry(self, run_id):
        with self.lock:
            entry = self.runs.get(run_id)
        if entry is None:
            raise NotFound(f"unknown run id {run_id!r}")
        return entry

    def get_run(self, run_id):
        return self._entry(run_id)["state"].snapshot()

    def submit_constraints(self, run_id, constraints):
        entry = self._entry(run_id)
        with self.lock:
            state = entry["state"]
            if state.phase not in ("awaiting_review", "done"):
                raise InvalidPhase(f"cannot submit constraints in phase {state.phase}")
            state.phase = "discovering"

        def rerun():
            try:
                resubmit_with_constraints(
                    entry["data"], state, constraints, entry["config"], entry["rundir"],
                    phase_checked=True,
                )
            except Exception as exc:  # noqa: BLE001 - surface instead of vanishing
                state.phase = "failed"
                state.error = f"{type(exc).__name__}: {exc}"

        self.pool.submit(rerun)
        return state.snapshot()

    def get_report(self, run_id, fmt="markdown"):
        entry = self._entry(run_id)
        state = entry["state"]
        if state.phase == "awaiting_review":
            # fetching the report is the explicit finalize action
            finalize_report(state, entry["data"], entry["config"], entry["rundir"])
        if state.phase == "done":
            if fmt == "markdown":
                text = entry["rundir"].read("report.md")
                if text is None:
                    return finalize_report(state, entry["data"], entry["config"], entry["rundir"])
                return text
            result = report_result(state, entry["data"])
            result["seed"] = entry["config"].seed
            return emit_report(result, fmt, timestamp=entry["config"].timestamp)
        raise InvalidPhase(f"report unavailable in phase {state.phase}")

    def shutdown(self):
        self.pool.shutdown(wait=False)


def make_handler(manager):
    class Handler(BaseHTTPRequestHandler):
        server_version = "causal-atlas"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, code, payload, content_type="application/json"):
            body = (
                payload.encode()
                if isinstance(payload, str)
                else json.dumps(payload, sort_keys=True).encode()
            )
            self.send_response(code)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _error(self, code, message):
            self._send(code, {"error": message})

        def _read_json(self):
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length) if length else b"{}"
            return json.loads(raw.decode())

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()

        def do_GET(self):
            try:
                path, _, query = self.path.partition("?")
                if path == "/healthz":
                    self._send(200, {"status": "ok"})
                    return
                m = re.fullmatch(r"/runs/([0-9a-f]+)", path)
                if m:
                    self._send(200, manager.get_run(m.group(1)))
                    return
                m = re.fullmatch(r"/runs/([0-9a-f]+)/report", path)
                if m:
                    fmt = "markdown"
                    qmatch = re.search(r"format=(\w+)", query)
                    if qmatch:
                        fmt = {"md": "markdown"}.get(qmatch.group(1), qmatch.group(1))
                    text = manager.get_report(m.group(1), fmt)
                    ctype = "application/json" if fmt == "json" else "text/markdown"
                    self._send(200, text, content_type=ctype)
                    return
                self._error(404, f"no route for {path}")
            except NotFound as exc:
                self._error(404, str(exc))
            except InvalidPhase as exc:
                self._error(409, str(exc))
            except CausalAtlasError as exc:
                self._error(400, str(exc))
            except Exception as exc:  # noqa: BLE001
                self._error(500, f"{type(exc).__name__}: {exc}")

        def do_POST(self):
            try:
                if self.path == "/runs":
                    body = self._read_json()
                    if "csv" in body:
                        csv_text = body["csv"]
                    elif "path" in body:
                        csv_text = Path(body["path"]).read_text()
                    else:
                        self._error(400, "body must carry 'csv' text or a 'path'")
                        return
                    run_id = manager.create_run(
                        csv_text,
                        hints=body.get("hints"),
                        seed=int(body.get("seed", 0)),
                        bootstrap_samples=body.get("bootstrap_samples"),
                        algorithm=body.get("algorithm"),
                        advisor_endpoint=body.get("advisor_endpoint"),
                    )
                    self._send(201, {"run_id": run_id})
                    return
                m = re.fullmatch(r"/runs/([0-9a-f]+)/constraints", self.path)
                if m:
                    constraints = constraints_from_dict(self._read_json())
                    snapshot = manager.submit_constraints(m.group(1), constraints)
                    self._send(202, snapshot)
                    return
                self._error(404, f"no route for {self.path}")
            except MalformedCsv as exc:
                self._error(400, f"malformed CSV: {exc}")
            except ConflictingConstraints as exc:
                self._error(400, str(exc))
            except NotFound as exc:
                self._error(404, str(exc))
            except InvalidPhase as exc:
                self._error(409, str(exc))
            except CausalAtlasError as exc:
                self._error(400, str(exc))
            except Exception as exc:  # noqa: BLE001
                self._error(500, f"{type(exc).__name__}: {exc}")

    return Handler


def serve(runs_root, port=None, host="127.0.0.1"):
    """Start the service; returns (server, manager). Call server.shutdown() to stop."""
    port = port if port is not None else int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))
    manager = RunManager(runs_root)
    server = ThreadingHTTPServer((host, port), make_handler(manager))
    return server, manager
