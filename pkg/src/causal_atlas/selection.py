"""Algorithm auto-selection: hard filtering, dual-criterion ranking,
hyperparameter configuration, and an optional external advisor hook.

Ranking blends two normalized scores: a theoretical score summing ordinal
ratings over the profile-active conditions, and an empirical score taken
from the nearest embedded benchmark row by scenario fingerprint. Every
rating cell carries a citation string; the embedded rows were measured by
this package's own benchmark harness at desk scale (see registry_rows).
"""

from __future__ import annotations

import json
import logging
import urllib.request
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import DatasetProfile
from .errors import UnknownAlgorithm
from .registry_rows import BENCHMARK_ROWS

logger = logging.getLogger(__name__)

RATING_ORDER = {"Robust": 5, "Strong": 4, "Moderate": 3, "Limited": 2, "Poor": 1}
ADVISOR_TIMEOUT_SECONDS = 5.0
THEORETICAL_WEIGHT = 0.5

CONDITIONS = (
    "linear",
    "nonlinear",
    "dense",
    "sparse",
    "large_p",
    "non_gaussian",
    "heterogeneous",
    "missing_tolerant",
    "discrete_mix",
)


@dataclass(frozen=True)
class Rating:
    level: str
    citation: str

    def __post_init__(self):
        if self.level not in RATING_ORDER:
            raise ValueError(f"unknown rating level {self.level!r}")

    @property
    def ordinal(self):
        return RATING_ORDER[self.level]


@dataclass(frozen=True)
class BenchmarkRow:
    """Fingerprint of a benchmarked scenario with the measured outcome."""

    n_samples: int
    n_vars: int
    density: float
    linear: bool
    gaussian: bool
    mean_f1: float
    mean_runtime: float


@dataclass(frozen=True)
class AlgorithmEntry:
    id: str
    family: str
    data_kind: str  # "tabular" | "time_series"
    max_vars: int
    requires_fully_continuous: bool
    ratings: dict[str, Rating]
    default_config: dict
    benchmark_rows: tuple[BenchmarkRow, ...]
    min_samples: int = 0

    def rating_ordinal(self, condition):
        r = self.ratings.get(condition)
        return r.ordinal if r else RATING_ORDER["Moderate"]


@dataclass(frozen=True)
class SelectionTrace:
    filtered_out: list[tuple[str, str]]
    ranked: list[tuple[str, float, float]]  # (id, theoretical, empirical)
    chosen: str
    config: dict
    rationale: list[str]

    def as_dict(self):
        return {
            "filtered_out": [list(t) for t in self.filtered_out],
            "ranked": [[i, t, e] for i, t, e in self.ranked],
            "chosen": self.chosen,
            "config": self.config,
            "rationale": list(self.rationale),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


def trace_from_dict(obj):
    return SelectionTrace(
        filtered_out=[tuple(t) for t in obj["filtered_out"]],
        ranked=[(i, float(t), float(e)) for i, t, e in obj["ranked"]],
        chosen=obj["chosen"],
        config=obj["config"],
        rationale=list(obj["rationale"]),
    )


def _r(level, citation):
    return Rating(level, citation)


def _rows(algorithm_id):
    return tuple(BenchmarkRow(*row) for row in BENCHMARK_ROWS.get(algorithm_id, ()))


def build_registry():
    """Registry of every implemented algorithm with paper-distilled ratings."""
    entries = [
        AlgorithmEntry(
            id="pc",
            family="constraint_based",
            data_kind="tabular",
            max_vars=100,
            requires_fully_continuous=False,
            ratings={
                "linear": _r("Strong", "top-tier on default linear benchmarks"),
                "nonlinear": _r("Strong", "constraint-based tests adapt to nonlinear signals"),
                "dense": _r("Limited", "accuracy drops sharply on dense structures"),
                "sparse": _r("Strong", "near-best on sparse benchmarks"),
                "large_p": _r("Moderate", "CPU runtime deteriorates beyond ~100 variables"),
                "non_gaussian": _r("Strong", "CI tests are distribution-flexible"),
                "heterogeneous": _r("Limited", "no mechanism for domain shifts"),
                "missing_tolerant": _r("Moderate", "degrades moderately after imputation"),
                "discrete_mix": _r("Strong", "chi-squared pathway handles discrete data"),
            },
            default_config={"alpha": 0.05, "test": "fisher_z"},
            benchmark_rows=_rows("pc"),
        ),
        AlgorithmEntry(
            id="score_search",
            family="score_based",
            data_kind="tabular",
            max_vars=60,
            requires_fully_continuous=False,
            ratings={
                "linear": _r("Strong", "score-based search excels on linear data"),
                "nonlinear": _r("Limited", "Gaussian likelihood misfits nonlinear signals"),
                "dense": _r("Limited", "greedy moves stall on dense graphs"),
                "sparse": _r("Strong", "BIC penalty matches sparse regimes"),
                "large_p": _r("Limited", "quadratic move scan; desk cap 60 variables"),
                "non_gaussian": _r("Strong", "least-squares scores tolerate non-Gaussian noise"),
                "heterogeneous": _r("Limited", "single-domain likelihood"),
                "missing_tolerant": _r("Moderate", "works on imputed data"),
                "discrete_mix": _r("Moderate", "treats codes numerically; diluted fit"),
            },
            default_config={"penalty_multiplier": 1.0},
            benchmark_rows=_rows("score_search"),
        ),
        AlgorithmEntry(
            id="notears_linear",
            family="continuous_optimization",
            data_kind="tabular",
            max_vars=200,
            requires_fully_continuous=True,
            ratings={
                "linear": _r("Robust", "continuous optimization excels on linear relations"),
                "nonlinear": _r("Poor", "performance collapses off the linear model"),
                "dense": _r("Strong", "global objective stays informative when dense"),
                "sparse": _r("Strong", "L1 term matches sparse truth"),
                "large_p": _r("Strong", "gradient-based scaling"),
                "non_gaussian": _r("Moderate", "least squares ignores noise shape"),
                "heterogeneous": _r("Limited", "single shared weight matrix"),
                "missing_tolerant": _r("Moderate", "works on imputed data"),
                "discrete_mix": _r("Poor", "continuous-only formulation"),
            },
            default_config={"lambda1": 0.1, "w_threshold": 0.3},
            benchmark_rows=_rows("notears_linear"),
        ),
        AlgorithmEntry(
            id="direct_lingam",
            family="functional_causal_model",
            data_kind="tabular",
            max_vars=100,
            # own-benchmark evidence: the residual-entropy ordering is
            # unreliable below a few thousand samples (F1 0.41 at n=1000
            # vs 0.92 at n=5000 on uniform noise)
            min_samples=2500,
            requires_fully_continuous=True,
            ratings={
                "linear": _r("Strong", "exact model class when noise is non-Gaussian"),
                "nonlinear": _r("Poor", "linear SEM assumption"),
                "dense": _r("Moderate", "ordering degrades with many confounding paths"),
                "sparse": _r("Moderate", "t-test pruning suits sparse truth"),
                "large_p": _r("Limited", "cubic ordering search"),
                "non_gaussian": _r("Robust", "full identification under non-Gaussian noise"),
                "heterogeneous": _r("Limited", "single-domain model"),
                "missing_tolerant": _r("Moderate", "works on imputed data"),
                "discrete_mix": _r("Poor", "continuous-only formulation"),
            },
            default_config={},
            benchmark_rows=_rows("direct_lingam"),
        ),
        AlgorithmEntry(
            id="iamb_cpdag",
            family="markov_blanket",
            data_kind="tabular",
            max_vars=100,
            requires_fully_continuous=False,
            ratings={
                "linear": _r("Moderate", "competitive but behind global searches"),
                "nonlinear": _r("Moderate", "rank-based tests give partial coverage"),
                "dense": _r("Limited", "blankets inflate on dense graphs"),
                "sparse": _r("Strong", "local searches thrive on sparse structure"),
                "large_p": _r("Strong", "per-node discovery parallelizes"),
                "non_gaussian": _r("Moderate", "test-dependent"),
                "heterogeneous": _r("Limited", "no domain mechanism"),
                "missing_tolerant": _r("Moderate", "works on imputed data"),
                "discrete_mix": _r("Strong", "chi-squared pathway"),
            },
            default_config={"alpha": 0.05, "test": "fisher_z"},
            benchmark_rows=_rows("iamb_cpdag"),
        ),
        AlgorithmEntry(
            id="granger_pairwise",
            family="granger",
            data_kind="time_series",
            max_vars=200,
            requires_fully_continuous=True,
            ratings={
                "linear": _r("Strong", "strong performance across linear settings"),
                "nonlinear": _r("Limited", "linear VAR forecasting only"),
                "dense": _r("Moderate", "pairwise tests ignore confounding"),
                "sparse": _r("Strong", "clean signals on sparse graphs"),
                "large_p": _r("Strong", "pairwise scans scale"),
                "non_gaussian": _r("Moderate", "F-test is second-moment only"),
                "heterogeneous": _r("Limited", "stationary single-regime model"),
                "missing_tolerant": _r("Limited", "gaps break lag alignment"),
                "discrete_mix": _r("Poor", "continuous series only"),
            },
            default_config={"max_lag": 3, "alpha": 0.05},
            benchmark_rows=_rows("granger_pairwise"),
        ),
        AlgorithmEntry(
            id="granger_multivariate",
            family="granger",
            data_kind="time_series",
            max_vars=60,
            requires_fully_continuous=True,
            ratings={
                "linear": _r("Strong", "conditions away indirect lagged paths"),
                "nonlinear": _r("Limited", "linear VAR forecasting only"),
                "dense": _r("Moderate", "full-VAR conditioning helps when dense"),
                "sparse": _r("Strong", "accurate on sparse lagged graphs"),
                "large_p": _r("Limited", "full VAR design grows with p^2"),
                "non_gaussian": _r("Moderate", "F-test is second-moment only"),
                "heterogeneous": _r("Limited", "stationary single-regime model"),
                "missing_tolerant": _r("Limited", "gaps break lag alignment"),
                "discrete_mix": _r("Poor", "continuous series only"),
            },
            default_config={"max_lag": 3, "alpha": 0.05},
            benchmark_rows=_rows("granger_multivariate"),
        ),
        AlgorithmEntry(
            id="var_lingam",
            family="functional_causal_model",
            data_kind="time_series",
            max_vars=100,
            requires_fully_continuous=True,
            ratings={
                "linear": _r("Strong", "VAR backbone with structural residual model"),
                "nonlinear": _r("Poor", "linear model class"),
                "dense": _r("Moderate", "residual ordering degrades when dense"),
                "sparse": _r("Strong", "clean residual separation"),
                "large_p": _r("Moderate", "cubic residual ordering"),
                "non_gaussian": _r("Robust", "preferred when noise is non-Gaussian"),
                "heterogeneous": _r("Limited", "single-regime model"),
                "missing_tolerant": _r("Limited", "gaps break lag alignment"),
                "discrete_mix": _r("Poor", "continuous series only"),
            },
            default_config={"lag": 3},
            benchmark_rows=_rows("var_lingam"),
        ),
        AlgorithmEntry(
            id="dynotears",
            family="continuous_optimization",
            data_kind="time_series",
            max_vars=60,
            requires_fully_continuous=True,
            ratings={
                "linear": _r("Robust", "strong candidate for linear stationary series"),
                "nonlinear": _r("Poor", "linear model class"),
                "dense": _r("Strong", "robust to lagged edge density"),
                "sparse": _r("Strong", "L1 terms match sparse truth"),
                "large_p": _r("Moderate", "joint W/A optimization grows quickly"),
                "non_gaussian": _r("Limited", "least squares misses distributional cues"),
                "heterogeneous": _r("Limited", "single-regime model"),
                "missing_tolerant": _r("Limited", "gaps break lag alignment"),
                "discrete_mix": _r("Poor", "continuous series only"),
            },
            default_config={"lag": 3, "lambda_w": 0.05, "lambda_a": 0.05, "w_threshold": 0.1},
            benchmark_rows=_rows("dynotears"),
        ),
    ]
    return {e.id: e for e in entries}


REGISTRY = build_registry()


def active_conditions(profile, hints=None):
    """Conditions a profile switches on; density only via explicit hint."""
    hints = hints or {}
    active = []
    if profile.linearity == "linear":
        active.append("linear")
    elif profile.linearity == "nonlinear":
        active.append("nonlinear")
    density_hint = hints.get("expected_density")
    if density_hint in ("dense", "sparse"):
        active.append(density_hint)
    if profile.n_vars >= 50:
        active.append("large_p")
    if profile.gaussian_noise == "non_gaussian":
        active.append("non_gaussian")
    if profile.heterogeneous:
        active.append("heterogeneous")
    if profile.missing_rate > 0.1:
        active.append("missing_tolerant")
    if profile.discrete_ratio > 0:
        active.append("discrete_mix")
    return active


def _fingerprint_distance(profile, row, density=None):
    """Normalized L1 over (log n, log p, density, linearity, noise) axes.

    The density axis is the observable correlation density, measured the
    same way on benchmark rows and on profiled datasets.
    """
    if density is None:
        density = profile.corr_density if profile.corr_density is not None else 0.5
    d_n = abs(np.log(max(profile.n_samples, 2)) - np.log(max(row.n_samples, 2))) / 3.0
    d_p = abs(np.log(max(profile.n_vars, 2)) - np.log(max(row.n_vars, 2))) / 2.0
    d_density = abs(density - row.density) / 0.5
    d_linear = float((profile.linearity == "nonlinear") == row.linear)
    d_noise = float((profile.gaussian_noise == "non_gaussian") == row.gaussian)
    return (d_n + d_p + d_density + d_linear + d_noise) / 5.0


def nearest_benchmark_row(entry, profile, density=None):
    if not entry.benchmark_rows:
        return None
    return min(
        entry.benchmark_rows,
        key=lambda row: (_fingerprint_distance(profile, row, density), row.n_samples),
    )


def predicted_runtime(entry, profile):
    """Crude superlinear extrapolation from the nearest benchmark row."""
    row = nearest_benchmark_row(entry, profile)
    if row is None:
        return 0.0
    return (
        row.mean_runtime
        * (profile.n_samples / max(row.n_samples, 1))
        * (profile.n_vars / max(row.n_vars, 1)) ** 2
    )


def filter_algorithms(profile, registry=None, hints=None):
    """Hard-compatibility filter; never returns an empty candidate list."""
    registry = registry or REGISTRY
    candidates, excluded, warnings = [], [], []
    violations = {}
    for entry in sorted(registry.values(), key=lambda e: e.id):
        reasons = []
        if entry.data_kind != profile.data_kind:
            reasons.append(f"requires {entry.data_kind} data")
        if entry.requires_fully_continuous and profile.discrete_ratio > 0.05:
            reasons.append("continuous-only method on discrete-mixed data")
        if profile.n_samples < entry.min_samples:
            reasons.append(
                f"sample count {profile.n_samples} below floor {entry.min_samples}"
            )
        if profile.n_vars > entry.max_vars:
            reasons.append(f"variable count {profile.n_vars} beyond cap {entry.max_vars}")
        runtime = predicted_runtime(entry, profile)
        if runtime > profile.runtime_budget_seconds:
            reasons.append(
                f"predicted runtime {runtime:.0f}s over budget "
                f"{profile.runtime_budget_seconds:.0f}s"
            )
        if profile.data_kind == "time_series" and profile.stationary is False:
            reasons.append("series judged nonstationary")
        if reasons:
            excluded.append((entry.id, "; ".join(reasons)))
            violations[entry.id] = len(reasons)
        else:
            candidates.append(entry.id)
    if not candidates:
        same_kind = [
            e.id for e in registry.values() if e.data_kind == profile.data_kind
        ]
        pool = same_kind or sorted(violations)
        fallback = min(pool, key=lambda i: (violations.get(i, 0), i))
        candidates = [fallback]
        excluded = [(i, r) for i, r in excluded if i != fallback]
        warnings.append(
            f"all candidates violated hard requirements; keeping least-violating {fallback}"
        )
    return candidates, excluded, warnings


def rank_algorithms(candidates, profile, registry=None, hints=None):
    """Blend of normalized theoretical and empirical scores; ties break by id."""
    registry = registry or REGISTRY
    conditions = active_conditions(profile, hints)
    raw = []
    for cid in sorted(candidates):
        entry = registry[cid]
        theoretical = float(sum(entry.rating_ordinal(c) for c in conditions))
        row = nearest_benchmark_row(entry, profile, (hints or {}).get("density"))
        empirical = row.mean_f1 if row else 0.0
        raw.append((cid, theoretical, empirical))

    def normalize(values):
        lo, hi = min(values), max(values)
        if hi - lo < 1e-12:
            return [0.5] * len(values)
        return [(v - lo) / (hi - lo) for v in values]

    theo_n = normalize([t for _, t, _ in raw])
    emp_n = normalize([e for _, _, e in raw])
    blended = [
        (cid, THEORETICAL_WEIGHT * t + (1 - THEORETICAL_WEIGHT) * e)
        for (cid, _, _), t, e in zip(raw, theo_n, emp_n)
    ]
    order = sorted(range(len(raw)), key=lambda k: (-blended[k][1], raw[k][0]))
    return [(raw[k][0], raw[k][1], raw[k][2]) for k in order]


def configure_hyperparameters(chosen, profile, registry=None, hints=None):
    """Rule-table configuration; every applied rule emits a rationale line."""
    registry = registry or REGISTRY
    if chosen not in registry:
        raise UnknownAlgorithm(f"{chosen!r} is not in the registry")
    entry = registry[chosen]
    config = dict(entry.default_config)
    rationale = []

    alpha = 0.01 if profile.n_samples > 5000 else 0.05
    alpha_reason = (
        f"alpha={alpha}: test power rises with n={profile.n_samples}"
        if alpha == 0.01
        else f"alpha={alpha}: default level for n={profile.n_samples}"
    )
    if chosen in ("pc", "iamb_cpdag"):
        config["alpha"] = alpha
        rationale.append(alpha_reason)
        if profile.discrete_ratio >= 1.0:
            config["test"] = "chi_squared"
            rationale.append("test=chi_squared: all columns discrete")
        elif profile.linearity == "nonlinear":
            config["test"] = "rank_fisher_z"
            rationale.append("test=rank_fisher_z: nonlinear relations detected")
        else:
            config["test"] = "fisher_z"
            rationale.append("test=fisher_z: continuous data without nonlinearity")
    elif chosen == "notears_linear":
        if (hints or {}).get("expected_density") == "dense":
            config["lambda1"] = config.get("lambda1", 0.1) / 2.0
            rationale.append("lambda1 halved: dense structure expected")
        else:
            rationale.append(f"lambda1={config.get('lambda1', 0.1)}: default sparsity weight")
    elif chosen == "score_search":
        rationale.append(
            f"penalty_multiplier={config.get('penalty_multiplier', 1.0)}: standard BIC"
        )
    elif chosen == "direct_lingam":
        rationale.append("no tunable parameters; t-test pruning at 0.05")
    elif chosen in ("granger_pairwise", "granger_multivariate"):
        config["alpha"] = alpha
        rationale.append(alpha_reason)
        if profile.suggested_lag:
            config["max_lag"] = int(np.clip(profile.suggested_lag, 1, 20))
            rationale.append(f"max_lag={config['max_lag']}: estimated VAR order")
    elif chosen in ("var_lingam", "dynotears"):
        if profile.suggested_lag:
            config["lag"] = int(np.clip(profile.suggested_lag, 1, 20))
            rationale.append(f"lag={config['lag']}: estimated VAR order")
        else:
            rationale.append(f"lag={config.get('lag', 3)}: default lag order")
    return config, rationale


def select_algorithm(profile, registry=None, hints=None, advisor_endpoint=None):
    """Full selection pass returning a SelectionTrace."""
    registry = registry or REGISTRY
    candidates, excluded, warnings = filter_algorithms(profile, registry, hints)
    ranked = rank_algorithms(candidates, profile, registry, hints)
    chosen = ranked[0][0]
    config, rationale = configure_hyperparameters(chosen, profile, registry, hints)
    lines = list(warnings)
    lines.append(
        "active conditions: " + (", ".join(active_conditions(profile, hints)) or "none")
    )
    for cid, theo, emp in ranked:
        lines.append(f"candidate {cid}: theoretical={theo:.1f} empirical={emp:.3f}")
    lines.append(f"chosen {chosen} ({registry[chosen].family})")
    lines.extend(rationale)
    trace = SelectionTrace(
        filtered_out=excluded,
        ranked=[(cid, t, e) for cid, t, e in ranked],
        chosen=chosen,
        config=config,
        rationale=lines,
    )
    if advisor_endpoint:
        trace = advisor_rerank(trace, profile, advisor_endpoint, registry)
    return trace


def advisor_rerank(trace, profile, endpoint=None, registry=None):
    """Optional external advisor; advisory-only and never fatal.

    The advisor may swap the chosen algorithm for another non-filtered
    candidate; anything else (bad id, network failure, malformed response)
    leaves the trace unchanged apart from a logged warning.
    """
    if not endpoint:
        return trace
    registry = registry or REGISTRY
    request_body = json.dumps(
        {
            "profile": profile.as_dict(),
            "candidates": [
                {
                    "id": cid,
                    "scores": {"theoretical": theo, "empirical": emp},
                    "ratings": {
                        c: registry[cid].ratings[c].level
                        for c in CONDITIONS
                        if c in registry[cid].ratings
                    },
                }
                for cid, theo, emp in trace.ranked
            ],
            "trace": trace.as_dict(),
        }
    ).encode()
    try:
        req = urllib.request.Request(
            endpoint, data=request_body, headers={"Content-Type": "application/json"}
        )
        with urllib.request.urlopen(req, timeout=ADVISOR_TIMEOUT_SECONDS) as resp:
            payload = json.loads(resp.read().decode())
        proposed = payload.get("chosen")
        advisor_rationale = payload.get("rationale", "")
    except Exception as exc:  # noqa: BLE001 - advisory path must never fail
        logger.warning("advisor endpoint failed: %s", exc)
        return trace
    allowed = {cid for cid, _, _ in trace.ranked}
    if proposed not in allowed:
        logger.warning("advisor proposed %r, not among candidates; ignored", proposed)
        return replace(
            trace,
            rationale=trace.rationale + [f"advisor proposal {proposed!r} rejected"],
        )
    if proposed == trace.chosen:
        return replace(trace, rationale=trace.rationale + ["advisor confirmed choice"])
    config, config_rationale = configure_hyperparameters(proposed, profile, registry)
    return replace(
        trace,
        chosen=proposed,
        config=config,
        rationale=trace.rationale
        + [f"advisor override: {proposed} ({advisor_rationale})"]
        + config_rationale,
    )
