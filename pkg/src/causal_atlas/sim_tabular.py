"""Synthetic tabular data with known ground-truth DAGs.

Samples follow structural equation models over an Erdos-Renyi DAG, then pass
through an optional corruption chain in a fixed order: discretization,
measurement error, missingness, multi-domain shift. Everything is
deterministic per scenario seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import ColumnMeta, Dataset
from .errors import ConstantColumn, RateOutOfRange
from .graphs import Dag, erdos_renyi_dag

MLP_HIDDEN_WIDTH = 100
WEIGHT_LOW, WEIGHT_HIGH = 0.5, 2.0
DOMAIN_EFFECT_COEFF = 1.0

NOISE_KINDS = ("gaussian", "exponential", "gumbel", "uniform", "logistic")
_EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class TabularScenario:
    n_nodes: int = 10
    n_samples: int = 1000
    edge_prob: float = 0.22
    function_type: str = "linear"  # "linear" | "mlp"
    noise: str = "gaussian"
    noise_scale: float = 1.0
    discrete_ratio: float = 0.0
    discrete_cardinality: int = 3
    measurement_error_ratio: float = 0.0
    measurement_error_sd: float = 0.0
    missing_rate: float = 0.0
    n_domains: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 1 or self.n_samples < 1:
            raise ValueError("n_nodes and n_samples must be >= 1")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError("edge_prob must lie in [0, 1]")
        if self.function_type not in ("linear", "mlp"):
            raise ValueError(f"unknown function_type {self.function_type!r}")
        if self.noise not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise!r}")
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be positive")
        for name in ("discrete_ratio", "measurement_error_ratio", "missing_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.discrete_cardinality < 2:
            raise ValueError("discrete_cardinality must be >= 2")
        if self.measurement_error_sd < 0:
            raise ValueError("measurement_error_sd must be nonnegative")
        if self.n_domains < 1:
            raise ValueError("n_domains must be >= 1")

    def as_dict(self):
        return {
            "kind": "tabular",
            "n_nodes": self.n_nodes,
            "n_samples": self.n_samples,
            "edge_prob": self.edge_prob,
            "function_type": self.function_type,
            "noise": self.noise,
            "noise_scale": self.noise_scale,
            "discrete_ratio": self.discrete_ratio,
            "discrete_cardinality": self.discrete_cardinality,
            "measurement_error_ratio": self.measurement_error_ratio,
            "measurement_error_sd": self.measurement_error_sd,
            "missing_rate": self.missing_rate,
            "n_domains": self.n_domains,
            "seed": self.seed,
        }


def scenario_from_dict(obj):
    obj = {k: v for k, v in obj.items() if k != "kind"}
    return TabularScenario(**obj)


def sample_noise(kind, scale, n, rng):
    """i.i.d. noise, analytically centered and scaled to standard deviation `scale`."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if kind == "gaussian":
        return rng.standard_normal(n) * scale
    if kind == "exponential":
        # Exp(1): mean 1, sd 1
        return (rng.exponential(1.0, n) - 1.0) * scale
    if kind == "gumbel":
        # Gumbel(0, 1): mean gamma, sd pi/sqrt(6)
        return (rng.gumbel(0.0, 1.0, n) - _EULER_GAMMA) * (scale * np.sqrt(6.0) / np.pi)
    if kind == "uniform":
        # U(-a, a) has sd a/sqrt(3)
        a = np.sqrt(3.0)
        return rng.uniform(-a, a, n) * scale
    if kind == "logistic":
        # Logistic(0, 1): sd pi/sqrt(3)
        return rng.logistic(0.0, 1.0, n) * (scale * np.sqrt(3.0) / np.pi)
    raise ValueError(f"unknown noise kind {kind!r}")


def _signed_uniform(rng, size):
    """Magnitudes in [WEIGHT_LOW, WEIGHT_HIGH], random sign; bounded away from zero."""
    w = rng.uniform(WEIGHT_LOW, WEIGHT_HIGH, size)
    signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return w * signs


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def simulate_tabular(scenario):
    """Draw a DAG and a dataset from it. Returns (Dag, Dataset)."""
    rng = np.random.default_rng(scenario.seed)
    graph_seed = int(rng.integers(2**63))
    skeleton = erdos_renyi_dag(scenario.n_nodes, scenario.edge_prob, graph_seed)

    p, n = scenario.n_nodes, scenario.n_samples
    weights = np.zeros((p, p))
    if skeleton.n_edges:
        weights[skeleton.edges] = _signed_uniform(rng, skeleton.n_edges)
    dag = Dag(p, skeleton.edges, weights if skeleton.n_edges else None)

    noise = np.column_stack(
        [sample_noise(scenario.noise, scenario.noise_scale, n, rng) for _ in range(p)]
    )
    mlp_params = {}
    if scenario.function_type == "mlp":
        for j in range(p):
            k = len(dag.parents(j))
            if k:
                mlp_params[j] = (
                    _signed_uniform(rng, (k, MLP_HIDDEN_WIDTH)),
                    _signed_uniform(rng, MLP_HIDDEN_WIDTH),
                )

    values = np.zeros((n, p))
    for j in dag.topological_order():
        pa = dag.parents(j)
        if not pa:
            values[:, j] = noise[:, j]
        elif scenario.function_type == "linear":
            values[:, j] = values[:, pa] @ weights[pa, j] + noise[:, j]
        else:
            w1, w2 = mlp_params[j]
            values[:, j] = _sigmoid(values[:, pa] @ w1) @ w2 + noise[:, j]

    meta = [ColumnMeta(f"X{i}", "continuous") for i in range(p)]
    data = Dataset(values, meta)

    data = discretize_columns(
        data, dag, scenario.discrete_ratio, scenario.discrete_cardinality, rng
    )
    data = apply_measurement_error(
        data, scenario.measurement_error_ratio, scenario.measurement_error_sd, rng
    )
    data = apply_missing(data, scenario.missing_rate, rng)
    data = apply_domain_shift(data, dag, scenario.n_domains, scenario.function_type, rng)
    return dag, data


def categorical_from_logits(logits, rng):
    """Sample one label per row from softmax probabilities of the logit rows."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(shifted)
    probs /= probs.sum(axis=1, keepdims=True)
    u = rng.random(logits.shape[0])
    return (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)


def discretize_columns(data, dag, ratio, cardinality, rng):
    """Turn floor(ratio * p) random columns into categorical codes.

    Logits are independent linear maps of the column's own continuous value
    plus standard Gaussian noise; labels are sampled through the softmax.
    The DAG argument fixes the interface; the logit map only reads the
    column being discretized.
    """
    del dag
    p = data.n_columns
    count = int(np.floor(ratio * p))
    if count == 0:
        return data
    chosen = np.sort(rng.choice(p, size=count, replace=False))
    values = data.values.copy()
    meta = list(data.column_meta)
    for j in chosen:
        x = values[:, j]
        sd = np.nanstd(x)
        if sd == 0 or np.isnan(sd):
            raise ConstantColumn(f"cannot discretize constant column {meta[j].name}")
        x_std = (x - np.nanmean(x)) / sd
        slopes = _signed_uniform(rng, cardinality)
        logits = np.outer(x_std, slopes) + rng.standard_normal((len(x), cardinality))
        labels = categorical_from_logits(np.nan_to_num(logits), rng).astype(float)
        labels[np.isnan(x)] = np.nan
        values[:, j] = labels
        meta[j] = ColumnMeta(meta[j].name, "discrete", cardinality)
    return replace(data, values=values, column_meta=meta)


def apply_measurement_error(data, column_ratio, sd, rng):
    """Additive Gaussian observation noise on a random subset of continuous columns."""
    continuous = [j for j, m in enumerate(data.column_meta) if m.kind == "continuous"]
    count = int(np.floor(column_ratio * len(continuous)))
    if count == 0 or sd == 0:
        return data
    chosen = np.sort(rng.choice(len(continuous), size=count, replace=False))
    values = data.values.copy()
    for idx in chosen:
        j = continuous[idx]
        values[:, j] = values[:, j] + rng.normal(0.0, sd, data.n_samples)
    return data.with_values(values)


def apply_missing(data, rate, rng):
    """Each cell independently becomes missing with the given probability."""
    if rate < 0 or rate >= 1:
        raise RateOutOfRange("missing rate must lie in [0, 1)")
    if rate == 0:
        return data
    mask = rng.random(data.values.shape) < rate
    values = data.values.copy()
    values[mask] = np.nan
    return data.with_values(values)


def apply_domain_shift(data, dag, n_domains, function_type, rng):
    """Partition rows into domains and perturb a random half of the columns.

    Linear scenarios add a constant offset per domain index; mlp scenarios
    add a quadratic transform of the column, both scaled by
    DOMAIN_EFFECT_COEFF * domain index. Discrete columns are never shifted.
    """
    del dag
    n = data.n_samples
    domain_index = (np.arange(n) * n_domains) // n
    if n_domains == 1:
        return replace(data, domain_index=domain_index)
    continuous = [j for j, m in enumerate(data.column_meta) if m.kind == "continuous"]
    k = (len(continuous) + 1) // 2
    affected = (
        np.sort(rng.choice(len(continuous), size=k, replace=False)) if k else np.array([], int)
    )
    values = data.values.copy()
    strength = DOMAIN_EFFECT_COEFF * domain_index
    for idx in affected:
        j = continuous[idx]
        if function_type == "linear":
            values[:, j] = values[:, j] + strength
        else:
            values[:, j] = values[:, j] + strength * values[:, j] ** 2
    return replace(data, values=values, domain_index=domain_index)


def closed_form_covariance(dag, noise_scale):
    """Population covariance of a linear SEM: (I-W)^-T D (I-W)^-1."""
    w = dag.weights if dag.weights is not None else np.zeros((dag.n_nodes, dag.n_nodes))
    identity = np.eye(dag.n_nodes)
    inv = np.linalg.inv(identity - w)
    d = noise_scale**2 * identity
    return inv.T @ d @ inv
