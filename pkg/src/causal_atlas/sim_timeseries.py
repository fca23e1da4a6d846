"""Stationary linear multivariate time series with known temporal graphs.

The structural model is x_t = W0^T x_t + sum_k A_k^T x_{t-k} + e_t with an
acyclic instantaneous matrix W0, solved per step through (I - W0^T)^-1.
Lagged weights decay with lag order by a power law, and stationarity is
enforced by rescaling lagged matrices until the VAR companion spectral
radius drops below one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ColumnMeta, Dataset
from .errors import SingularInstantaneousSystem
from .graphs import TemporalGraph, is_acyclic
from .sim_tabular import sample_noise

TS_NOISE_KINDS = ("gaussian", "exponential", "gumbel", "uniform")
GRAPH_TYPES = ("erdos_renyi", "barabasi_albert", "full")
DEFAULT_TARGET_RADIUS = 0.95


@dataclass(frozen=True)
class TsScenario:
    n_nodes: int = 10
    max_lag: int = 3
    intra_degree: float = 2.0
    inter_degree: float = 3.0
    graph_type: str = "erdos_renyi"
    weight_range_intra: tuple[float, float] = (0.1, 0.4)
    weight_range_inter: tuple[float, float] = (0.1, 0.5)
    decay_exponent: float = 1.0
    noise: str = "gaussian"
    noise_scale: float = 1.0
    n_steps: int = 1000
    burn_in: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 1 or self.max_lag < 1:
            raise ValueError("n_nodes and max_lag must be >= 1")
        if self.n_steps <= self.max_lag:
            raise ValueError("n_steps must exceed max_lag")
        if self.intra_degree < 0 or self.inter_degree < 0:
            raise ValueError("edge degrees must be nonnegative")
        if self.graph_type not in GRAPH_TYPES:
            raise ValueError(f"unknown graph_type {self.graph_type!r}")
        if self.noise not in TS_NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise!r}")
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be positive")
        if self.decay_exponent < 0:
            raise ValueError("decay_exponent must be nonnegative")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")

    def as_dict(self):
        return {
            "kind": "time_series",
            "n_nodes": self.n_nodes,
            "max_lag": self.max_lag,
            "intra_degree": self.intra_degree,
            "inter_degree": self.inter_degree,
            "graph_type": self.graph_type,
            "weight_range_intra": list(self.weight_range_intra),
            "weight_range_inter": list(self.weight_range_inter),
            "decay_exponent": self.decay_exponent,
            "noise": self.noise,
            "noise_scale": self.noise_scale,
            "n_steps": self.n_steps,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }


def scenario_from_dict(obj):
    obj = {k: v for k, v in obj.items() if k != "kind"}
    for key in ("weight_range_intra", "weight_range_inter"):
        if key in obj:
            obj[key] = tuple(obj[key])
    return TsScenario(**obj)


def _signed_range(rng, size, lo, hi):
    w = rng.uniform(lo, hi, size)
    return w * np.where(rng.random(size) < 0.5, -1.0, 1.0)


def _intra_support(rng, p, degree, graph_type):
    """Acyclic instantaneous support oriented along a random node order."""
    order = rng.permutation(p)
    support = np.zeros((p, p), dtype=bool)
    if graph_type == "full":
        for a in range(p):
            for b in range(a + 1, p):
                support[order[a], order[b]] = True
        return support
    if graph_type == "barabasi_albert":
        m = max(1, int(round(degree / 2)))
        attached = np.zeros(p)
        for b in range(1, p):
            weights = attached[:b] + 1.0
            weights /= weights.sum()
            targets = rng.choice(b, size=min(m, b), replace=False, p=weights)
            for a in targets:
                support[order[a], order[b]] = True
                attached[a] += 1
                attached[b] += 1
        return support
    prob = min(1.0, degree / max(1, p - 1))
    for a in range(p):
        for b in range(a + 1, p):
            if rng.random() < prob:
                support[order[a], order[b]] = True
    return support


def _inter_support(rng, p, max_lag, degree, graph_type):
    """Lagged supports; diagonal cells encode autoregressive effects."""
    if graph_type == "full":
        return [np.ones((p, p), dtype=bool) for _ in range(max_lag)]
    supports = [np.zeros((p, p), dtype=bool) for _ in range(max_lag)]
    if graph_type == "barabasi_albert":
        total = int(round(degree * p))
        indeg = np.zeros(p)
        for e in range(total):
            k = e % max_lag
            i = int(rng.integers(p))
            weights = (indeg + 1.0) / (indeg + 1.0).sum()
            j = int(rng.choice(p, p=weights))
            supports[k][i, j] = True
            indeg[j] += 1
        return supports
    prob = min(1.0, degree / (max_lag * p))
    for k in range(max_lag):
        supports[k] = rng.random((p, p)) < prob
    return supports


def generate_temporal_graph(scenario):
    """Temporal graph with lag-k weights damped by k^(-decay_exponent)."""
    rng = np.random.default_rng(scenario.seed)
    p, max_lag = scenario.n_nodes, scenario.max_lag

    intra_support = _intra_support(rng, p, scenario.intra_degree, scenario.graph_type)
    intra = np.zeros((p, p))
    count = int(intra_support.sum())
    if count:
        intra[intra_support] = _signed_range(rng, count, *scenario.weight_range_intra)
    assert is_acyclic(intra != 0)

    lagged = []
    supports = _inter_support(rng, p, max_lag, scenario.inter_degree, scenario.graph_type)
    for k in range(1, max_lag + 1):
        a = np.zeros((p, p))
        count = int(supports[k - 1].sum())
        if count:
            a[supports[k - 1]] = _signed_range(rng, count, *scenario.weight_range_inter)
            a *= float(k) ** (-scenario.decay_exponent)
        lagged.append(a)
    return TemporalGraph(p, max_lag, intra, lagged)


def reduced_form_matrices(tg):
    """Reduced-form VAR coefficients M_k = (I - W0^T)^-1 A_k^T (rows = effect)."""
    p = tg.n_nodes
    system = np.eye(p) - tg.intra.T
    if abs(np.linalg.det(system)) < 1e-12:
        raise SingularInstantaneousSystem("I - W0^T is singular")
    inv = np.linalg.inv(system)
    return [inv @ a.T for a in tg.lagged]


def companion_spectral_radius(tg):
    p, lag = tg.n_nodes, tg.max_lag
    ms = reduced_form_matrices(tg)
    companion = np.zeros((p * lag, p * lag))
    for k, m in enumerate(ms):
        companion[:p, k * p : (k + 1) * p] = m
    if lag > 1:
        companion[p:, : p * (lag - 1)] = np.eye(p * (lag - 1))
    if companion.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(companion)).max())


def stabilize(tg, target_radius=DEFAULT_TARGET_RADIUS):
    """Rescale lagged matrices until the companion spectral radius is < 1.

    Already-stable graphs are returned unchanged. One rescale by
    target_radius/radius suffices for lag 1; for higher lags the same rule
    is iterated to a fixed point, preserving graph support throughout.
    """
    if not 0.0 < target_radius < 1.0:
        raise ValueError("target_radius must lie in (0, 1)")
    radius = companion_spectral_radius(tg)
    if radius < 1.0:
        return tg
    lagged = [a.copy() for a in tg.lagged]
    for _ in range(100):
        scale = target_radius / radius
        lagged = [a * scale for a in lagged]
        candidate = TemporalGraph(tg.n_nodes, tg.max_lag, tg.intra, lagged)
        radius = companion_spectral_radius(candidate)
        if radius < 1.0:
            return candidate
    raise SingularInstantaneousSystem("failed to stabilize the lagged system")


def simulate_temporal(tg, scenario):
    """Simulate the stationary series; the first burn_in steps are discarded."""
    p = tg.n_nodes
    system = np.eye(p) - tg.intra.T
    if abs(np.linalg.det(system)) < 1e-12:
        raise SingularInstantaneousSystem("I - W0^T is singular")
    solve = np.linalg.inv(system)

    rng = np.random.default_rng(scenario.seed)
    total = scenario.n_steps + scenario.burn_in
    noise = np.column_stack(
        [sample_noise(scenario.noise, scenario.noise_scale, total, rng) for _ in range(p)]
    )
    lagged_t = [a.T for a in tg.lagged]
    x = np.zeros((total, p))
    for t in range(total):
        z = noise[t].copy()
        for k in range(1, min(t, tg.max_lag) + 1):
            z += lagged_t[k - 1] @ x[t - k]
        x[t] = solve @ z
    x = x[scenario.burn_in :]
    meta = [ColumnMeta(f"X{i}", "continuous") for i in range(p)]
    return Dataset(x, meta, time_index=np.arange(scenario.n_steps))
