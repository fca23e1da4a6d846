"""String-addressable dispatch for every implemented discovery algorithm.

The selector, CLI, service, benchmark harness, and bootstrap all call
:func:`run_algorithm` with a plain parameter map; tests may register extra
runners (e.g. deliberately slow ones) through :func:`register_runner`.
"""

from __future__ import annotations

from ..cancellation import NEVER
from ..errors import UnknownAlgorithm
from .dynotears import dynotears
from .granger import granger_multivariate, granger_pairwise
from .lingam import direct_lingam
from .markov_blanket import iamb_cpdag
from .notears import NotearsConfig, notears_linear
from .pc import PcConfig, pc
from .score import ScoreConfig, score_search
from .var_lingam import var_lingam


def _run_pc(data, params, cancel):
    cfg = PcConfig(
        alpha=params.get("alpha", 0.05),
        max_depth=params.get("max_depth"),
        test=params.get("test", "fisher_z"),
    )
    return pc(data, cfg, cancel=cancel)


def _run_score(data, params, cancel):
    cfg = ScoreConfig(
        penalty_multiplier=params.get("penalty_multiplier", 1.0),
        max_in_degree=params.get("max_in_degree"),
    )
    return score_search(data, cfg, cancel=cancel)


def _run_notears(data, params, cancel):
    cfg = NotearsConfig(
        lambda1=params.get("lambda1", 0.1),
        w_threshold=params.get("w_threshold", 0.3),
        h_tol=params.get("h_tol", 1e-8),
        rho_max=params.get("rho_max", 1e16),
        max_outer=params.get("max_outer", 100),
    )
    return notears_linear(data, cfg, cancel=cancel)


def _run_direct_lingam(data, params, cancel):
    return direct_lingam(data, cancel=cancel)


def _run_iamb(data, params, cancel):
    return iamb_cpdag(
        data,
        alpha=params.get("alpha", 0.05),
        test=params.get("test", "fisher_z"),
        cancel=cancel,
    )


def _run_granger_pairwise(data, params, cancel):
    return granger_pairwise(
        data,
        max_lag=params.get("max_lag", 3),
        alpha=params.get("alpha", 0.05),
        bh_correction=params.get("bh_correction", False),
        cancel=cancel,
    )


def _run_granger_multivariate(data, params, cancel):
    return granger_multivariate(
        data,
        max_lag=params.get("max_lag", 3),
        alpha=params.get("alpha", 0.05),
        bh_correction=params.get("bh_correction", False),
        cancel=cancel,
    )


def _run_var_lingam(data, params, cancel):
    return var_lingam(data, lag=params.get("lag", 3), cancel=cancel)


def _run_dynotears(data, params, cancel):
    cfg = NotearsConfig(
        lambda1=params.get("lambda_w", 0.05),
        w_threshold=params.get("w_threshold", 0.1),
        h_tol=params.get("h_tol", 1e-8),
        rho_max=params.get("rho_max", 1e16),
        max_outer=params.get("max_outer", 100),
    )
    return dynotears(
        data,
        lag=params.get("lag", 3),
        lambda_w=params.get("lambda_w", 0.05),
        lambda_a=params.get("lambda_a", 0.05),
        cfg=cfg,
        cancel=cancel,
    )


TABULAR_IDS = ("pc", "score_search", "notears_linear", "direct_lingam", "iamb_cpdag")
TIMESERIES_IDS = ("granger_pairwise", "granger_multivariate", "var_lingam", "dynotears")
ALGORITHM_IDS = TABULAR_IDS + TIMESERIES_IDS

_RUNNERS = {
    "pc": _run_pc,
    "score_search": _run_score,
    "notears_linear": _run_notears,
    "direct_lingam": _run_direct_lingam,
    "iamb_cpdag": _run_iamb,
    "granger_pairwise": _run_granger_pairwise,
    "granger_multivariate": _run_granger_multivariate,
    "var_lingam": _run_var_lingam,
    "dynotears": _run_dynotears,
}


def register_runner(algorithm_id, fn):
    _RUNNERS[algorithm_id] = fn


def run_algorithm(algorithm_id, data, params=None, cancel=NEVER):
    try:
        runner = _RUNNERS[algorithm_id]
    except KeyError:
        raise UnknownAlgorithm(f"no algorithm registered under {algorithm_id!r}") from None
    return runner(data, params or {}, cancel)
