"""Causal discovery algorithms, one representative per methodological family.

Every algorithm is addressable through a stable string id via
:func:`run_algorithm`; see :mod:`causal_atlas.discovery.runners`.
"""

from .pc import PcConfig, pc
from .score import ScoreConfig, score_search
from .notears import NotearsConfig, notears_acyclicity, notears_linear
from .lingam import direct_lingam, max_entropy_entropy_approx
from .markov_blanket import iamb, mb_to_cpdag
from .granger import VarFit, fit_var, granger_f_statistic, granger_multivariate, granger_pairwise
from .var_lingam import var_lingam
from .dynotears import dynotears
from .runners import ALGORITHM_IDS, TABULAR_IDS, TIMESERIES_IDS, register_runner, run_algorithm

__all__ = [
    "PcConfig",
    "pc",
    "ScoreConfig",
    "score_search",
    "NotearsConfig",
    "notears_linear",
    "notears_acyclicity",
    "direct_lingam",
    "max_entropy_entropy_approx",
    "iamb",
    "mb_to_cpdag",
    "VarFit",
    "fit_var",
    "granger_f_statistic",
    "granger_pairwise",
    "granger_multivariate",
    "var_lingam",
    "dynotears",
    "ALGORITHM_IDS",
    "TABULAR_IDS",
    "TIMESERIES_IDS",
    "run_algorithm",
    "register_runner",
]
