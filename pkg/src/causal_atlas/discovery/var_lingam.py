"""VAR residual structure learning: autoregressive filtering plus
non-Gaussian identification of instantaneous effects.

B0 comes from running the recursive exogenous search on the VAR residuals;
the lagged structural matrices follow from the reduced-form coefficients by
B_k = (I - B0) M_k. Results are reported in the package's cause-row
convention, so the stored matrices are the transposes of the row-effect
forms above.
"""

from __future__ import annotations

import numpy as np

from ..cancellation import NEVER
from ..graphs import TemporalGraph
from .granger import fit_var
from .lingam import direct_lingam

PRUNE_WEIGHT = 0.05


def var_lingam(series, lag, cancel=NEVER):
    """TemporalGraph estimate; weights below 0.05 are pruned."""
    fit = fit_var(series, lag)
    resid_dag = direct_lingam(fit.residuals, cancel=cancel)

    p = fit.residuals.shape[1]
    w0 = resid_dag.weights if resid_dag.weights is not None else np.zeros((p, p))
    b0 = w0.T  # rows = effect
    transform = np.eye(p) - b0
    lagged = []
    for m in fit.coefficients:
        b_k = transform @ m
        a_k = b_k.T  # back to rows = cause
        lagged.append(np.where(np.abs(a_k) >= PRUNE_WEIGHT, a_k, 0.0))
    intra = np.where(np.abs(w0) >= PRUNE_WEIGHT, w0, 0.0)
    return TemporalGraph(p, lag, intra, lagged)
