"""Linear structure learning as continuous optimization with an acyclicity
constraint.

Minimizes the least-squares objective plus an L1 penalty subject to
h(W) = tr(exp(W o W)) - d = 0, driven to the constraint surface by an
augmented Lagrangian: the quadratic penalty grows tenfold whenever h fails
to drop below a quarter of its previous value, and the multiplier follows a
dual ascent step. The inner subproblem splits W into nonnegative parts and
runs L-BFGS-B.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as slin
import scipy.optimize as sopt

from ..cancellation import NEVER
from ..dataset import Dataset
from ..errors import DataContainsMissing, NonConvergence
from ..graphs import Dag, is_acyclic

H_DECAY = 0.25
RHO_GROWTH = 10.0


@dataclass(frozen=True)
class NotearsConfig:
    lambda1: float = 0.1
    w_threshold: float = 0.3
    h_tol: float = 1e-8
    rho_max: float = 1e16
    max_outer: int = 100

    def __post_init__(self):
        for name in ("lambda1", "w_threshold", "h_tol", "rho_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")


def notears_acyclicity(w):
    """h(W) = tr(exp(W o W)) - d and its gradient E^T o 2W."""
    e = slin.expm(w * w)
    h = float(np.trace(e)) - w.shape[0]
    grad = e.T * w * 2.0
    return h, grad


def _center(values):
    # centering only: rescaling columns to unit variance would erase the
    # scale information the least-squares objective needs to identify
    # directions in equal-noise linear systems
    return values - values.mean(axis=0)


def least_squares_loss(w, x):
    n = x.shape[0]
    r = x - x @ w
    loss = 0.5 * float((r * r).sum()) / n
    grad = -(x.T @ r) / n
    return loss, grad


def augmented_lagrangian_minimize(objective, d, rho, alpha, w_start):
    """Inner subproblem on the split W = W+ - W- with nonnegative parts."""

    def func(theta):
        w = (theta[: d * d] - theta[d * d :]).reshape(d, d)
        f, g = objective(w, rho, alpha)
        return f, np.concatenate([g.ravel(), -g.ravel()])

    bounds = [(0.0, 0.0) if i == j else (0.0, None) for _ in range(2) for i in range(d) for j in range(d)]
    sol = sopt.minimize(func, w_start, method="L-BFGS-B", jac=True, bounds=bounds)
    return sol.x


def solve_augmented_lagrangian(objective_parts, d, cfg, extra_dim=0, cancel=NEVER):
    """Shared outer loop for the linear and temporal variants.

    `objective_parts(w, extra)` returns (smooth loss, grad_w, grad_extra);
    h and the L1 terms are handled here. `extra` is a free unconstrained
    block (the lagged coefficients of the temporal variant).
    """
    loss_fn, l1_w, l1_extra = objective_parts
    size_w = d * d
    theta = np.zeros(2 * (size_w + extra_dim))
    rho, alpha, h = 1.0, 0.0, np.inf

    def split(theta):
        w = (theta[:size_w] - theta[size_w : 2 * size_w]).reshape(d, d)
        if extra_dim:
            pos = theta[2 * size_w : 2 * size_w + extra_dim]
            neg = theta[2 * size_w + extra_dim :]
            extra = pos - neg
        else:
            extra = np.zeros(0)
        return w, extra

    def func(theta):
        w, extra = split(theta)
        loss, g_w, g_extra = loss_fn(w, extra)
        h_val, h_grad = notears_acyclicity(w)
        f = (
            loss
            + 0.5 * rho * h_val * h_val
            + alpha * h_val
            + l1_w * np.abs(w).sum()
            + l1_extra * np.abs(extra).sum()
        )
        g = g_w + (rho * h_val + alpha) * h_grad
        grad = [g.ravel() + l1_w, -g.ravel() + l1_w]
        if extra_dim:
            grad.extend([g_extra + l1_extra, -g_extra + l1_extra])
        return f, np.concatenate(grad)

    bounds = [(0.0, 0.0) if i == j else (0.0, None) for i in range(d) for j in range(d)]
    bounds = bounds + bounds + [(0.0, None)] * (2 * extra_dim)

    for _ in range(cfg.max_outer):
        cancel.check()
        while rho < cfg.rho_max:
            cancel.check()
            sol = sopt.minimize(func, theta, method="L-BFGS-B", jac=True, bounds=bounds)
            w_new, _ = split(sol.x)
            h_new, _ = notears_acyclicity(w_new)
            if h_new > H_DECAY * h:
                rho *= RHO_GROWTH
            else:
                break
        theta = sol.x
        h = h_new
        alpha += rho * h
        if h <= cfg.h_tol or rho >= cfg.rho_max:
            break
    if h > cfg.h_tol and rho < cfg.rho_max:
        raise NonConvergence(f"outer loop exhausted with h={h:.3e}", h_value=h)
    w, extra = split(theta)
    return w, extra, h


def prune_to_dag(w, threshold):
    """Zero weights below threshold; drop weakest cycle edges if any remain."""
    w = np.where(np.abs(w) >= threshold, w, 0.0)
    np.fill_diagonal(w, 0.0)
    while not is_acyclic(w != 0):
        nz = np.abs(w[w != 0])
        w = np.where(np.abs(w) <= nz.min(), 0.0, w)
    return w


def notears_linear(data, cfg=NotearsConfig(), cancel=NEVER):
    """Weighted DAG estimate on standardized data."""
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if np.isnan(values).any():
        raise DataContainsMissing("impute missing values before NOTEARS")
    x = _center(values)
    d = x.shape[1]

    def loss_fn(w, extra):
        loss, grad = least_squares_loss(w, x)
        return loss, grad, np.zeros(0)

    w, _, h = solve_augmented_lagrangian((loss_fn, cfg.lambda1, 0.0), d, cfg, cancel=cancel)
    w = prune_to_dag(w, cfg.w_threshold)
    edges = w != 0
    return Dag(d, edges, w if edges.any() else None)
