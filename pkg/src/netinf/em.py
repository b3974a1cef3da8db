"""Penalized EM: Kalman-smoother E-step, row-wise Gram-LARS M-step.

With identity noise covariances the expected complete-data log-likelihood
splits into an observation part in (Z, B) and a state part in (F, A), and
each part separates over rows. Every row update is therefore a small
problem ``max 2 b'x - x'Sx`` with ``||x||_1 <= budget`` solved by the
Gram-driven lasso path. Blocks are updated in the order Z, B, F, A, each
using the freshest partner block.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NumericalError
from .kalman import ESuffStats, accumulate_suffstats, accumulate_suffstats_with_loglik
from .lars import QuadProblem, lasso_row
from .model import Dataset, Dims, ModelParams, random_sparse_params

log = logging.getLogger(__name__)

BLOCKS = ("Z", "B", "F", "A")
_PARTNER = {"Z": "B", "B": "Z", "F": "A", "A": "F"}


@dataclass(frozen=True)
class Penalties:
    """L1 budgets per interaction matrix.

    In ``"fraction"`` mode each value is a fraction in [0, 1] of every row's
    saturated (unconstrained) L1 norm. In ``"absolute"`` mode each value is
    a whole-matrix budget split evenly across the matrix rows.
    """

    s_Z: float
    s_B: float
    s_F: float
    s_A: float
    mode: str = "fraction"

    def __post_init__(self):
        if self.mode not in ("fraction", "absolute"):
            raise ValueError(f"unknown penalty mode {self.mode!r}")
        for name in ("s_Z", "s_B", "s_F", "s_A"):
            v = getattr(self, name)
            if not v >= 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")
            if self.mode == "fraction" and v > 1:
                raise ValueError(f"{name} must be <= 1 in fraction mode, got {v}")

    def value(self, block: str) -> float:
        return getattr(self, "s_" + block)

    def as_tuple(self) -> tuple:
        return (self.s_Z, self.s_B, self.s_F, self.s_A)


@dataclass(frozen=True, eq=False)
class InitSpec:
    """How EM is started: ``"data"`` (default), ``"random"`` or ``"explicit"``."""

    kind: str = "data"
    seed: int = 0
    params: ModelParams | None = None
    ridge: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("data", "random", "explicit"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.kind == "explicit" and self.params is None:
            raise ValueError("explicit init requires params")


@dataclass(frozen=True)
class ConvergenceOpts:
    rel_tol: float = 1e-6
    max_iter: int = 500
    inner_sweeps: int = 1

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_iter < 1 or self.inner_sweeps < 1:
            raise ValueError("max_iter and inner_sweeps must be >= 1")


@dataclass(frozen=True, eq=False)
class FitResult:
    params: ModelParams
    loglik_trace: list
    n_iter: int
    converged: bool
    nonzero_counts: dict
    penalties: Penalties | None = None
    row_budgets: dict = field(default_factory=dict)

    @property
    def loglik(self) -> float:
        return self.loglik_trace[-1]


def estep(params: ModelParams, data: Dataset) -> ESuffStats:
    """Expected sufficient statistics under ``params``."""
    return accumulate_suffstats(params, data)


def _block_problems(stats: ESuffStats, which: str, other: np.ndarray):
    """Shared Gram matrix and the matrix whose row ``i`` is ``b`` for row ``i``."""
    if which == "Z":
        return stats.theta_theta, stats.theta_y.T - other @ stats.theta_yprev.T
    if which == "B":
        return stats.yprev_yprev, stats.y_ylag - other @ stats.theta_yprev
    if which == "F":
        return stats.theta_theta_prev, stats.theta_theta_lag - other @ stats.thetaprev_yprev.T
    if which == "A":
        return stats.yprev_yprev, stats.theta_yprev - other @ stats.thetaprev_yprev
    raise ValueError(f"unknown block {which!r}")


def _block_name(which: str) -> str:
    name = which.split("-")[0].upper()
    if name not in BLOCKS:
        raise ValueError(f"unknown block {which!r}")
    return name


def _partner_shape(stats: ESuffStats, block: str) -> tuple:
    p, k = stats.p, stats.k
    return {"Z": (p, p), "B": (p, k), "F": (k, p), "A": (k, k)}[block]


def _n_rows(stats: ESuffStats, block: str) -> int:
    return stats.p if block in ("Z", "B") else stats.k


def mstep_row_problem(stats: ESuffStats, which: str, row_index: int, other_block) -> QuadProblem:
    """Quadratic ``(S, b)`` for one row of Z, B, F or A given its partner block.

    The partner of Z is B (and vice versa); the partner of F is A (and vice
    versa). Maximizing ``2 b'x - x'Sx`` over the row is equivalent to
    maximizing the expected log-likelihood over that row.
    """
    block = _block_name(which)
    other = np.asarray(other_block, dtype=float)
    if other.shape != _partner_shape(stats, block):
        raise DimensionError(f"partner of {block} has shape {other.shape}, "
                             f"expected {_partner_shape(stats, block)}")
    n_rows = _n_rows(stats, block)
    if not 0 <= row_index < n_rows:
        raise IndexError(f"row {row_index} out of range for {block} with {n_rows} rows")
    S, bmat = _block_problems(stats, block, other)
    return QuadProblem(S, bmat[row_index])


def _sweep(stats: ESuffStats, current: ModelParams, pen: Penalties, budgets: dict | None):
    """One Z, B, F, A pass. Returns new params and the per-row budgets used."""
    mats = {"Z": current.Z, "B": current.B, "F": current.F, "A": current.A}
    used = {}
    for block in BLOCKS:
        S, bmat = _block_problems(stats, block, mats[_PARTNER[block]])
        n_rows = bmat.shape[0]
        new = np.zeros_like(mats[block])
        row_budget = np.zeros(n_rows)
        for i in range(n_rows):
            if budgets is not None:
                x, _ = lasso_row(S, bmat[i], budget=budgets[block][i])
                row_budget[i] = budgets[block][i]
            elif pen.mode == "fraction":
                x, sat = lasso_row(S, bmat[i], fraction=pen.value(block))
                row_budget[i] = 0.0 if pen.value(block) == 0 else pen.value(block) * sat
            else:
                row_budget[i] = pen.value(block) / n_rows
                x, _ = lasso_row(S, bmat[i], budget=row_budget[i])
            new[i] = x
        mats[block] = new
        used[block] = row_budget
    return current.replace(Z=mats["Z"], B=mats["B"], F=mats["F"], A=mats["A"]), used


def mstep(stats: ESuffStats, current: ModelParams, pen: Penalties) -> ModelParams:
    """One block-coordinate sweep Z, B, F, A under the given budgets."""
    if current.p != stats.p or current.k != stats.k:
        raise DimensionError("parameters and statistics disagree on dimensions")
    params, _ = _sweep(stats, current, pen, None)
    return params


def nonzero_counts(params: ModelParams, tol: float = 1e-12) -> dict:
    return {name: int(np.count_nonzero(np.abs(getattr(params, name)) > tol))
            for name in ("F", "A", "Z", "B")}


def data_driven_init(data: Dataset, k: int, ridge: float = 1e-3, Q0=None) -> ModelParams:
    """Ridge autoregression for B, PPCA loadings of its residuals for Z, F = 0.5 I, A = 0."""
    Y = data.values
    n, T, p = Y.shape
    Yprev = np.concatenate([np.zeros((n, 1, p)), Y[:, :-1]], axis=1).reshape(-1, p)
    Ycur = Y.reshape(-1, p)
    G = Yprev.T @ Yprev + ridge * np.eye(p)
    B = np.linalg.solve(G, Yprev.T @ Ycur).T
    resid = Ycur - Yprev @ B.T
    C = resid.T @ resid / resid.shape[0]
    evals, evecs = np.linalg.eigh(0.5 * (C + C.T))
    top = np.argsort(evals)[::-1][:k]
    V = evecs[:, top]
    # fix eigenvector signs so the largest-magnitude loading is positive
    flip = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])])
    flip[flip == 0] = 1.0
    V = V * flip
    scale = np.sqrt(np.maximum(evals[top] - 1.0, 1e-2))
    Z = np.zeros((p, k))
    Z[:, : V.shape[1]] = V * scale
    return ModelParams(F=0.5 * np.eye(k), A=np.zeros((k, p)), Z=Z, B=B, Q0=Q0)


def initial_params(data: Dataset, dims: Dims, init: InitSpec, Q0=None) -> ModelParams:
    if init.kind == "explicit":
        init.params.check_dims(dims)
        return init.params
    if init.kind == "random":
        params = random_sparse_params(dims, 1.0, 0.5, init.seed)
        return params if Q0 is None else params.replace(Q0=Q0)
    return data_driven_init(data, dims.k, init.ridge, Q0)


def em_fit(data: Dataset, dims: Dims, pen: Penalties, init: InitSpec | None = None,
           opts: ConvergenceOpts | None = None, Q0=None) -> FitResult:
    """Alternate E- and M-steps until the relative log-likelihood change is small.

    ``loglik_trace[i]`` is the observed-data log-likelihood of the parameters
    produced by M-step ``i + 1``. In fraction mode the per-row budgets are
    fixed at the first M-step and held for the rest of the run, so every
    M-step maximizes over the same constraint set.
    """
    init = InitSpec() if init is None else init
    opts = ConvergenceOpts() if opts is None else opts
    if (data.p, data.T, data.n_R) != (dims.p, dims.T, dims.n_R):
        raise DimensionError(f"dataset shape {data.values.shape} disagrees with {dims}")
    params = initial_params(data, dims, init, Q0)
    stats, ll = accumulate_suffstats_with_loglik(params, data)
    budgets = None
    trace = []
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        for _ in range(opts.inner_sweeps):
            params, budgets = _sweep(stats, params, pen, budgets)
        stats, ll = accumulate_suffstats_with_loglik(params, data)
        if not math.isfinite(ll):
            raise NumericalError(f"em: non-finite log-likelihood at iteration {it}")
        trace.append(ll)
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) / (1.0 + abs(ll)) < opts.rel_tol:
            converged = True
            break
    log.debug("em finished after %d iterations, loglik %.6f, converged=%s", it, ll, converged)
    return FitResult(params=params, loglik_trace=trace, n_iter=it, converged=converged,
                     nonzero_counts=nonzero_counts(params), penalties=pen,
                     row_budgets=budgets or {})
