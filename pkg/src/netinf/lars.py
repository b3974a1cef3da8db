"""Lasso paths for L1-constrained quadratic maximization.

Maximizing ``2 b'x - x'Sx`` subject to ``||x||_1 <= s`` is a lasso problem
whose LARS path depends on the data only through the Gram matrix ``S`` and
the correlation vector ``b``. The solver here works on ``(S, b)`` directly
and never forms a Cholesky factor of the full ``S`` or its inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError, IllPosedProblemError


@dataclass(frozen=True, eq=False)
class QuadProblem:
    """Gram matrix ``S`` (n x n, symmetric) and correlation vector ``b``."""

    S: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        n = b.shape[0]
        if S.shape != (n, n):
            raise DimensionError(f"S has shape {S.shape}, expected ({n}, {n})")
        if not (np.all(np.isfinite(S)) and np.all(np.isfinite(b))):
            raise IllPosedProblemError("S or b contains non-finite values")
        if n and np.max(np.abs(S - S.T)) > 1e-10 * max(1.0, np.max(np.abs(S))):
            raise IllPosedProblemError("S is not symmetric")
        S = 0.5 * (S + S.T)
        S.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(2.0 * self.b @ x - x @ self.S @ x)


@dataclass(frozen=True, eq=False)
class LarsPath:
    """Knots of a piecewise-linear lasso path.

    ``coefs[m]`` is the coefficient vector at knot ``m``, ``l1_norms[m]`` its
    L1 norm, ``lambdas[m]`` the largest absolute correlation
    ``max_j |b_j - (S coef)_j|`` and ``active[m]`` the active mask after the
    knot. ``complete`` is False when the path was cut short before reaching
    the unconstrained optimum.
    """

    coefs: np.ndarray
    l1_norms: np.ndarray
    lambdas: np.ndarray
    active: np.ndarray
    complete: bool
    status: int = _kernels.COMPLETE

    @property
    def n_knots(self) -> int:
        return self.coefs.shape[0]

    @property
    def final(self) -> np.ndarray:
        return self.coefs[-1]

    def active_set(self, m: int) -> tuple:
        return tuple(int(j) for j in np.flatnonzero(self.active[m]))


def default_max_knots(n: int) -> int:
    return 8 * n + 16


def _run(prob: QuadProblem, max_knots: int, l1_stop: float) -> LarsPath:
    if max_knots < 1:
        raise ValueError("max_knots must be >= 1")
    coefs, lambdas, active, status = _kernels.lars_gram(prob.S, prob.b, int(max_knots), float(l1_stop))
    if status == _kernels.NOT_PD:
        raise IllPosedProblemError("Gram matrix is not positive definite on the active set")
    return LarsPath(
        coefs=coefs,
        l1_norms=np.abs(coefs).sum(axis=1),
        lambdas=lambdas,
        active=active,
        complete=status == _kernels.COMPLETE,
        status=status,
    )


def lars_path(prob: QuadProblem, max_knots: int | None = None) -> LarsPath:
    """Full lasso path from zero to the unconstrained maximizer ``S^{-1} b``."""
    if max_knots is None:
        max_knots = default_max_knots(prob.n)
    return _run(prob, max_knots, np.inf)


def coefs_at_budget(path: LarsPath, s: float) -> np.ndarray:
    """Coefficients on the path where the L1 norm equals ``s``.

    Budgets beyond the last knot return the last knot. Between knots the
    path is linear, so interpolation is exact.
    """
    if not s >= 0:
        raise ValueError(f"budget must be nonnegative, got {s}")
    norms = path.l1_norms
    if s >= norms[-1]:
        return path.coefs[-1].copy()
    m = int(np.searchsorted(norms, s, side="right"))
    lo, hi = norms[m - 1], norms[m]
    w = (s - lo) / (hi - lo)
    return (1.0 - w) * path.coefs[m - 1] + w * path.coefs[m]


def max_quadratic_l1(prob: QuadProblem, s: float, max_knots: int | None = None) -> np.ndarray:
    """Maximizer of ``2 b'x - x'Sx`` subject to ``||x||_1 <= s``."""
    if not s >= 0:
        raise ValueError(f"budget must be nonnegative, got {s}")
    if s == 0:
        return np.zeros(prob.n)
    if max_knots is None:
        max_knots = default_max_knots(prob.n)
    path = _run(prob, max_knots, s)
    return coefs_at_budget(path, s)


def lasso_row(S, b, budget: float | None = None, fraction: float | None = None,
              max_knots: int | None = None) -> tuple[np.ndarray, float]:
    """Solve one row problem at an absolute budget or a fraction of the saturated norm.

    Returns ``(x, saturated_l1)``; ``saturated_l1`` is the L1 norm of the
    unconstrained maximizer, or NaN when only part of the path was traced.
    """
    prob = QuadProblem(S, b)
    if max_knots is None:
        max_knots = default_max_knots(prob.n)
    if fraction is not None:
        if fraction == 0:
            return np.zeros(prob.n), np.nan
        path = _run(prob, max_knots, np.inf)
        sat = float(path.l1_norms[-1])
        return coefs_at_budget(path, fraction * sat), sat
    if budget == 0:
        return np.zeros(prob.n), np.nan
    path = _run(prob, max_knots, budget)
    sat = float(path.l1_norms[-1]) if path.complete else np.nan
    return coefs_at_budget(path, budget), sat
