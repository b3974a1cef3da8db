"""Penalty selection by corrected AIC over a grid of L1 budgets."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .em import ConvergenceOpts, FitResult, InitSpec, Penalties, em_fit
from .errors import NetinfError
from .model import Dataset, Dims, ModelParams, observation_count

AXES = ("s_Z", "s_B", "s_F", "s_A")
DEFAULT_FRACTIONS = (0.05, 0.1, 0.2, 0.4, 0.8)


def aicc(loglik: float, P_eff: int, N: int) -> float:
    """Corrected AIC, ``-2 loglik + 2 P N / (N - P - 1)``; +inf where undefined."""
    denom = N - P_eff - 1
    if denom <= 0:
        return math.inf
    return -2.0 * loglik + 2.0 * P_eff * N / denom


def effective_params(params: ModelParams, tol: float = 1e-12) -> int:
    """Number of interaction coefficients with magnitude above ``tol``."""
    return int(sum(np.count_nonzero(np.abs(getattr(params, m)) > tol) for m in ("F", "A", "Z", "B")))


@dataclass(frozen=True)
class GridSpec:
    s_Z: tuple = DEFAULT_FRACTIONS
    s_B: tuple = DEFAULT_FRACTIONS
    s_F: tuple = DEFAULT_FRACTIONS
    s_A: tuple = DEFAULT_FRACTIONS
    k_values: tuple | None = None
    search: str = "coordinate-descent"
    mode: str = "fraction"

    def __post_init__(self):
        for axis in AXES:
            vals = tuple(float(v) for v in getattr(self, axis))
            if not vals:
                raise ValueError(f"grid axis {axis} is empty")
            if any(not v >= 0 for v in vals):
                raise ValueError(f"grid axis {axis} has negative entries")
            if list(vals) != sorted(vals):
                raise ValueError(f"grid axis {axis} is not sorted ascending")
            object.__setattr__(self, axis, vals)
        if self.k_values is not None:
            ks = tuple(int(k) for k in self.k_values)
            if not ks or any(k < 1 for k in ks):
                raise ValueError("k_values must be a non-empty list of positive integers")
            object.__setattr__(self, "k_values", ks)
        if self.search not in ("full-cross", "coordinate-descent"):
            raise ValueError(f"unknown search {self.search!r}")

    def axis(self, name: str) -> tuple:
        return getattr(self, name)


@dataclass(frozen=True)
class SelectionRow:
    penalties: tuple
    k: int
    loglik: float
    P_eff: int
    N: int
    aicc: float
    converged: bool

    def key(self):
        score = self.aicc if self.converged else math.inf
        return (score, self.P_eff, self.penalties, self.k)


@dataclass(frozen=True)
class SelectionTable:
    rows: tuple
    best_index: int
    mode: str = "fraction"

    @property
    def best(self) -> SelectionRow:
        return self.rows[self.best_index]


class SelectionError(NetinfError):
    """No grid point produced a usable (converged, finite-AICc) fit."""

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


def _best_index(rows) -> int:
    candidates = [i for i, r in enumerate(rows) if r.converged and math.isfinite(r.aicc)]
    if not candidates:
        return -1
    return min(candidates, key=lambda i: rows[i].key())


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("NETINF_THREADS", "1")))
    except ValueError:
        return 1


def select_model(data: Dataset, dims: Dims, grid: GridSpec, init: InitSpec | None = None,
                 opts: ConvergenceOpts | None = None, Q0=None) -> tuple[SelectionTable, FitResult]:
    """Fit every visited penalty tuple and return the AICc table and the best fit.

    Every fit starts from the same ``init``; results do not depend on the
    order or parallelism of evaluation.
    """
    init = InitSpec() if init is None else init
    opts = ConvergenceOpts() if opts is None else opts
    k_values = grid.k_values or (dims.k,)
    fits: dict = {}
    n_workers = _workers()

    def evaluate(points):
        todo = [pt for pt in points if pt not in fits]
        if not todo:
            return

        def run(pt):
            tup, k = pt
            d = replace(dims, k=k)
            pen = Penalties(*tup, mode=grid.mode)
            # explicit parameters and Q0 only fit the requested k
            same_k = k == dims.k
            start = init if same_k or init.kind != "explicit" else InitSpec(seed=init.seed)
            return em_fit(data, d, pen, start, opts, Q0=Q0 if same_k else None)

        if n_workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as ex:
                results = list(ex.map(run, todo))
        else:
            results = [run(pt) for pt in todo]
        for pt, fr in zip(todo, results):
            fits[pt] = fr

    def row_for(pt) -> SelectionRow:
        tup, k = pt
        fr = fits[pt]
        d = replace(dims, k=k)
        N = observation_count(d)
        P = effective_params(fr.params)
        return SelectionRow(penalties=tup, k=k, loglik=fr.loglik, P_eff=P, N=N,
                            aicc=aicc(fr.loglik, P, N), converged=fr.converged)

    for k in k_values:
        if grid.search == "full-cross":
            evaluate([(tup, k) for tup in itertools.product(*(grid.axis(a) for a in AXES))])
            continue
        current = [grid.axis(a)[(len(grid.axis(a)) - 1) // 2] for a in AXES]
        evaluate([(tuple(current), k)])
        for _sweep in range(3):
            changed = False
            for ai, axis in enumerate(AXES):
                points = []
                for v in grid.axis(axis):
                    cand = list(current)
                    cand[ai] = v
                    points.append((tuple(cand), k))
                evaluate(points)
                best_pt = min(points, key=lambda pt: row_for(pt).key())
                if best_pt[0] != tuple(current):
                    current = list(best_pt[0])
                    changed = True
            if not changed:
                break

    rows = tuple(row_for(pt) for pt in sorted(fits, key=lambda pt: (pt[1], pt[0])))
    best = _best_index(rows)
    if best < 0:
        raise SelectionError("select: no converged fit with finite AICc",
                             SelectionTable(rows, -1, grid.mode))
    table = SelectionTable(rows=rows, best_index=best, mode=grid.mode)
    row = rows[best]
    return table, fits[(row.penalties, row.k)]
