"""Sparse dynamic interaction networks from replicated expression time series.

An input-dependent linear Gaussian state-space model is fitted by an
L1-constrained EM algorithm (Kalman smoother E-step, Gram-driven LARS
M-step); penalties are chosen by corrected AIC and the fitted block matrix
[[B, Z], [A, F]] is exported as a signed directed graph.
"""

from ._kernels import BACKEND
from .em import ConvergenceOpts, FitResult, InitSpec, Penalties, em_fit, estep, mstep, mstep_row_problem
from .errors import DataError, DimensionError, IllPosedProblemError, NetinfError, NumericalError
from .kalman import (ESuffStats, FilteredMoments, SmoothedMoments, accumulate_suffstats,
                     kalman_filter, observed_loglik, rts_smoother)
from .lars import LarsPath, QuadProblem, coefs_at_budget, lars_path, max_quadratic_l1
from .model import (Dataset, Dims, HiddenTrajectory, ModelParams, observation_count, param_count,
                    random_sparse_params, simulate)
from .netgraph import InteractionGraph, assemble_graph, degree_ranking, export_graph
from .selection import GridSpec, SelectionTable, aicc, effective_params, select_model

__all__ = [
    "BACKEND",
    "ConvergenceOpts",
    "FitResult",
    "InitSpec",
    "Penalties",
    "em_fit",
    "estep",
    "mstep",
    "mstep_row_problem",
    "DataError",
    "DimensionError",
    "IllPosedProblemError",
    "NetinfError",
    "NumericalError",
    "ESuffStats",
    "FilteredMoments",
    "SmoothedMoments",
    "accumulate_suffstats",
    "kalman_filter",
    "observed_loglik",
    "rts_smoother",
    "LarsPath",
    "QuadProblem",
    "coefs_at_budget",
    "lars_path",
    "max_quadratic_l1",
    "Dataset",
    "Dims",
    "HiddenTrajectory",
    "ModelParams",
    "observation_count",
    "param_count",
    "random_sparse_params",
    "simulate",
    "InteractionGraph",
    "assemble_graph",
    "degree_ranking",
    "export_graph",
    "GridSpec",
    "SelectionTable",
    "aicc",
    "effective_params",
    "select_model",
]

__version__ = "0.1.0"
