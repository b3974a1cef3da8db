"""Kalman filter, RTS smoother with lag-one covariances, and E-step moments.

With Q = R = I the predicted, filtered and smoothed covariances do not
depend on the data, so they are computed once and shared by every
replicate; only the means carry a replicate axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DimensionError, NumericalError
from .model import Dataset, ModelParams

LOG_2PI = float(np.log(2.0 * np.pi))
_JITTER = 1e-10


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def _cholesky(M, what="matrix"):
    try:
        L = np.linalg.cholesky(M)
        if np.min(np.diag(L)) ** 2 >= 1e-12:
            return L
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(M + _JITTER * np.eye(M.shape[0]))
    except np.linalg.LinAlgError:
        raise NumericalError(f"{what} is not positive definite") from None


@dataclass(frozen=True, eq=False)
class FilteredMoments:
    """Output of the forward pass for one replicate.

    Arrays indexed by time have T+1 rows, row ``t`` holding time ``t``; row 0
    of the filtered moments is the prior N(0, Q0) and row 0 of the predicted
    moments repeats it. ``innovation`` and ``innovation_cov`` have T rows,
    row ``t-1`` holding time ``t``. ``gain[t]`` is the Kalman gain (row 0 zero).
    """

    pred_mean: np.ndarray
    pred_cov: np.ndarray
    filt_mean: np.ndarray
    filt_cov: np.ndarray
    innovation: np.ndarray
    innovation_cov: np.ndarray
    gain: np.ndarray
    loglik: float


@dataclass(frozen=True, eq=False)
class SmoothedMoments:
    """Posterior moments of the hidden states given the whole series.

    ``mean[t]``, ``cov[t]`` for t = 0..T and ``lag1[t] = Cov[theta_t, theta_{t-1} | y]``
    for t = 1..T (``lag1[0]`` is zero).
    """

    mean: np.ndarray
    cov: np.ndarray
    lag1: np.ndarray


@dataclass(frozen=True, eq=False)
class ESuffStats:
    """Expected sufficient statistics summed over replicates and t = 1..T.

    Shapes: ``theta_theta``, ``theta_theta_lag``, ``theta_theta_prev`` are
    k x k; ``theta_y``, ``theta_yprev``, ``thetaprev_yprev`` are k x p;
    ``y_y``, ``y_ylag``, ``yprev_yprev`` are p x p. ``theta_theta_lag`` is
    sum E[theta_t theta_{t-1}'] and ``y_ylag`` is sum y_t y_{t-1}'.
    """

    theta_theta: np.ndarray
    theta_theta_lag: np.ndarray
    theta_theta_prev: np.ndarray
    theta_y: np.ndarray
    theta_yprev: np.ndarray
    thetaprev_yprev: np.ndarray
    y_y: np.ndarray
    y_ylag: np.ndarray
    yprev_yprev: np.ndarray
    n_R: int
    T: int

    @property
    def p(self) -> int:
        return self.y_y.shape[0]

    @property
    def k(self) -> int:
        return self.theta_theta.shape[0]

    def blocks(self) -> dict:
        return {name: getattr(self, name) for name in _STAT_NAMES}


_STAT_NAMES = ("theta_theta", "theta_theta_lag", "theta_theta_prev", "theta_y",
               "theta_yprev", "thetaprev_yprev", "y_y", "y_ylag", "yprev_yprev")


class _Covariances:
    """Data-independent part of the filter for a given parameter set and T."""

    def __init__(self, params: ModelParams, T: int):
        F, Z = params.F, params.Z
        k, p = params.k, params.p
        Ik, Ip = np.eye(k), np.eye(p)
        pred_cov = np.zeros((T + 1, k, k))
        filt_cov = np.zeros((T + 1, k, k))
        innov_cov = np.zeros((T, p, p))
        innov_chol = np.zeros((T, p, p))
        gain = np.zeros((T + 1, k, p))
        logdet = np.zeros(T)
        pred_cov[0] = filt_cov[0] = params.Q0
        for t in range(1, T + 1):
            P_pred = _sym(F @ filt_cov[t - 1] @ F.T + Ik)
            S = _sym(Z @ P_pred @ Z.T + Ip)
            L = _cholesky(S, f"innovation covariance at t={t}")
            # K = P_pred Z' S^{-1}
            K = cho_solve((L, True), Z @ P_pred).T
            P_filt = _sym(P_pred - K @ S @ K.T)
            pred_cov[t], filt_cov[t] = P_pred, P_filt
            innov_cov[t - 1], innov_chol[t - 1] = S, L
            gain[t] = K
            logdet[t - 1] = 2.0 * np.sum(np.log(np.diag(L)))
        self.T = T
        self.pred_cov = pred_cov
        self.filt_cov = filt_cov
        self.innov_cov = innov_cov
        self.innov_chol = innov_chol
        self.gain = gain
        self.logdet = logdet


def _check_series(params: ModelParams, Y: np.ndarray) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 3 or Y.shape[2] != params.p:
        raise DimensionError(f"series shape {Y.shape} incompatible with p={params.p}")
    if Y.shape[1] < 1:
        raise DimensionError("series must contain at least one time point")
    if not np.all(np.isfinite(Y)):
        raise NumericalError("series contains non-finite values")
    return Y


def _filter_means(params: ModelParams, Y: np.ndarray, cov: _Covariances):
    """Batched mean recursion over replicates; Y has shape (n, T, p)."""
    F, A, Z, B = params.F, params.A, params.Z, params.B
    n, T, p = Y.shape
    k = params.k
    pred_mean = np.zeros((n, T + 1, k))
    filt_mean = np.zeros((n, T + 1, k))
    innov = np.zeros((n, T, p))
    loglik = np.zeros(n)
    y_prev = np.zeros((n, p))
    m = np.zeros((n, k))
    for t in range(1, T + 1):
        m_pred = m @ F.T + y_prev @ A.T
        e = Y[:, t - 1] - m_pred @ Z.T - y_prev @ B.T
        m = m_pred + e @ cov.gain[t].T
        w = solve_triangular(cov.innov_chol[t - 1], e.T, lower=True)
        quad = np.sum(w * w, axis=0)
        loglik += -0.5 * (p * LOG_2PI + cov.logdet[t - 1] + quad)
        pred_mean[:, t], filt_mean[:, t], innov[:, t - 1] = m_pred, m, e
        y_prev = Y[:, t - 1]
    return pred_mean, filt_mean, innov, loglik


def _smooth(params: ModelParams, pred_mean, filt_mean, pred_cov, filt_cov, gain):
    """Batched RTS smoother plus lag-one covariance recursion."""
    F, Z = params.F, params.Z
    n, T1, k = filt_mean.shape
    T = T1 - 1
    Ik = np.eye(k)
    J = np.zeros((T, k, k))
    for t in range(T):
        L = _cholesky(pred_cov[t + 1], f"predicted covariance at t={t + 1}")
        # J_t = P_t F' (P^-_{t+1})^{-1}
        J[t] = cho_solve((L, True), F @ filt_cov[t]).T
    sm_mean = filt_mean.copy()
    sm_cov = filt_cov.copy()
    for t in range(T - 1, -1, -1):
        sm_mean[:, t] = filt_mean[:, t] + (sm_mean[:, t + 1] - pred_mean[:, t + 1]) @ J[t].T
        sm_cov[t] = _sym(filt_cov[t] + J[t] @ (sm_cov[t + 1] - pred_cov[t + 1]) @ J[t].T)
    lag1 = np.zeros((T + 1, k, k))
    lag1[T] = (Ik - gain[T] @ Z) @ F @ filt_cov[T - 1]
    for t in range(T, 1, -1):
        lag1[t - 1] = (filt_cov[t - 1] @ J[t - 2].T
                       + J[t - 1] @ (lag1[t] - F @ filt_cov[t - 1]) @ J[t - 2].T)
    return sm_mean, sm_cov, lag1


def kalman_filter(params: ModelParams, y) -> FilteredMoments:
    """Forward filter for a single replicate ``y`` of shape (T, p)."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise DimensionError(f"expected a (T, p) series, got shape {y.shape}")
    Y = _check_series(params, y[None])
    cov = _Covariances(params, Y.shape[1])
    pred_mean, filt_mean, innov, loglik = _filter_means(params, Y, cov)
    return FilteredMoments(
        pred_mean=pred_mean[0], pred_cov=cov.pred_cov, filt_mean=filt_mean[0],
        filt_cov=cov.filt_cov, innovation=innov[0], innovation_cov=cov.innov_cov,
        gain=cov.gain, loglik=float(loglik[0]),
    )


def rts_smoother(params: ModelParams, fm: FilteredMoments) -> SmoothedMoments:
    """Backward pass over the output of :func:`kalman_filter`."""
    mean, cov, lag1 = _smooth(params, fm.pred_mean[None], fm.filt_mean[None],
                              fm.pred_cov, fm.filt_cov, fm.gain)
    return SmoothedMoments(mean=mean[0], cov=cov, lag1=lag1)


def replicate_logliks(params: ModelParams, data) -> np.ndarray:
    """Per-replicate marginal log-likelihoods."""
    Y = _check_series(params, data.values if isinstance(data, Dataset) else data)
    cov = _Covariances(params, Y.shape[1])
    return _filter_means(params, Y, cov)[3]


def observed_loglik(params: ModelParams, data) -> float:
    """Marginal log-likelihood of all replicates, summed in replicate order."""
    total = 0.0
    for ll in replicate_logliks(params, data):
        total += float(ll)
    return total


def smooth_all(params: ModelParams, data):
    """Filter and smooth every replicate.

    Returns ``(sm_mean, sm_cov, lag1, logliks)`` where ``sm_mean`` has shape
    (n_R, T+1, k) and the covariances, shared by all replicates, (T+1, k, k).
    """
    Y = _check_series(params, data.values if isinstance(data, Dataset) else data)
    cov = _Covariances(params, Y.shape[1])
    pred_mean, filt_mean, _, loglik = _filter_means(params, Y, cov)
    sm_mean, sm_cov, lag1 = _smooth(params, pred_mean, filt_mean,
                                    cov.pred_cov, cov.filt_cov, cov.gain)
    return sm_mean, sm_cov, lag1, loglik


def _suffstats_from_moments(Y, sm_mean, sm_cov, lag1) -> ESuffStats:
    n, T, p = Y.shape
    k = sm_mean.shape[2]
    cov_cur = np.zeros((k, k))
    cov_prev = np.zeros((k, k))
    cov_lag = np.zeros((k, k))
    for t in range(1, T + 1):
        cov_cur += sm_cov[t]
        cov_prev += sm_cov[t - 1]
        cov_lag += lag1[t]
    Yprev = np.concatenate([np.zeros((n, 1, p)), Y[:, :-1]], axis=1)
    m_cur = sm_mean[:, 1:]
    m_prev = sm_mean[:, :-1]
    acc = {name: None for name in _STAT_NAMES}
    for r in range(n):
        mc, mp, yc, yp = m_cur[r], m_prev[r], Y[r], Yprev[r]
        parts = {
            "theta_theta": cov_cur + mc.T @ mc,
            "theta_theta_lag": cov_lag + mc.T @ mp,
            "theta_theta_prev": cov_prev + mp.T @ mp,
            "theta_y": mc.T @ yc,
            "theta_yprev": mc.T @ yp,
            "thetaprev_yprev": mp.T @ yp,
            "y_y": yc.T @ yc,
            "y_ylag": yc.T @ yp,
            "yprev_yprev": yp.T @ yp,
        }
        for name, value in parts.items():
            acc[name] = value.copy() if acc[name] is None else acc[name] + value
    for name in ("theta_theta", "theta_theta_prev", "y_y", "yprev_yprev"):
        acc[name] = _sym(acc[name])
    return ESuffStats(n_R=n, T=T, **acc)


def accumulate_suffstats(params: ModelParams, data) -> ESuffStats:
    """Run the smoother on every replicate and sum the E-step moments."""
    stats, _ = accumulate_suffstats_with_loglik(params, data)
    return stats


def accumulate_suffstats_with_loglik(params: ModelParams, data) -> tuple[ESuffStats, float]:
    """Like :func:`accumulate_suffstats`, also returning the observed log-likelihood."""
    Y = _check_series(params, data.values if isinstance(data, Dataset) else data)
    sm_mean, sm_cov, lag1, logliks = smooth_all(params, Y)
    stats = _suffstats_from_moments(Y, sm_mean, sm_cov, lag1)
    total = 0.0
    for ll in logliks:
        total += float(ll)
    return stats, total
