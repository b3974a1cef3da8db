"""Independent reference computations used by the test suite.

Nothing here calls into the filter, smoother or LARS kernels under test.
"""

import numpy as np


# ---------------------------------------------------------------- joint Gaussian

def joint_gaussian(params, T):
    """Covariance of (theta_0..theta_T, y_1..y_T) by explicit linear propagation.

    Every variable is written as a linear map of the independent noise vector
    (theta_0, eta_1..eta_T, xi_1..xi_T); the covariance is M Sigma M'.
    """
    F, A, Z, B, Q0 = params.F, params.A, params.Z, params.B, params.Q0
    k, p = F.shape[0], B.shape[0]
    n_eps = k + T * k + T * p
    Sigma = np.eye(n_eps)
    Sigma[:k, :k] = Q0
    theta = [np.zeros((k, n_eps))]
    theta[0][:, :k] = np.eye(k)
    ys = [np.zeros((p, n_eps))]
    for t in range(1, T + 1):
        eta = np.zeros((k, n_eps))
        eta[:, k + (t - 1) * k: k + t * k] = np.eye(k)
        xi = np.zeros((p, n_eps))
        off = k + T * k + (t - 1) * p
        xi[:, off: off + p] = np.eye(p)
        th = F @ theta[-1] + A @ ys[-1] + eta
        y = Z @ th + B @ ys[-1] + xi
        theta.append(th)
        ys.append(y)
    M_theta = np.vstack(theta)          # (T+1)k x n_eps
    M_y = np.vstack(ys[1:])             # T p x n_eps
    C_tt = M_theta @ Sigma @ M_theta.T
    C_ty = M_theta @ Sigma @ M_y.T
    C_yy = M_y @ Sigma @ M_y.T
    return C_tt, C_ty, C_yy


def gaussian_logpdf(x, cov):
    n = x.shape[0]
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    return -0.5 * (n * np.log(2 * np.pi) + logdet + x @ np.linalg.solve(cov, x))


def conditional_moments(params, y):
    """Posterior means, covariances and lag-one covariances by dense conditioning.

    Returns (mean (T+1, k), cov (T+1, k, k), lag1 (T+1, k, k), loglik).
    """
    T, p = y.shape
    k = params.k
    C_tt, C_ty, C_yy = joint_gaussian(params, T)
    yv = y.reshape(-1)
    Cinv_y = np.linalg.solve(C_yy, yv)
    mean = (C_ty @ Cinv_y).reshape(T + 1, k)
    post = C_tt - C_ty @ np.linalg.solve(C_yy, C_ty.T)
    cov = np.array([post[t * k:(t + 1) * k, t * k:(t + 1) * k] for t in range(T + 1)])
    lag1 = np.zeros((T + 1, k, k))
    for t in range(1, T + 1):
        lag1[t] = post[t * k:(t + 1) * k, (t - 1) * k: t * k]
    return mean, cov, lag1, gaussian_logpdf(yv, C_yy)


def oracle_suffstats(params, Y):
    """Sufficient statistics from dense conditioning, summed over replicates and t = 1..T."""
    n, T, p = Y.shape
    out = {name: 0.0 for name in ("theta_theta", "theta_theta_lag", "theta_theta_prev", "theta_y",
                                  "theta_yprev", "thetaprev_yprev", "y_y", "y_ylag", "yprev_yprev")}
    for r in range(n):
        mean, cov, lag1, _ = conditional_moments(params, Y[r])
        for t in range(1, T + 1):
            yt = Y[r, t - 1]
            yp = Y[r, t - 2] if t >= 2 else np.zeros(p)
            out["theta_theta"] = out["theta_theta"] + cov[t] + np.outer(mean[t], mean[t])
            out["theta_theta_lag"] = out["theta_theta_lag"] + lag1[t] + np.outer(mean[t], mean[t - 1])
            out["theta_theta_prev"] = out["theta_theta_prev"] + cov[t - 1] + np.outer(mean[t - 1], mean[t - 1])
            out["theta_y"] = out["theta_y"] + np.outer(mean[t], yt)
            out["theta_yprev"] = out["theta_yprev"] + np.outer(mean[t], yp)
            out["thetaprev_yprev"] = out["thetaprev_yprev"] + np.outer(mean[t - 1], yp)
            out["y_y"] = out["y_y"] + np.outer(yt, yt)
            out["y_ylag"] = out["y_ylag"] + np.outer(yt, yp)
            out["yprev_yprev"] = out["yprev_yprev"] + np.outer(yp, yp)
    return out


def random_params(rng, p, k, stable=True, scale=0.6):
    from netinf.model import ModelParams
    F = rng.uniform(-scale, scale, (k, k))
    if stable:
        rho = np.max(np.abs(np.linalg.eigvals(F)))
        if rho > 0.8:
            F *= 0.8 / rho
    A = rng.uniform(-scale, scale, (k, p))
    Z = rng.uniform(-1, 1, (p, k))
    B = rng.uniform(-scale, scale, (p, p)) / max(1, p)
    L = rng.uniform(-0.5, 0.5, (k, k))
    Q0 = np.eye(k) + L @ L.T
    return ModelParams(F=F, A=A, Z=Z, B=B, Q0=Q0)


# ---------------------------------------------------------------- lasso oracles

def soft_threshold(b, lam):
    return np.sign(b) * np.maximum(np.abs(b) - lam, 0.0)


def lasso_cd(S, b, lam, tol=1e-10, max_sweeps=200000):
    """Coordinate descent for min 1/2 x'Sx - b'x + lam ||x||_1."""
    n = b.shape[0]
    x = np.zeros(n)
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(n):
            r = b[j] - S[j] @ x + S[j, j] * x[j]
            new = np.sign(r) * max(abs(r) - lam, 0.0) / S[j, j]
            delta = max(delta, abs(new - x[j]))
            x[j] = new
        if delta < tol:
            break
    return x


def project_l1_ball(v, s):
    """Euclidean projection onto {x : ||x||_1 <= s} (sort-based)."""
    if s <= 0:
        return np.zeros_like(v)
    if np.abs(v).sum() <= s:
        return v.copy()
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, len(u) + 1)
    rho = np.nonzero(u * ks > (css - s))[0][-1]
    theta = (css[rho] - s) / (rho + 1.0)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def projected_gradient_quadratic(S, b, s, iters=100000):
    """Maximize 2b'x - x'Sx on the L1 ball of radius s."""
    step = 1.0 / (2.0 * np.max(np.linalg.eigvalsh(S)))
    x = np.zeros_like(b)
    for _ in range(iters):
        x = project_l1_ball(x + step * (2 * b - 2 * S @ x), s)
    return x


def kkt_violation(S, b, x, s, tol=1e-6):
    """Violated KKT conditions for max 2b'x - x'Sx subject to ||x||_1 <= s.

    Returns ``(problems, lam)`` with ``lam`` the multiplier implied by ``x``.
    """
    c = b - S @ x
    support = np.abs(x) > 1e-12
    lam = np.max(np.abs(c[support])) if support.any() else np.max(np.abs(c))
    problems = []
    if np.any(np.abs(c) > lam + tol):
        problems.append("inactive correlation exceeds lambda")
    if support.any() and np.any(np.abs(np.abs(c[support]) - lam) > tol):
        problems.append("support correlations unequal")
    if lam > tol and np.any(np.sign(x[support]) != np.sign(c[support])):
        problems.append("sign mismatch on support")
    if lam * (s - np.abs(x).sum()) > tol:
        problems.append("complementary slackness")
    return problems, lam


def lars_data_matrix(X, y, max_steps=500):
    """Classic LARS-lasso on a data matrix, equiangular-vector form.

    Returns the list of knot coefficient vectors.
    """
    n_obs, n = X.shape
    beta = np.zeros(n)
    knots = [beta.copy()]
    active = []
    dropped = -1
    for _ in range(max_steps):
        c = X.T @ (y - X @ beta)
        C = np.max(np.abs(c))
        if C < 1e-13:
            break
        if not active:
            active = [int(np.argmax(np.abs(c)))]
        s = np.sign(c[active])
        XA = X[:, active] * s
        GA = XA.T @ XA
        Ginv1 = np.linalg.solve(GA, np.ones(len(active)))
        AA = 1.0 / np.sqrt(Ginv1.sum())
        w = AA * Ginv1
        u = XA @ w
        a = X.T @ u
        gamma = C / AA
        event = None
        for j in range(n):
            if j in active:
                continue
            for num, den in ((C - c[j], AA - a[j]), (C + c[j], AA + a[j])):
                if den > 1e-15:
                    g = num / den
                    if j == dropped and abs(num) < 1e-9 * C:
                        continue
                    if 1e-14 < g < gamma:
                        gamma, event = g, ("add", j)
        d = s * w
        for pos, j in enumerate(active):
            if d[pos] != 0 and beta[j] != 0:
                g = -beta[j] / d[pos]
                if 1e-14 < g < gamma:
                    gamma, event = g, ("drop", j)
        for pos, j in enumerate(active):
            beta[j] += gamma * d[pos]
        dropped = -1
        if event is None:
            knots.append(beta.copy())
            break
        if event[0] == "add":
            active.append(event[1])
        else:
            beta[event[1]] = 0.0
            active.remove(event[1])
            dropped = event[1]
        knots.append(beta.copy())
    return knots


def auroc(truth_mask, scores):
    """Area under the ROC curve by pairwise comparison (ties count one half)."""
    pos = scores[truth_mask]
    neg = scores[~truth_mask]
    if pos.size == 0 or neg.size == 0:
        return np.nan
    gt = (pos[:, None] > neg[None, :]).sum()
    eq = (pos[:, None] == neg[None, :]).sum()
    return (gt + 0.5 * eq) / (pos.size * neg.size)


def random_pd(rng, n, cond_floor=0.05):
    X = rng.standard_normal((n + 2, n))
    return X.T @ X / (n + 2) + cond_floor * np.eye(n)


# ---------------------------------------------------------------- batched marginal likelihood

def batched_marginal_loglik(F, A, Z, B, Q0, Y):
    """Observed-data log-likelihood for a batch of parameter sets.

    ``F, A, Z, B`` carry a leading batch axis; ``Y`` is (n_R, T, p). The
    stacked observations are zero-mean Gaussian with covariance L L', where
    L maps the independent noise vector to (y_1..y_T). Returns shape (N,).
    """
    N, k, p = F.shape[0], F.shape[1], B.shape[1]
    n_R, T, _ = Y.shape
    D = k + T * (k + p)
    theta = np.zeros((N, k, D))
    theta[:, :, :k] = np.linalg.cholesky(Q0)
    y = np.zeros((N, p, D))
    rows = []
    for t in range(T):
        eta = np.zeros((k, D))
        eta[:, k + t * k: k + (t + 1) * k] = np.eye(k)
        xi = np.zeros((p, D))
        off = k + T * k + t * p
        xi[:, off: off + p] = np.eye(p)
        theta = F @ theta + A @ y + eta
        y = Z @ theta + B @ y + xi
        rows.append(y)
    L = np.concatenate(rows, axis=1)                      # (N, T p, D)
    C = L @ L.transpose(0, 2, 1)
    out = np.full(N, -np.inf)
    ok = np.all(np.isfinite(C), axis=(1, 2))
    try:
        chol = np.linalg.cholesky(C[ok])
    except np.linalg.LinAlgError:
        # a trial point blew up numerically; score the bad ones as -inf
        for i in np.nonzero(ok)[0]:
            try:
                np.linalg.cholesky(C[i])
            except np.linalg.LinAlgError:
                ok[i] = False
        chol = np.linalg.cholesky(C[ok])
    if not ok.any():
        return out
    logdet = 2 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    obs = Y.reshape(n_R, -1).T                            # (T p, n_R)
    w = np.linalg.solve(chol, np.broadcast_to(obs, (chol.shape[0],) + obs.shape))
    quad = (w ** 2).sum(axis=(1, 2))
    out[ok] = -0.5 * (n_R * (T * p * np.log(2 * np.pi) + logdet) + quad)
    return out
    chol = np.linalg.cholesky(C[ok])
    logdet = 2 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    obs = Y.reshape(n_R, -1).T                            # (T p, n_R)
    w = np.linalg.solve(chol, np.broadcast_to(obs, (chol.shape[0],) + obs.shape))
    quad = (w ** 2).sum(axis=(1, 2))
    out[ok] = -0.5 * (n_R * (T * p * np.log(2 * np.pi) + logdet) + quad)
    return out


def projected_gradient_restarts(f, x0, project, iters=3000, h=1e-6, tol=1e-11):
    """Batched projected-gradient ascent with central-difference gradients.

    ``f`` maps (N, d) to (N,); ``project`` maps (N, d) to (N, d). Each
    restart keeps its own Armijo step. Returns the final points and values.
    """
    x = project(x0)
    n, d = x.shape
    fx = f(x)
    step = np.full(n, 0.1)
    active = np.ones(n, dtype=bool)
    E = h * np.eye(d)
    for _ in range(iters):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa = x[idx]
        plus = (xa[:, None, :] + E).reshape(-1, d)
        minus = (xa[:, None, :] - E).reshape(-1, d)
        g = (f(plus) - f(minus)).reshape(idx.size, d) / (2 * h)
        pending = np.ones(idx.size, dtype=bool)
        cand = xa.copy()
        fc = fx[idx].copy()
        for _ in range(60):
            if not pending.any():
                break
            j = np.nonzero(pending)[0]
            trial = project(xa[j] + step[idx[j], None] * g[j])
            ft = f(trial)
            ok = ft >= fx[idx[j]] + 1e-4 * np.einsum("ij,ij->i", g[j], trial - xa[j])
            cand[j[ok]] = trial[ok]
            fc[j[ok]] = ft[ok]
            pending[j[ok]] = False
            step[idx[j[~ok]]] *= 0.5
        moved = np.max(np.abs(cand - xa), axis=1)
        gain = fc - fx[idx]
        x[idx] = cand
        fx[idx] = fc
        step[idx] = np.minimum(step[idx] * 2.0, 10.0)
        active[idx[(moved < 1e-10) | ((gain < tol) & (gain >= 0) & (moved < 1e-7))]] = False
    return x, fx
