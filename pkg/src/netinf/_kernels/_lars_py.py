"""Reference (pure NumPy) Gram-driven LARS-lasso path kernel.

The compiled kernel in ``_lars_c.pyx`` mirrors this function step for step.
"""

import numpy as np

# status codes shared with the compiled kernel
COMPLETE = 0
MAX_KNOTS = 1
BUDGET_REACHED = 2
NOT_PD = 3

_GAMMA_EPS = 1e-14
_TIE_RTOL = 1e-12


def _chol_solve(G, rhs):
    L = np.linalg.cholesky(G)
    z = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, z)


def lars_gram(S, b, max_knots, l1_stop=np.inf):
    """Lasso path of ``max 2 b'x - x'Sx`` over increasing L1 budgets.

    Returns ``(coefs, lambdas, active, status)``: knot coefficients (m, n),
    the maximal absolute correlation at each knot (m,), the active mask
    (m, n) and a status code. With ``l1_stop`` finite the path stops at the
    first knot whose L1 norm reaches it.
    """
    S = np.array(S, dtype=float)
    b = np.array(b, dtype=float)
    n = b.shape[0]
    beta = np.zeros(n)
    c = b.copy()
    lam = float(np.max(np.abs(c))) if n else 0.0
    coefs = [beta.copy()]
    lambdas = [lam]
    active_rows = [np.zeros(n, dtype=bool)]
    if lam == 0.0:
        return np.array(coefs), np.array(lambdas), np.array(active_rows), COMPLETE

    is_active = np.zeros(n, dtype=bool)
    order = []
    for j in range(n):
        if abs(c[j]) >= lam * (1.0 - _TIE_RTOL):
            order.append(j)
            is_active[j] = True
    active_rows[0] = is_active.copy()
    jittered = False
    just_dropped = -1
    status = COMPLETE

    while True:
        if len(coefs) >= max_knots:
            status = MAX_KNOTS
            break
        idx = np.array(order)
        signs = np.sign(c[idx])
        G = S[np.ix_(idx, idx)]
        try:
            d = _chol_solve(G, signs)
        except np.linalg.LinAlgError:
            if jittered:
                status = NOT_PD
                break
            S = S + (1e-10 * np.trace(S) / n) * np.eye(n)
            c = b - S @ beta
            jittered = True
            continue
        a = S[:, idx] @ d

        gamma = lam
        enter = []
        drop = []
        for j in range(n):
            if is_active[j]:
                continue
            for br, (num, den) in enumerate(((lam - c[j], 1.0 - a[j]), (lam + c[j], 1.0 + a[j]))):
                if den <= 0.0:
                    continue
                # a dropped variable sits on the boundary it just left
                if j == just_dropped and br == (0 if c[j] > 0 else 1):
                    continue
                g = num / den
                if g <= _GAMMA_EPS:
                    continue
                if g < gamma * (1.0 - _TIE_RTOL):
                    gamma, enter, drop = g, [j], []
                elif g <= gamma * (1.0 + _TIE_RTOL) and j not in enter:
                    enter.append(j)
        for pos, j in enumerate(order):
            if d[pos] == 0.0 or beta[j] == 0.0:
                continue
            g = -beta[j] / d[pos]
            if g <= _GAMMA_EPS:
                continue
            if g < gamma * (1.0 - _TIE_RTOL):
                gamma, enter, drop = g, [], [j]
            elif g <= gamma * (1.0 + _TIE_RTOL):
                drop.append(j)

        beta[idx] += gamma * d
        lam -= gamma
        just_dropped = -1
        for j in drop:
            beta[j] = 0.0
            is_active[j] = False
            order.remove(j)
            just_dropped = j
        reached_end = not enter and not drop
        for j in sorted(enter):
            is_active[j] = True
            order.append(j)
        if reached_end or lam <= 0.0:
            lam = 0.0
        c = b - S @ beta
        coefs.append(beta.copy())
        lambdas.append(float(np.max(np.abs(c))))
        active_rows.append(is_active.copy())
        if lam == 0.0:
            status = COMPLETE
            break
        if np.sum(np.abs(beta)) >= l1_stop:
            status = BUDGET_REACHED
            break
    return np.array(coefs), np.array(lambdas), np.array(active_rows), status
