# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gram-driven LARS-lasso path kernel.

Same algorithm and status codes as ``_lars_py.lars_gram``; the active-set
Cholesky factor is recomputed at every knot.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef double GAMMA_EPS = 1e-14
cdef double TIE_RTOL = 1e-12

cdef int COMPLETE = 0
cdef int MAX_KNOTS = 1
cdef int BUDGET_REACHED = 2
cdef int NOT_PD = 3


cdef int _cholesky(double[:, ::1] G, int m) noexcept nogil:
    """In-place lower Cholesky of the leading m x m block; 0 on success."""
    cdef int i, j, q
    cdef double s
    for j in range(m):
        s = G[j, j]
        for q in range(j):
            s -= G[j, q] * G[j, q]
        if s <= 0.0:
            return 1
        G[j, j] = sqrt(s)
        for i in range(j + 1, m):
            s = G[i, j]
            for q in range(j):
                s -= G[i, q] * G[j, q]
            G[i, j] = s / G[j, j]
    return 0


cdef void _chol_solve(double[:, ::1] L, int m, double[::1] x) noexcept nogil:
    cdef int i, q
    cdef double s
    for i in range(m):
        s = x[i]
        for q in range(i):
            s -= L[i, q] * x[q]
        x[i] = s / L[i, i]
    for i in range(m - 1, -1, -1):
        s = x[i]
        for q in range(i + 1, m):
            s -= L[q, i] * x[q]
        x[i] = s / L[i, i]


cdef inline double _sign(double v) noexcept nogil:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


def lars_gram(S_in, b_in, int max_knots, double l1_stop=np.inf):
    cdef double[:, ::1] S = np.array(S_in, dtype=np.float64, order="C", copy=True)
    cdef double[::1] b = np.array(b_in, dtype=np.float64, copy=True)
    cdef int n = b.shape[0]
    cdef double[::1] beta = np.zeros(n)
    cdef double[::1] c = np.zeros(n)
    cdef double[::1] d = np.zeros(n)
    cdef double[::1] a = np.zeros(n)
    cdef double[:, ::1] G = np.zeros((max(n, 1), max(n, 1)))
    cdef int[::1] order = np.zeros(max(n, 1), dtype=np.intc)
    cdef int[::1] is_active = np.zeros(max(n, 1), dtype=np.intc)
    cdef int[::1] enter = np.zeros(max(n, 1), dtype=np.intc)
    cdef int[::1] drop = np.zeros(max(n, 1), dtype=np.intc)
    cdef int n_active = 0, n_enter = 0, n_drop = 0
    cdef int i, j, q, pos, br, found, jittered = 0, just_dropped = -1, status = COMPLETE
    cdef int reached_end
    cdef double lam = 0.0, gamma, g, num, den, s, jit, l1

    for j in range(n):
        c[j] = b[j]
        if fabs(c[j]) > lam:
            lam = fabs(c[j])

    coefs = [np.zeros(n)]
    lambdas = [lam]
    active_rows = [np.zeros(n, dtype=bool)]
    if lam == 0.0:
        return np.array(coefs), np.array(lambdas), np.array(active_rows), COMPLETE

    for j in range(n):
        if fabs(c[j]) >= lam * (1.0 - TIE_RTOL):
            order[n_active] = j
            n_active += 1
            is_active[j] = 1
    active_rows[0] = np.asarray(is_active)[:n].astype(bool)

    while True:
        if len(coefs) >= max_knots:
            status = MAX_KNOTS
            break
        for i in range(n_active):
            for q in range(n_active):
                G[i, q] = S[order[i], order[q]]
            d[i] = _sign(c[order[i]])
        if _cholesky(G, n_active) != 0:
            if jittered:
                status = NOT_PD
                break
            s = 0.0
            for j in range(n):
                s += S[j, j]
            jit = 1e-10 * s / n
            for j in range(n):
                S[j, j] += jit
            for j in range(n):
                s = b[j]
                for q in range(n):
                    s -= S[j, q] * beta[q]
                c[j] = s
            jittered = 1
            continue
        _chol_solve(G, n_active, d)
        for j in range(n):
            s = 0.0
            for i in range(n_active):
                s += S[j, order[i]] * d[i]
            a[j] = s

        gamma = lam
        n_enter = 0
        n_drop = 0
        for j in range(n):
            if is_active[j]:
                continue
            for br in range(2):
                # a dropped variable sits on the boundary it just left
                if j == just_dropped and br == (0 if c[j] > 0.0 else 1):
                    continue
                if br == 0:
                    num = lam - c[j]
                    den = 1.0 - a[j]
                else:
                    num = lam + c[j]
                    den = 1.0 + a[j]
                if den <= 0.0:
                    continue
                g = num / den
                if g <= GAMMA_EPS:
                    continue
                if g < gamma * (1.0 - TIE_RTOL):
                    gamma = g
                    enter[0] = j
                    n_enter = 1
                    n_drop = 0
                elif g <= gamma * (1.0 + TIE_RTOL):
                    found = 0
                    for i in range(n_enter):
                        if enter[i] == j:
                            found = 1
                    if not found:
                        enter[n_enter] = j
                        n_enter += 1
        for pos in range(n_active):
            j = order[pos]
            if d[pos] == 0.0 or beta[j] == 0.0:
                continue
            g = -beta[j] / d[pos]
            if g <= GAMMA_EPS:
                continue
            if g < gamma * (1.0 - TIE_RTOL):
                gamma = g
                n_enter = 0
                drop[0] = j
                n_drop = 1
            elif g <= gamma * (1.0 + TIE_RTOL):
                drop[n_drop] = j
                n_drop += 1

        for pos in range(n_active):
            beta[order[pos]] += gamma * d[pos]
        lam -= gamma
        just_dropped = -1
        for i in range(n_drop):
            j = drop[i]
            beta[j] = 0.0
            is_active[j] = 0
            for pos in range(n_active):
                if order[pos] == j:
                    for q in range(pos, n_active - 1):
                        order[q] = order[q + 1]
                    break
            n_active -= 1
            just_dropped = j
        reached_end = n_enter == 0 and n_drop == 0
        # entries in ascending index order
        for i in range(1, n_enter):
            j = enter[i]
            q = i - 1
            while q >= 0 and enter[q] > j:
                enter[q + 1] = enter[q]
                q -= 1
            enter[q + 1] = j
        for i in range(n_enter):
            j = enter[i]
            is_active[j] = 1
            order[n_active] = j
            n_active += 1
        if reached_end or lam <= 0.0:
            lam = 0.0
        l1 = 0.0
        s = 0.0
        for j in range(n):
            num = b[j]
            for q in range(n):
                num -= S[j, q] * beta[q]
            c[j] = num
            if fabs(num) > s:
                s = fabs(num)
            l1 += fabs(beta[j])
        coefs.append(np.asarray(beta).copy())
        lambdas.append(s)
        active_rows.append(np.asarray(is_active)[:n].astype(bool))
        if lam == 0.0:
            status = COMPLETE
            break
        if l1 >= l1_stop:
            status = BUDGET_REACHED
            break
    return np.array(coefs), np.array(lambdas), np.array(active_rows), status
