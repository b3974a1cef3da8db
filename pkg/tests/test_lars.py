import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netinf.errors import DimensionError, IllPosedProblemError
from netinf.lars import QuadProblem, coefs_at_budget, lars_path, lasso_row, max_quadratic_l1
from oracles import (kkt_violation, lars_data_matrix, lasso_cd, projected_gradient_quadratic,
                     random_pd, soft_threshold)


def test_orthogonal_design_path():
    prob = QuadProblem(np.eye(3), [3.0, 2.0, 1.0])
    path = lars_path(prob)
    assert path.complete
    assert [path.active_set(m) for m in range(path.n_knots)] == [(0,), (0, 1), (0, 1, 2), (0, 1, 2)]
    np.testing.assert_allclose(path.final, [3, 2, 1], atol=1e-14)
    np.testing.assert_allclose(path.lambdas, [3, 2, 1, 0], atol=1e-14)
    # lambda = 1.5 corresponds to L1 budget 1.5 + 0.5
    x = coefs_at_budget(path, 2.0)
    np.testing.assert_allclose(x, soft_threshold(np.array([3.0, 2.0, 1.0]), 1.5), atol=1e-14)
    np.testing.assert_allclose(x, [1.5, 0.5, 0.0], atol=1e-14)


def test_one_dimensional():
    prob = QuadProblem([[2.0]], [4.0])
    path = lars_path(prob)
    assert path.n_knots == 2
    np.testing.assert_allclose(path.final, [2.0])
    x = max_quadratic_l1(prob, 1.0)
    np.testing.assert_allclose(x, [1.0])
    assert prob.objective(x) == pytest.approx(6.0)


def test_zero_correlations():
    path = lars_path(QuadProblem(np.eye(4), np.zeros(4)))
    assert path.n_knots == 1 and path.complete
    assert np.all(path.final == 0)
    assert path.l1_norms[0] == 0


def test_budget_extraction_examples():
    prob = QuadProblem(np.eye(2), [3.0, 1.0])
    path = lars_path(prob)
    np.testing.assert_allclose(path.l1_norms, [0, 2, 4], atol=1e-14)
    x = coefs_at_budget(path, 2.5)
    np.testing.assert_allclose(x, [2.25, 0.25], atol=1e-14)
    # soft threshold at the lambda solving (3 - lam) + (1 - lam) = 2.5
    np.testing.assert_allclose(x, soft_threshold(np.array([3.0, 1.0]), 0.75), atol=1e-14)
    assert np.all(coefs_at_budget(path, 0.0) == 0)


def test_budget_beyond_saturation(rng):
    S = random_pd(rng, 5)
    b = rng.standard_normal(5)
    full = np.linalg.solve(S, b)
    path = lars_path(QuadProblem(S, b))
    x = coefs_at_budget(path, np.abs(full).sum() * 1.5)
    np.testing.assert_allclose(x, full, atol=1e-8)
    with pytest.raises(ValueError):
        coefs_at_budget(path, -1.0)


def test_max_quadratic_zero_budget(rng):
    prob = QuadProblem(random_pd(rng, 3), rng.standard_normal(3))
    x = max_quadratic_l1(prob, 0.0)
    assert np.all(x == 0) and prob.objective(x) == 0


def test_max_quadratic_matches_projected_gradient(rng):
    for _ in range(3):
        S = random_pd(rng, 5, cond_floor=0.3)
        b = rng.standard_normal(5)
        s = 0.7 * np.abs(np.linalg.solve(S, b)).sum()
        prob = QuadProblem(S, b)
        x = max_quadratic_l1(prob, s)
        ref = projected_gradient_quadratic(S, b, s, iters=100000)
        assert prob.objective(x) == pytest.approx(prob.objective(ref), abs=1e-6)
        assert prob.objective(x) >= prob.objective(ref) - 1e-9


def test_path_invariants(rng):
    for _ in range(50):
        n = int(rng.integers(1, 9))
        S, b = random_pd(rng, n), rng.standard_normal(n)
        path = lars_path(QuadProblem(S, b))
        assert path.complete
        assert np.all(path.coefs[0] == 0) and path.l1_norms[0] == 0
        assert np.all(np.diff(path.l1_norms) > 0)
        assert np.all(np.diff(path.lambdas) <= 1e-10)
        for m in range(path.n_knots):
            c = b - S @ path.coefs[m]
            lam = path.lambdas[m]
            act = path.active[m]
            # the last knot is the unconstrained optimum, where every correlation vanishes
            if m < path.n_knots - 1:
                assert np.all(np.abs(np.abs(c[act]) - lam) <= 1e-8)
            assert np.all(np.abs(c) <= lam + 1e-8)
        obj = [2 * b @ x - x @ S @ x for x in path.coefs]
        assert np.all(np.diff(obj) >= -1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6), st.floats(0.0, 1.2))
def test_kkt_holds_at_any_budget(n, seed, frac):
    rng = np.random.default_rng(seed)
    S, b = random_pd(rng, n), rng.standard_normal(n)
    s = frac * np.abs(np.linalg.solve(S, b)).sum()
    x = max_quadratic_l1(QuadProblem(S, b), s)
    problems, _ = kkt_violation(S, b, x, s, tol=1e-6)
    assert not problems
    assert np.abs(x).sum() <= s + 1e-10


def test_matches_coordinate_descent(rng):
    for _ in range(20):
        n = int(rng.integers(1, 9))
        S, b = random_pd(rng, n), rng.standard_normal(n)
        sat = np.abs(np.linalg.solve(S, b)).sum()
        for frac in (0.1, 0.3, 0.5, 0.8, 0.95):
            x = max_quadratic_l1(QuadProblem(S, b), frac * sat)
            _, lam = kkt_violation(S, b, x, frac * sat)
            np.testing.assert_allclose(x, lasso_cd(S, b, lam), atol=1e-6)


def test_shrinkage_monotone_in_budget(rng):
    S, b = random_pd(rng, 6), rng.standard_normal(6)
    path = lars_path(QuadProblem(S, b))
    budgets = np.linspace(0, path.l1_norms[-1], 25)
    norms = [np.abs(coefs_at_budget(path, s)).sum() for s in budgets]
    assert np.all(np.diff(norms) >= 0)
    np.testing.assert_allclose(norms, budgets, atol=1e-10)


def test_scale_coherence_with_data_matrix_lars(rng):
    for _ in range(10):
        n = int(rng.integers(1, 7))
        S, b = random_pd(rng, n), rng.standard_normal(n)
        C = np.linalg.cholesky(S).T
        yhat = C @ np.linalg.solve(S, b)
        knots = lars_data_matrix(C, yhat)
        path = lars_path(QuadProblem(S, b))
        assert len(knots) == path.n_knots
        np.testing.assert_allclose(np.array(knots), path.coefs, atol=1e-8)


def test_truncated_path_flagged(rng):
    S, b = random_pd(rng, 6), rng.standard_normal(6)
    path = lars_path(QuadProblem(S, b), max_knots=2)
    assert not path.complete
    assert path.n_knots == 2


def test_degenerate_gram_jitter_and_error():
    # rank-one Gram with correlated b: a second variable can never usefully enter
    S = np.array([[1.0, 1.0], [1.0, 1.0]])
    path = lars_path(QuadProblem(S, [1.0, 1.0 - 1e-3]))
    assert np.all(np.isfinite(path.coefs))
    with pytest.raises(IllPosedProblemError):
        lars_path(QuadProblem(-np.eye(2), [1.0, 1.0]))


def test_problem_validation():
    with pytest.raises(DimensionError):
        QuadProblem(np.eye(3), np.ones(2))
    with pytest.raises(IllPosedProblemError):
        QuadProblem([[1.0, 2.0], [0.0, 1.0]], [1.0, 1.0])


def test_lasso_row_modes(rng):
    S, b = random_pd(rng, 4), rng.standard_normal(4)
    sat = np.abs(np.linalg.solve(S, b)).sum()
    x, s = lasso_row(S, b, fraction=0.5)
    assert s == pytest.approx(sat)
    assert np.abs(x).sum() == pytest.approx(0.5 * sat, abs=1e-10)
    y, _ = lasso_row(S, b, budget=0.5 * sat)
    np.testing.assert_allclose(x, y, atol=1e-12)
    z, _ = lasso_row(S, b, fraction=0.0)
    assert np.all(z == 0)
