import numpy as np
import pytest

from statelp import exceptions as exc
from statelp.linalg import (
    cholesky_derivative,
    cholesky_lower,
    matrix_calculus_operators,
    ols,
    tsls,
    unvech_lower,
    vech,
    wls,
)


def random_spd(rng, n):
    M = rng.standard_normal((n, n))
    return M @ M.T + n * np.eye(n)


class TestOls:
    def test_identity_design(self):
        fit = ols(np.eye(3), [1.0, 2.0, 3.0])
        assert np.allclose(fit.coefficients, [1, 2, 3])
        assert fit.n_obs == 3

    def test_exact_fit_single_column(self):
        fit = ols(np.array([[1.0], [2.0], [3.0]]), [2.0, 4.0, 6.0])
        assert np.allclose(fit.coefficients, [2.0])
        assert np.allclose(fit.residuals, 0.0)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((50, 3))
        beta = np.array([1.5, -2.0, 0.3])
        y = X @ beta + 0.1 * rng.standard_normal(50)
        fit = ols(X, y)
        direct = np.linalg.solve(X.T @ X, X.T @ y)
        assert np.max(np.abs(fit.coefficients - direct)) < 1e-10

    def test_normal_equations_hold(self):
        rng = np.random.default_rng(1)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            X = rng.standard_normal((40, 4))
            y = rng.standard_normal(40)
            fit = ols(X, y)
            scale = np.max(np.abs(X))
            assert np.max(np.abs(X.T @ fit.residuals)) < 1e-8 * scale * len(y)

    def test_rank_deficient(self):
        X = np.ones((10, 2))
        with pytest.raises(exc.RankDeficient):
            ols(X, np.arange(10.0))

    def test_dimension_mismatch(self):
        with pytest.raises(exc.DimensionMismatch):
            ols(np.eye(3), np.arange(4.0))


class TestWls:
    def test_unit_weights_match_ols(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((30, 2))
        y = rng.standard_normal(30)
        assert np.allclose(
            wls(X, y, np.ones(30)).coefficients, ols(X, y).coefficients
        )

    def test_indicator_weights_match_subsample(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((60, 2))
        y = rng.standard_normal(60)
        w = (np.arange(60) < 40).astype(float)
        sub = ols(X[:40], y[:40])
        assert np.allclose(wls(X, y, w).coefficients, sub.coefficients)

    def test_matches_row_scaling(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((50, 3))
        y = rng.standard_normal(50)
        w = rng.random(50)
        exp = ols(X * np.sqrt(w)[:, None], y * np.sqrt(w))
        assert np.max(np.abs(wls(X, y, w).coefficients - exp.coefficients)) < 1e-12

    def test_all_zero_weights(self):
        with pytest.raises(exc.AllZeroWeights):
            wls(np.eye(3), np.ones(3), np.zeros(3))


class TestTsls:
    def test_exogenous_reduces_to_ols(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((200, 2))
        y = rng.standard_normal(200)
        assert np.max(np.abs(
            tsls(X, X, y).coefficients - ols(X, y).coefficients
        )) < 1e-12

    def test_scalar_exact(self):
        x = np.array([[1.0], [2.0], [-1.0]])
        assert np.allclose(tsls(x, x, (3 * x).ravel()).coefficients, [3.0])

    def test_matches_two_explicit_stages(self):
        rng = np.random.default_rng(6)
        n = 500
        z = rng.standard_normal(n)
        u = rng.standard_normal(n)
        x = 0.8 * z + 0.6 * u + 0.2 * rng.standard_normal(n)
        y = 2.0 * x + u
        Z, X = z[:, None], x[:, None]
        fit = tsls(Z, X, y)
        first = ols(Z, x)
        xhat = x - first.residuals
        second = ols(xhat[:, None], y)
        assert np.max(np.abs(fit.coefficients - second.coefficients)) < 1e-10

    def test_residuals_orthogonal_to_instruments(self):
        rng = np.random.default_rng(7)
        n = 300
        z = rng.standard_normal((n, 2))
        x = z @ np.array([[1.0, 0.2], [0.1, 0.9]]) + 0.5 * rng.standard_normal((n, 2))
        y = x @ np.array([1.0, -1.0]) + rng.standard_normal(n)
        fit = tsls(z, x, y)
        assert np.max(np.abs(z.T @ fit.residuals)) < 1e-8 * n

    def test_singular_cross_moment(self):
        z = np.ones((10, 1))
        x = np.zeros((10, 1))
        with pytest.raises(exc.SingularCrossMoment):
            tsls(z, x, np.ones(10))


class TestCholesky:
    def test_identity(self):
        assert np.allclose(cholesky_lower(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        assert np.allclose(cholesky_lower(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_reconstruction(self):
        sigma = np.array([[2.0, 1.0], [1.0, 2.0]])
        L = cholesky_lower(sigma)
        assert np.max(np.abs(L @ L.T - sigma)) < 1e-12
        assert np.allclose(np.triu(L, 1), 0.0)

    def test_reconstruction_random(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 7))
            sigma = random_spd(rng, n)
            L = cholesky_lower(sigma)
            assert np.max(np.abs(L @ L.T - sigma)) < 1e-10 * max(1, sigma.max())
            assert np.all(np.diag(L) > 0)

    def test_not_positive_definite(self):
        with pytest.raises(exc.NotPositiveDefinite):
            cholesky_lower(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(exc.NotPositiveDefinite):
            cholesky_lower(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestMatrixCalculusOperators:
    def test_order_one(self):
        ops = matrix_calculus_operators(1)
        for M in (ops.duplication, ops.elimination, ops.commutation):
            assert M.shape == (1, 1) and M[0, 0] == 1.0

    def test_order_two_duplication_rows(self):
        D = matrix_calculus_operators(2).duplication
        A = np.array([[1.0, 2.0], [2.0, 5.0]])
        # vech = (a11, a21, a22); vec selects (a11, a21, a21, a22)
        assert np.allclose(D @ np.array([1.0, 2.0, 5.0]), A.T.ravel())

    def test_identities_random(self):
        ops = matrix_calculus_operators(3)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            S = random_spd(rng, 3)
            B = rng.standard_normal((3, 3))
            vec = lambda M: M.reshape(-1, order="F")
            assert np.allclose(ops.duplication @ vech(S), vec(S))
            assert np.allclose(ops.elimination @ vec(B), vech(B))
            assert np.allclose(ops.commutation @ vec(B), vec(B.T))

    def test_vech_roundtrip(self):
        rng = np.random.default_rng(11)
        L = np.tril(rng.standard_normal((4, 4)))
        assert np.allclose(unvech_lower(vech(L), 4), L)


class TestCholeskyDerivative:
    def test_scalar_chain_rule(self):
        # d sqrt(sigma) = d_sigma / (2 sqrt(sigma))
        out = cholesky_derivative(np.array([[4.0]]), np.array([[1.0]]))
        assert np.allclose(out, [[0.25]])

    def test_zero_direction(self):
        rng = np.random.default_rng(12)
        sigma = random_spd(rng, 3)
        assert np.allclose(cholesky_derivative(sigma, np.zeros((3, 3))), 0.0)

    def test_matches_finite_difference(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 5))
            sigma = random_spd(rng, n)
            direction = rng.standard_normal((n, n))
            direction = (direction + direction.T) / 2
            deriv = cholesky_derivative(sigma, direction)
            eps = 1e-6
            fd = (
                np.linalg.cholesky(sigma + eps * direction)
                - np.linalg.cholesky(sigma - eps * direction)
            ) / (2 * eps)
            assert np.max(np.abs(deriv - fd)) < 1e-6
