import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from sparse_lingam.exceptions import DegenerateRowError, SingularMatrixError
from sparse_lingam.ica import (
    SUB_GAUSSIAN,
    SUPER_GAUSSIAN,
    NonidentifiableComponentWarning,
    grad_negloglik,
    log_likelihood,
    natural_gradient,
    row_normalize,
    score_function,
    select_density,
    tangent_project,
)
from helpers import augmented_lagrangian_oracle, central_diff, random_instance


class TestScoreFunction:
    def test_super_at_zero(self):
        assert score_function(0.0, SUPER_GAUSSIAN)[0] == 0.0

    def test_super_at_one(self):
        g, _ = score_function(1.0, SUPER_GAUSSIAN)
        assert g == pytest.approx(-1.5232, abs=1e-4)

    def test_sub_at_zero(self):
        assert score_function(0.0, SUB_GAUSSIAN) == (0.0, 0.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            score_function(0.0, "gaussian")

    @pytest.mark.parametrize("kind", [SUPER_GAUSSIAN, SUB_GAUSSIAN])
    def test_derivative_matches_finite_difference(self, kind):
        s = np.linspace(-5, 5, 2001)
        h = 1e-5
        fd = (score_function(s + h, kind)[0] - score_function(s - h, kind)[0]) / (2 * h)
        assert np.max(np.abs(fd - score_function(s, kind)[1])) < 1e-6

    @pytest.mark.parametrize("kind", [SUPER_GAUSSIAN, SUB_GAUSSIAN])
    def test_score_is_derivative_of_log_density(self, kind):
        s = np.linspace(-4, 4, 81)
        h = 1e-6

        def logp(x):
            return log_likelihood(np.eye(1), x.reshape(-1, 1), [kind]) * x.size

        fd = np.array([(logp(np.array([x + h])) - logp(np.array([x - h]))) / (2 * h) for x in s])
        np.testing.assert_allclose(fd, score_function(s, kind)[0], atol=1e-6)


class TestSelectDensity:
    def test_laplace(self):
        x = np.random.default_rng(0).laplace(scale=1 / np.sqrt(2), size=10_000)
        assert select_density(x) == SUPER_GAUSSIAN

    def test_uniform(self):
        x = np.random.default_rng(0).uniform(-np.sqrt(3), np.sqrt(3), size=10_000)
        assert select_density(x) == SUB_GAUSSIAN

    def test_gaussian_is_flagged(self):
        x = np.random.default_rng(0).normal(size=10_000)
        with pytest.warns(NonidentifiableComponentWarning):
            select_density(x)

    def test_repeated_trials(self):
        lap = uni = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonidentifiableComponentWarning)
            for seed in range(100):
                rng = np.random.default_rng(seed)
                lap += select_density(rng.laplace(scale=1 / np.sqrt(2), size=10_000)) == SUPER_GAUSSIAN
                uni += select_density(rng.uniform(-np.sqrt(3), np.sqrt(3), 10_000)) == SUB_GAUSSIAN
        assert lap >= 99 and uni >= 99


def _naive_loglik(W, Z, kinds):
    total = 0.0
    n, d = Z.shape
    for i in range(n):
        for j in range(d):
            y = sum(W[j, k] * Z[i, k] for k in range(d))
            lc = np.log(np.cosh(y))
            total += -2 * lc if kinds[j] == SUPER_GAUSSIAN else -(y * y / 2 - lc)
    return total / n + np.log(abs(np.linalg.det(W)))


class TestLogLikelihood:
    def test_single_zero_sample(self):
        assert log_likelihood(np.eye(1), np.zeros((1, 1)), [SUPER_GAUSSIAN]) == 0.0

    def test_orthogonal_has_no_det_term(self):
        rng = np.random.default_rng(0)
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        Z = rng.normal(size=(20, 3))
        ll = log_likelihood(Q, Z, [SUPER_GAUSSIAN] * 3)
        Y = Z @ Q.T
        assert ll == pytest.approx(np.sum(-2 * np.log(np.cosh(Y))) / 20, abs=1e-12)

    def test_matches_naive_sum(self):
        rng = np.random.default_rng(1)
        W, Z = rng.normal(size=(3, 3)), rng.normal(size=(50, 3))
        kinds = [SUPER_GAUSSIAN, SUB_GAUSSIAN, SUPER_GAUSSIAN]
        assert log_likelihood(W, Z, kinds) == pytest.approx(_naive_loglik(W, Z, kinds), abs=1e-12)

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            log_likelihood(np.ones((2, 2)), np.zeros((3, 2)), [SUPER_GAUSSIAN] * 2)

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(2)
        W, Z = rng.normal(size=(4, 4)), rng.normal(size=(30, 4))
        kinds = np.array([SUPER_GAUSSIAN, SUB_GAUSSIAN, SUB_GAUSSIAN, SUPER_GAUSSIAN])
        perm = [2, 0, 3, 1]
        assert log_likelihood(W[perm], Z, kinds[perm]) == pytest.approx(
            log_likelihood(W, Z, kinds), abs=1e-12
        )


class TestGradNegloglik:
    def test_scalar_case(self):
        g = grad_negloglik(np.eye(1), np.zeros((5, 1)), [SUPER_GAUSSIAN])
        assert g[0, 0] == -1.0

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_finite_differences(self, d):
        for seed in range(5):
            W, Z, kinds = random_instance(d, 200, seed)
            fd = central_diff(lambda V: -log_likelihood(V, Z, kinds), W)
            g = grad_negloglik(W, Z, kinds)
            assert np.linalg.norm(fd - g) / np.linalg.norm(g) < 1e-5

    def test_vanishes_at_local_maximum(self):
        rng = np.random.default_rng(3)
        Z = rng.laplace(size=(500, 2)) @ np.array([[1.0, 0.4], [0.2, 1.0]])
        kinds = [SUPER_GAUSSIAN] * 2
        res = minimize(
            lambda w: -log_likelihood(w.reshape(2, 2), Z, kinds),
            np.eye(2).ravel(),
            jac=lambda w: grad_negloglik(w.reshape(2, 2), Z, kinds).ravel(),
            method="BFGS",
            options={"gtol": 1e-10, "maxiter": 1000},
        )
        assert np.linalg.norm(grad_negloglik(res.x.reshape(2, 2), Z, kinds)) < 1e-6


class TestNaturalGradient:
    def test_term_isolation(self):
        W, Z, kinds = random_instance(3, 100, 0)
        rng = np.random.default_rng(0)
        A, M, P = rng.normal(size=(3, 3, 3))
        ng = natural_gradient(W, Z, kinds, P, M, np.zeros((3, 3)), A, lam=0.0, alpha=0.0, rho=0.0)
        np.testing.assert_allclose(ng, grad_negloglik(W, Z, kinds) @ W.T @ W, atol=1e-10)

    def test_orthogonality_term_vanishes_at_P(self):
        W, Z, kinds = random_instance(3, 100, 1)
        rng = np.random.default_rng(1)
        A, M, U = rng.normal(size=(3, 3, 3))
        args = (W, Z, kinds, W.copy(), M, U, A)
        with_orth = natural_gradient(*args, lam=5.0, alpha=0.2, rho=1.0)
        without = natural_gradient(*args, lam=0.0, alpha=0.2, rho=1.0)
        np.testing.assert_allclose(with_orth, without, atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_euclidean_gradient_times_metric(self, seed):
        W, Z, kinds = random_instance(3, 100, seed)
        rng = np.random.default_rng(100 + seed)
        A, M, U = rng.normal(size=(3, 3, 3))
        P, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        lam, alpha, rho = 0.7, 0.3, 1.5
        C = np.ones((3, 3))
        fd = central_diff(
            lambda V: augmented_lagrangian_oracle(V, M, U, P, Z, A, kinds, C, lam, alpha, rho), W
        )
        ng = natural_gradient(W, Z, kinds, P, M, U, A, lam, alpha, rho)
        expected = fd @ W.T @ W
        assert np.linalg.norm(ng - expected) / np.linalg.norm(expected) < 1e-5


class TestTangentProject:
    def test_parallel_delta(self):
        W = row_normalize(np.random.default_rng(0).normal(size=(3, 3)))
        np.testing.assert_allclose(tangent_project(W, W), 0.0, atol=1e-15)

    def test_orthogonal_rows_unchanged(self):
        W = np.eye(3)
        delta = np.array([[0.0, 1.0, 2.0], [3.0, 0.0, 4.0], [5.0, 6.0, 0.0]])
        np.testing.assert_array_equal(tangent_project(W, delta), delta)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 6))
    def test_diagonal_vanishes(self, seed, d):
        rng = np.random.default_rng(seed)
        W = row_normalize(rng.normal(size=(d, d)))
        out = tangent_project(W, rng.normal(size=(d, d)) * 10)
        assert np.max(np.abs(np.diag(W @ out.T))) < 1e-12


class TestRowNormalize:
    def test_three_four(self):
        np.testing.assert_allclose(row_normalize(np.array([[3.0, 4.0], [0.0, 2.0]])),
                                   [[0.6, 0.8], [0.0, 1.0]])

    def test_idempotent(self):
        W = row_normalize(np.random.default_rng(0).normal(size=(4, 4)))
        np.testing.assert_allclose(row_normalize(W), W, atol=1e-15)

    def test_zero_row(self):
        with pytest.raises(DegenerateRowError):
            row_normalize(np.array([[1.0, 0.0], [0.0, 0.0]]))
