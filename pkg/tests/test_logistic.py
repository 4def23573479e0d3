import numpy as np
import pytest

from covblock.datatypes import Coefficients, Covariates, Labels, SoftLabels, permute_coefficients
from covblock.logistic import fit_multilogistic, one_hot, predict_probs, wald_test

from conftest import random_instance


def test_uniform_responsibilities_give_zero_beta(rng):
    X = Covariates(rng.standard_normal((30, 3)))
    q = SoftLabels(np.full((30, 2), 0.5))
    fit = fit_multilogistic(X, q)
    assert fit.converged
    assert np.allclose(fit.beta.beta, 0.0, atol=1e-8)


def test_intercept_only_log_odds():
    X = Covariates(np.ones((4, 1)))
    fit = fit_multilogistic(X, Labels(np.array([1, 1, 1, 2]), 2))
    assert fit.beta.beta[0, 0] == pytest.approx(np.log(3), abs=1e-8)


def test_predict_probs_zero_beta():
    beta = Coefficients(np.zeros((3, 2)))
    X = Covariates(np.random.default_rng(0).standard_normal((10, 2)))
    probs = predict_probs(beta, X)
    assert np.allclose(probs, 1 / 3)


def test_predict_probs_analytic():
    beta = Coefficients(np.array([[np.log(3.0)], [0.0]]))
    probs = predict_probs(beta, Covariates(np.array([[1.0]])))
    assert np.allclose(probs, [[0.75, 0.25]])


def test_predict_probs_overflow_safe():
    beta = Coefficients(np.array([[1e4], [0.0]]))
    probs = predict_probs(beta, Covariates(np.array([[1.0], [-1.0]])))
    assert np.all(np.isfinite(probs))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_row_sums(rng):
    beta = Coefficients(np.vstack([rng.standard_normal((2, 3)), np.zeros(3)]))
    probs = predict_probs(beta, Covariates(rng.standard_normal((50, 3))))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_gradient_matches_finite_differences(rng):
    """Analytic gradient of the fit objective vs central differences."""
    n, K, p = 25, 3, 2
    X = rng.standard_normal((n, p))
    q = rng.dirichlet(np.ones(K), size=n)
    theta = rng.standard_normal((K - 1) * p) * 0.5

    def obj(th):
        b = np.vstack([th.reshape(K - 1, p), np.zeros(p)])
        scores = X @ b.T
        lse = np.log(np.exp(scores - scores.max(axis=1, keepdims=True)).sum(axis=1))
        lse += scores.max(axis=1)
        return np.sum(q * scores) - np.sum(lse)

    b = np.vstack([theta.reshape(K - 1, p), np.zeros(p)])
    P = predict_probs(Coefficients(b), Covariates(X))
    grad = ((q - P)[:, :-1].T @ X).ravel()
    h = 1e-5
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        fd = (obj(theta + e) - obj(theta - e)) / (2 * h)
        assert grad[j] == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_hard_equals_onehot_soft(rng):
    g, X, c = random_instance(rng, 40, K=3, p=2)
    hard = fit_multilogistic(X, c)
    soft = fit_multilogistic(X, one_hot(c))
    assert np.allclose(hard.beta.beta, soft.beta.beta, atol=1e-10)


def test_fit_equivariance(rng):
    """Permuting classes in q transforms beta consistently with permute_coefficients."""
    n, K, p = 60, 3, 2
    X = Covariates(rng.standard_normal((n, p)))
    q = rng.dirichlet(np.ones(K), size=n)
    sigma = np.array([3, 1, 2])
    fit = fit_multilogistic(X, SoftLabels(q))
    # q relabeled by sigma^-1: new column k holds old column sigma(k)
    q_perm = q[:, sigma - 1]
    fit_perm = fit_multilogistic(X, SoftLabels(q_perm))
    expected = permute_coefficients(fit.beta, sigma)
    p1 = predict_probs(fit_perm.beta, X)
    p2 = predict_probs(expected, X)
    assert np.allclose(p1, p2, atol=1e-6)


def test_separation_triggers_ridge():
    X = Covariates(np.array([[1.0], [2.0], [-1.0], [-2.0]]))
    fit = fit_multilogistic(X, Labels(np.array([1, 1, 2, 2]), 2))
    assert fit.ridged or fit.converged  # either flagged or cleanly stopped
    assert np.all(np.isfinite(fit.beta.beta))


def test_wald_critical_value_and_null():
    X = Covariates(np.random.default_rng(1).standard_normal((200, 2)))
    q = SoftLabels(np.full((200, 2), 0.5))
    fit = fit_multilogistic(X, q)
    rows = wald_test(fit, 200, level=0.01)
    # beta-hat = 0 -> z = 0 everywhere, no rejection
    assert all(r.statistic == 0 and not r.reject for r in rows)


def test_wald_rejects_strong_signal(rng):
    from scipy.stats import norm

    assert norm.ppf(1 - 0.01 / 2) == pytest.approx(2.5758, abs=1e-4)
    n = 400
    X = rng.standard_normal((n, 2))
    beta_true = np.array([[2.0, 0.0], [0.0, 0.0]])
    probs = predict_probs(Coefficients(beta_true), Covariates(X))
    labels = 1 + (rng.random(n)[:, None] > probs.cumsum(axis=1)).sum(axis=1)
    fit = fit_multilogistic(Covariates(X), Labels(np.minimum(labels, 2), 2))
    rows = wald_test(fit, n, level=0.01)
    assert rows[0].reject  # strong first coefficient
    assert not rows[1].reject or abs(rows[1].statistic) < 4  # weak second


def test_objective_nondecreasing(rng):
    """Step-halving enforces ascent along Newton iterations."""
    from covblock.logistic import _objective

    n, K, p = 50, 3, 3
    X = Covariates(rng.standard_normal((n, p)))
    q = SoftLabels(rng.dirichlet(np.ones(K), size=n))
    fit = fit_multilogistic(X, q)
    assert fit.converged
    # final objective beats the zero start
    zero = _objective(np.zeros((K, p)), X.values, q.q)
    final = _objective(fit.beta.beta, X.values, q.q)
    assert final >= zero - 1e-12
