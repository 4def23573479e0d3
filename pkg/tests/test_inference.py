import numpy as np
import pytest

from covblock.datatypes import (
    BlockMatrix,
    Coefficients,
    Covariates,
    Graph,
    Labels,
    SoftLabels,
    apply_permutation,
    inverse_permutation,
    permute_coefficients,
)
from covblock.inference import (
    FitOptions,
    bruteforce_marginal_loglik,
    bruteforce_profile_argmax,
    elbo,
    labels_from_soft,
    mpl_fit,
    profile_objective,
    random_hard_labels,
    soft_from_labels,
    vem_fit,
)
from covblock.logistic import one_hot, predict_probs
from covblock.metrics import nmi

from conftest import random_instance


def tiny_edge():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    return Graph(A), Covariates(np.zeros((2, 1)))


class TestElbo:
    def test_hand_value(self):
        g, X = tiny_edge()
        q = SoftLabels(np.full((2, 2), 0.5))
        B = BlockMatrix(np.full((2, 2), 0.3))
        beta = Coefficients(np.zeros((2, 1)))
        assert elbo(g, X, q, beta, B) == pytest.approx(np.log(0.3), abs=1e-10)

    def test_degenerate_q_equals_joint_loglik(self, rng):
        g, X, c = random_instance(rng, 6)
        B = BlockMatrix(np.array([[0.5, 0.2], [0.2, 0.5]]))
        beta = Coefficients(np.vstack([rng.standard_normal(2), np.zeros(2)]))
        q = one_hot(c)
        # direct joint likelihood at hard labels
        A = g.adjacency
        ll = 0.0
        for i in range(6):
            for j in range(i + 1, 6):
                b = B.B[c.assignments[i] - 1, c.assignments[j] - 1]
                ll += A[i, j] * np.log(b) + (1 - A[i, j]) * np.log(1 - b)
        probs = predict_probs(beta, X)
        ll += float(np.log(probs[np.arange(6), c.assignments - 1]).sum())
        assert elbo(g, X, q, beta, B) == pytest.approx(ll, abs=1e-10)

    def test_jensen_gap(self, rng):
        for _ in range(5):
            g, X, _ = random_instance(rng, 6)
            q = SoftLabels(rng.dirichlet(np.ones(2), size=6))
            B = BlockMatrix(np.array([[0.4, 0.1], [0.1, 0.4]]))
            beta = Coefficients(np.vstack([rng.standard_normal(2), np.zeros(2)]))
            assert bruteforce_marginal_loglik(g, X, beta, B) >= elbo(g, X, q, beta, B) - 1e-10

    def test_poisson_mode_rejected(self):
        g, X = tiny_edge()
        q = SoftLabels(np.full((2, 2), 0.5))
        with pytest.raises(ValueError):
            elbo(g, X, q, Coefficients(np.zeros((2, 1))), BlockMatrix(np.eye(2) + 0.1, "poisson"))


class TestProfileObjective:
    def test_hand_value(self):
        g, X = tiny_edge()
        c = Labels(np.array([1, 1]), 2)
        B = BlockMatrix(np.full((2, 2), 0.5), "poisson")
        beta = Coefficients(np.zeros((2, 1)))
        expected = np.log(0.5) - 0.5 - 2 * np.log(2)
        assert profile_objective(g, X, c, beta, B) == pytest.approx(expected, abs=1e-10)

    def test_empty_graph_linear_in_rate(self, rng):
        n = 6
        g = Graph(np.zeros((n, n)))
        X = Covariates(rng.standard_normal((n, 2)))
        c = Labels(np.ones(n, dtype=int) * 2, 2)
        beta = Coefficients(np.vstack([rng.standard_normal(2), np.zeros(2)]))
        eps = 0.01
        B = BlockMatrix(np.full((2, 2), eps), "poisson")
        cov_term = profile_objective(g, X, c, beta, BlockMatrix(np.full((2, 2), 1e-10), "poisson"))
        got = profile_objective(g, X, c, beta, B)
        assert got == pytest.approx(cov_term - 15 * eps, abs=1e-8)  # C(6,2) = 15

    def test_matches_direct_summation(self, rng):
        g, X, c = random_instance(rng, 10)
        beta = Coefficients(np.vstack([rng.standard_normal(2), np.zeros(2)]))
        B = BlockMatrix(np.array([[0.7, 0.2], [0.2, 0.6]]), "poisson")
        direct = 0.0
        A = g.adjacency
        for i in range(10):
            for j in range(i + 1, 10):
                b = B.B[c.assignments[i] - 1, c.assignments[j] - 1]
                direct += A[i, j] * np.log(b) - b
        scores = X.values @ beta.beta.T
        lse = np.log(np.exp(scores).sum(axis=1))
        direct += float((scores[np.arange(10), c.assignments - 1] - lse).sum())
        assert profile_objective(g, X, c, beta, B) == pytest.approx(direct, abs=1e-10)


class TestLabelsFromSoft:
    def test_one_hot(self):
        q = SoftLabels(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert labels_from_soft(q).assignments.tolist() == [1, 2]

    def test_tie_breaks_low(self):
        q = SoftLabels(np.array([[0.5, 0.5]]))
        assert labels_from_soft(q).assignments.tolist() == [1]

    def test_matches_row_scan(self, rng):
        q = SoftLabels(rng.dirichlet(np.ones(4), size=30))
        got = labels_from_soft(q).assignments
        want = [1 + int(np.argmax(row)) for row in q.q]
        assert got.tolist() == want


class TestVem:
    def test_truth_fixed_point_strong_signal(self, rng):
        n = 60
        labels = Labels(1 + (np.arange(n) % 2), 2)
        B = np.array([[0.5, 0.05], [0.05, 0.5]])
        probs = B[labels.assignments - 1][:, labels.assignments - 1]
        upper = np.triu(rng.random((n, n)) < probs, 1).astype(float)
        g = Graph(upper + upper.T)
        X = Covariates(rng.standard_normal((n, 4)) + (3 - 2 * labels.assignments)[:, None] * 0.5)
        res = vem_fit(g, X, one_hot(labels))
        assert nmi(labels, res.labels) == 1.0
        assert np.all(np.diff(res.elbo_trace) >= -1e-8)

    def test_uniform_init_valid_output(self, rng):
        g, X, _ = random_instance(rng, 20)
        res = vem_fit(g, X, SoftLabels(np.full((20, 2), 0.5)))
        assert res.q.q.shape == (20, 2)
        assert np.allclose(res.q.q.sum(axis=1), 1.0, atol=1e-12)

    def test_monotone_trace(self, rng):
        for _ in range(5):
            g, X, c = random_instance(rng, 30)
            res = vem_fit(g, X, soft_from_labels(c))
            assert np.all(np.diff(res.elbo_trace) >= -1e-8)

    def test_deterministic(self, rng):
        g, X, c = random_instance(rng, 25)
        q0 = soft_from_labels(c)
        r1 = vem_fit(g, X, q0)
        r2 = vem_fit(g, X, q0)
        assert np.array_equal(r1.q.q, r2.q.q)
        assert np.array_equal(r1.elbo_trace, r2.elbo_trace)

    def test_soft_from_labels_interior(self):
        labels = Labels(np.array([1, 2, 1]), 2)
        q = soft_from_labels(labels, tau=0.1)
        assert np.allclose(q.q.max(axis=1), 0.9)
        assert q.q.min() > 0


class TestMpl:
    def test_bruteforce_fixed_point(self, rng):
        g, X, _ = random_instance(rng, 8)
        c_star, beta_star, B_star, val = bruteforce_profile_argmax(g, X, 2)
        res = mpl_fit(g, X, c_star, FitOptions(logit_tol=1e-12))
        assert np.array_equal(res.labels.assignments, c_star.assignments)
        assert res.objective_trace[-1] == pytest.approx(val, abs=1e-9)

    def test_never_beats_bruteforce(self, rng):
        for _ in range(5):
            g, X, _ = random_instance(rng, 8)
            _, _, _, val = bruteforce_profile_argmax(g, X, 2)
            res = mpl_fit(g, X, random_hard_labels(8, 2, rng))
            assert res.objective_trace[-1] <= val + 1e-6

    def test_two_cliques_truth_fixed(self):
        size = 8
        n = 2 * size
        A = np.zeros((n, n))
        A[:size, :size] = 1
        A[size:, size:] = 1
        np.fill_diagonal(A, 0)
        truth = Labels(np.r_[np.ones(size, int), 2 * np.ones(size, int)], 2)
        res = mpl_fit(Graph(A), Covariates(np.zeros((n, 1))), truth)
        assert np.array_equal(res.labels.assignments, truth.assignments)

    def test_monotone_trace(self, rng):
        for _ in range(5):
            g, X, c = random_instance(rng, 30)
            res = mpl_fit(g, X, c)
            assert np.all(np.diff(res.objective_trace) >= -1e-8)

    def test_empty_community_flagged(self, rng):
        g, X, _ = random_instance(rng, 12)
        c0 = Labels(np.ones(12, dtype=int), 2)  # class 2 empty
        res = mpl_fit(g, X, c0)
        assert res.empty_block
        assert np.all(np.isfinite(res.objective_trace))

    def test_equivariance(self, rng):
        """Relabeling the initialization relabels the output and transforms beta."""
        g, X, c = random_instance(rng, 20)
        sigma = np.array([2, 1])
        r1 = mpl_fit(g, X, c)
        r2 = mpl_fit(g, X, apply_permutation(c, sigma))
        assert np.array_equal(r2.labels.assignments, apply_permutation(r1.labels, sigma).assignments)
        p1 = predict_probs(permute_coefficients(r1.beta, sigma), X)
        p2 = predict_probs(r2.beta, X)
        assert np.allclose(p1, p2, atol=1e-6)


class TestBruteforce:
    def test_two_node_merge(self):
        g, X = tiny_edge()
        c, beta, B, val = bruteforce_profile_argmax(g, X, 2)
        # one edge between the only two nodes: together beats split
        assert c.assignments[0] == c.assignments[1]

    def test_objective_permutation_invariant(self, rng):
        g, X, c = random_instance(rng, 6)
        beta = Coefficients(np.vstack([rng.standard_normal(2), np.zeros(2)]))
        B = BlockMatrix(np.array([[0.7, 0.2], [0.2, 0.6]]), "poisson")
        v1 = profile_objective(g, X, c, beta, B)
        sigma = np.array([2, 1])
        c2 = apply_permutation(c, sigma)
        beta2 = permute_coefficients(beta, inverse_permutation(sigma))
        B2 = BlockMatrix(B.B[np.ix_(sigma - 1, sigma - 1)], "poisson")
        v2 = profile_objective(g, X, c2, beta2, B2)
        assert v1 == pytest.approx(v2, abs=1e-9)

    def test_limit_enforced(self, rng):
        g, X, _ = random_instance(rng, 12)
        with pytest.raises(ValueError):
            bruteforce_profile_argmax(g, X, 2, limit=10)


class TestMarginal:
    def test_constant_b_collapse(self):
        g, X = tiny_edge()
        beta = Coefficients(np.zeros((2, 1)))
        B = BlockMatrix(np.full((2, 2), 0.37))
        assert bruteforce_marginal_loglik(g, X, beta, B) == pytest.approx(np.log(0.37), abs=1e-10)

    def test_monotone_in_b_on_complete_graph(self):
        n = 4
        A = 1.0 - np.eye(n)
        g = Graph(A)
        X = Covariates(np.zeros((n, 1)))
        beta = Coefficients(np.zeros((2, 1)))
        vals = [
            bruteforce_marginal_loglik(g, X, beta, BlockMatrix(np.full((2, 2), b)))
            for b in (0.2, 0.4, 0.6, 0.8)
        ]
        assert all(x < y for x, y in zip(vals, vals[1:]))

    def test_limit_enforced(self, rng):
        g, X, _ = random_instance(rng, 12)
        with pytest.raises(ValueError):
            bruteforce_marginal_loglik(
                g, X, Coefficients(np.zeros((2, 2))), BlockMatrix(np.full((2, 2), 0.3))
            )
