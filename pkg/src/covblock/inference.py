"""Variational EM and maximum profile likelihood refinement, with tiny-n
brute-force oracles.

Both fits alternate a multinomial-logistic coefficient update, a closed-form
block-matrix update, and Gauss-Seidel sweeps over node responsibilities
(soft, VEM) or labels (hard, MPL). Every block update maximizes its
coordinate, so the recorded objective traces are non-decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np
from numba import njit

from .datatypes import (
    BlockMatrix,
    Coefficients,
    Covariates,
    Graph,
    Labels,
    SoftLabels,
)
from .logistic import LogitFit, fit_multilogistic, one_hot

__all__ = [
    "FitOptions",
    "VemResult",
    "MplResult",
    "elbo",
    "vem_fit",
    "profile_objective",
    "mpl_fit",
    "labels_from_soft",
    "soft_from_labels",
    "random_soft_labels",
    "random_hard_labels",
    "bruteforce_profile_argmax",
    "bruteforce_marginal_loglik",
]

B_FLOOR = 1e-10
B_CEIL_BERNOULLI = 1.0 - 1e-10


@dataclass(frozen=True)
class FitOptions:
    max_outer: int = 500
    rel_tol: float = 1e-8
    inner_sweeps_max: int = 50
    inner_tol: float = 1e-6
    logit_tol: float = 1e-8

    def __post_init__(self):
        if self.rel_tol <= 0 or self.inner_tol <= 0 or self.logit_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_outer < 1 or self.inner_sweeps_max < 1:
            raise ValueError("iteration caps must be positive")


@dataclass(frozen=True)
class VemResult:
    q: SoftLabels
    beta: Coefficients
    B: BlockMatrix
    elbo_trace: np.ndarray
    labels: Labels
    converged: bool
    logit_fit: Optional[LogitFit] = None


@dataclass(frozen=True)
class MplResult:
    labels: Labels
    beta: Coefficients
    B: BlockMatrix
    objective_trace: np.ndarray
    converged: bool
    empty_block: bool = False
    logit_fit: Optional[LogitFit] = None


def labels_from_soft(q: SoftLabels) -> Labels:
    """Per-row argmax, ties toward the lowest class index."""
    return Labels(np.argmax(q.q, axis=1) + 1, q.K)


def soft_from_labels(labels: Labels, tau: float = 0.1) -> SoftLabels:
    """Strictly interior one-hot relaxation: 1-tau at the assigned class."""
    K = labels.K
    q = np.full((labels.n, K), tau / (K - 1))
    q[np.arange(labels.n), labels.assignments - 1] = 1.0 - tau
    return SoftLabels(q)


def random_soft_labels(n: int, K: int, rng: np.random.Generator) -> SoftLabels:
    return SoftLabels(rng.dirichlet(np.ones(K), size=n))


def random_hard_labels(n: int, K: int, rng: np.random.Generator) -> Labels:
    return Labels(rng.integers(1, K + 1, size=n), K)


def _entropy(q: np.ndarray) -> float:
    mask = q > 0
    return float(-np.sum(q[mask] * np.log(q[mask])))


def _covariate_term(X: np.ndarray, q: np.ndarray, beta: np.ndarray) -> float:
    scores = X @ beta.T
    m = scores.max(axis=1)
    lse = m + np.log(np.exp(scores - m[:, None]).sum(axis=1))
    return float(np.sum(q * scores) - np.sum(lse))


def elbo(g: Graph, X: Covariates, q: SoftLabels, beta: Coefficients, B: BlockMatrix) -> float:
    """Mean-field objective, constant log P(X) omitted."""
    if B.mode != "bernoulli":
        raise ValueError("elbo requires a Bernoulli block matrix")
    qv = q.q
    A = g.adjacency
    M = qv.T @ A @ qv  # sum over ordered pairs i != j (A zero-diagonal)
    col = qv.sum(axis=0)
    N = np.outer(col, col) - qv.T @ qv  # ordered-pair totals
    Bm = B.B
    edge = 0.5 * float(np.sum(M * np.log(Bm) + (N - M) * np.log1p(-Bm)))
    return edge + _covariate_term(X.values, qv, beta.beta) + _entropy(qv)


def _vem_b_update(A: np.ndarray, qv: np.ndarray) -> BlockMatrix:
    M = qv.T @ A @ qv
    col = qv.sum(axis=0)
    N = np.outer(col, col) - qv.T @ qv
    with np.errstate(invalid="ignore", divide="ignore"):
        B = np.where(N > 0, M / np.maximum(N, 1e-300), 0.5)
    return BlockMatrix((B + B.T) / 2, "bernoulli")


@njit(cache=True)
def _vem_sweeps(A, q, scores, logB, log1mB, max_sweeps, tol):  # pragma: no cover
    n, K = q.shape
    col = np.zeros(K)
    for i in range(n):
        for k in range(K):
            col[k] += q[i, k]
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        max_change = 0.0
        for i in range(n):
            s = np.zeros(K)  # sum_j A_ij q_jb
            for j in range(n):
                aij = A[i, j]
                if aij != 0.0:
                    for b in range(K):
                        s[b] += aij * q[j, b]
            a = np.empty(K)
            for k in range(K):
                acc = scores[i, k]
                for b in range(K):
                    t = col[b] - q[i, b] - s[b]
                    acc += s[b] * logB[k, b] + t * log1mB[k, b]
                a[k] = acc
            amax = a[0]
            for k in range(1, K):
                if a[k] > amax:
                    amax = a[k]
            z = 0.0
            for k in range(K):
                a[k] = np.exp(a[k] - amax)
                z += a[k]
            for k in range(K):
                new = a[k] / z
                change = abs(new - q[i, k])
                if change > max_change:
                    max_change = change
                col[k] += new - q[i, k]
                q[i, k] = new
        if max_change < tol:
            break
    return sweeps


def vem_fit(g: Graph, X: Covariates, q0: SoftLabels, opts: FitOptions = FitOptions()) -> VemResult:
    """Alternating maximization of the mean-field objective from q0."""
    if g.n != q0.n or g.n != X.n:
        raise ValueError("dimension mismatch")
    A = g.adjacency
    qv = q0.q.copy()
    K = q0.K
    trace = []
    beta_prev: Optional[Coefficients] = None
    converged = False
    fit = None
    B = None
    for outer in range(opts.max_outer):
        fit = fit_multilogistic(X, SoftLabels(qv), beta0=beta_prev, tol=opts.logit_tol)
        beta_prev = fit.beta
        B = _vem_b_update(A, qv)
        scores = X.values @ fit.beta.beta.T
        _vem_sweeps(
            A, qv, scores, np.log(B.B), np.log1p(-B.B), opts.inner_sweeps_max, opts.inner_tol
        )
        qv = qv / qv.sum(axis=1, keepdims=True)
        value = elbo(g, X, SoftLabels(qv), fit.beta, B)
        if not np.isfinite(value):
            raise FloatingPointError("ELBO became non-finite")
        trace.append(value)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= opts.rel_tol * (1 + abs(trace[-2])):
            converged = True
            break
    q = SoftLabels(qv)
    return VemResult(
        q=q,
        beta=fit.beta,
        B=B,
        elbo_trace=np.asarray(trace),
        labels=labels_from_soft(q),
        converged=converged,
        logit_fit=fit,
    )


def _block_counts(A: np.ndarray, labels: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Ordered-pair edge counts and pair totals per block."""
    C = np.zeros((labels.size, K))
    C[np.arange(labels.size), labels - 1] = 1.0
    num = C.T @ A @ C
    sizes = C.sum(axis=0)
    den = np.outer(sizes, sizes) - np.diag(sizes)
    return num, den


def _mpl_b_update(
    A: np.ndarray, labels: np.ndarray, K: int, prev: Optional[BlockMatrix]
) -> tuple[BlockMatrix, bool]:
    num, den = _block_counts(A, labels, K)
    B = np.zeros((K, K))
    empty = den <= 0
    with np.errstate(invalid="ignore", divide="ignore"):
        B = np.where(~empty, num / np.maximum(den, 1e-300), 0.0)
    had_empty = bool(empty.any())
    if had_empty:
        # empty blocks keep the previous estimate
        fallback = prev.B if prev is not None else np.full((K, K), B_FLOOR)
        B = np.where(empty, fallback, B)
    return BlockMatrix((B + B.T) / 2, "poisson"), had_empty


def profile_objective(
    g: Graph, X: Covariates, c: Labels, beta: Coefficients, B: BlockMatrix
) -> float:
    """Poisson-form profile log-likelihood (A_ij! constant omitted)."""
    if B.mode != "poisson":
        raise ValueError("profile objective requires a Poisson block matrix")
    num, den = _block_counts(g.adjacency, c.assignments, c.K)
    edge = 0.5 * float(np.sum(num * np.log(B.B) - den * B.B))
    onehot = one_hot(c).q
    return edge + _covariate_term(X.values, onehot, beta.beta)


@njit(cache=True)
def _mpl_sweeps(A, labels, scores, logB, B, max_sweeps, counts):  # pragma: no cover
    n = labels.size
    K = B.shape[0]
    changed_total = 0
    for _ in range(max_sweeps):
        changed = 0
        for i in range(n):
            cur = labels[i] - 1
            m = np.zeros(K)  # neighbors of i per class
            for j in range(n):
                if A[i, j] != 0.0:
                    m[labels[j] - 1] += 1.0
            best = cur
            best_score = -1e300
            cur_score = 0.0
            for k in range(K):
                acc = scores[i, k]
                for b in range(K):
                    nb = counts[b] - (1.0 if b == cur else 0.0)
                    acc += m[b] * logB[k, b] - nb * B[k, b]
                if k == cur:
                    cur_score = acc
                if acc > best_score:
                    best_score = acc
                    best = k
            if best != cur and best_score > cur_score:
                counts[cur] -= 1.0
                counts[best] += 1.0
                labels[i] = best + 1
                changed += 1
        changed_total += changed
        if changed == 0:
            break
    return changed_total


def mpl_fit(g: Graph, X: Covariates, c0: Labels, opts: FitOptions = FitOptions()) -> MplResult:
    """Alternating maximization of the Poisson profile likelihood from c0."""
    if g.n != c0.n or g.n != X.n:
        raise ValueError("dimension mismatch")
    A = g.adjacency
    labels = c0.assignments.copy()
    K = c0.K
    trace = []
    beta_prev: Optional[Coefficients] = None
    B: Optional[BlockMatrix] = None
    converged = False
    empty_seen = False
    fit = None
    for outer in range(opts.max_outer):
        fit = fit_multilogistic(X, Labels(labels, K), beta0=beta_prev, tol=opts.logit_tol)
        beta_prev = fit.beta
        B, had_empty = _mpl_b_update(A, labels, K, B)
        empty_seen = empty_seen or had_empty
        scores = X.values @ fit.beta.beta.T
        counts = np.bincount(labels, minlength=K + 1)[1:].astype(np.float64)
        _mpl_sweeps(A, labels, scores, np.log(B.B), B.B, opts.inner_sweeps_max, counts)
        value = profile_objective(g, X, Labels(labels, K), fit.beta, B)
        if not np.isfinite(value):
            raise FloatingPointError("profile objective became non-finite")
        trace.append(value)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= opts.rel_tol * (1 + abs(trace[-2])):
            converged = True
            break
    return MplResult(
        labels=Labels(labels, K),
        beta=fit.beta,
        B=B,
        objective_trace=np.asarray(trace),
        converged=converged,
        empty_block=empty_seen,
        logit_fit=fit,
    )


def bruteforce_profile_argmax(
    g: Graph, X: Covariates, K: int, limit: int = 10
) -> tuple[Labels, Coefficients, BlockMatrix, float]:
    """Global profile-likelihood maximizer by enumerating all K^n assignments.

    B is profiled out analytically (Poisson block means), beta by the Newton
    logistic fit; purely an oracle for tiny n.
    """
    n = g.n
    if n > limit:
        raise ValueError(f"n={n} exceeds enumeration limit {limit}")
    best = None
    best_val = -np.inf
    for assignment in product(range(1, K + 1), repeat=n):
        c = Labels(np.asarray(assignment, dtype=np.int64), K)
        B, _ = _mpl_b_update(g.adjacency, c.assignments, K, None)
        fit = fit_multilogistic(X, c, tol=1e-12, max_iter=200)
        val = profile_objective(g, X, c, fit.beta, B)
        if val > best_val:
            best_val = val
            best = (c, fit.beta, B)
    c, beta, B = best
    return c, beta, B, float(best_val)


def bruteforce_marginal_loglik(
    g: Graph, X: Covariates, beta: Coefficients, B: BlockMatrix, limit: int = 10
) -> float:
    """log sum over all K^n assignments of P(A | c) P(c | X), via log-sum-exp."""
    n = g.n
    if n > limit:
        raise ValueError(f"n={n} exceeds enumeration limit {limit}")
    if B.mode != "bernoulli":
        raise ValueError("marginal likelihood requires a Bernoulli block matrix")
    A = g.adjacency
    K = B.K
    scores = X.values @ beta.beta.T
    m = scores.max(axis=1)
    log_pc = scores - (m + np.log(np.exp(scores - m[:, None]).sum(axis=1)))[:, None]
    logB = np.log(B.B)
    log1mB = np.log1p(-B.B)
    iu, ju = np.triu_indices(n, 1)
    aij = A[iu, ju]
    terms = []
    for assignment in product(range(K), repeat=n):
        c = np.asarray(assignment)
        bi = c[iu]
        bj = c[ju]
        ll = float(np.sum(aij * logB[bi, bj] + (1 - aij) * log1mB[bi, bj]))
        ll += float(log_pc[np.arange(n), c].sum())
        terms.append(ll)
    terms = np.asarray(terms)
    mx = terms.max()
    return float(mx + np.log(np.exp(terms - mx).sum()))
