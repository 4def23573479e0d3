"""Multinomial logistic regression with fractional responses, plus Wald tests.

The fit maximizes sum_i [ (sum_k q_ik beta_k)' x_i - log sum_k exp(beta_k' x_i) ]
over beta with the last class pinned to zero. The problem is concave, so a full
Newton iteration with step-halving converges quickly at the scales used here.
Hard labels enter as degenerate (one-hot) responsibilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .datatypes import Coefficients, Covariates, Labels, SoftLabels

__all__ = ["LogitFit", "WaldRow", "fit_multilogistic", "predict_probs", "wald_test", "one_hot"]

GRAD_TOL = 1e-8
MAX_ITER = 100
COND_LIMIT = 1e12
RIDGE = 1e-8


def one_hot(labels: Labels) -> SoftLabels:
    q = np.zeros((labels.n, labels.K))
    q[np.arange(labels.n), labels.assignments - 1] = 1.0
    return SoftLabels(q)


def predict_probs(beta: Coefficients, X: Covariates) -> np.ndarray:
    """Row-stochastic n x K matrix of class probabilities, overflow-safe."""
    scores = X.values @ beta.beta.T
    scores -= scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=1, keepdims=True)


def _objective(beta_mat: np.ndarray, X: np.ndarray, q: np.ndarray) -> float:
    scores = X @ beta_mat.T
    m = scores.max(axis=1)
    lse = m + np.log(np.exp(scores - m[:, None]).sum(axis=1))
    return float(np.sum(q * scores) - np.sum(lse))


@dataclass(frozen=True)
class LogitFit:
    beta: Coefficients
    observed_info: np.ndarray  # Hessian of the negative log-likelihood at betahat, / n
    converged: bool
    iterations: int
    grad_norm: float
    ridged: bool = False

    @property
    def n_params(self) -> int:
        return self.observed_info.shape[0]


def fit_multilogistic(
    X: Covariates,
    q: SoftLabels | Labels,
    beta0: Optional[Coefficients] = None,
    tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
) -> LogitFit:
    """Newton fit of the (fractional-response) multinomial logistic model.

    Quasi-separated problems trip a ridge fallback (flagged via `ridged`);
    non-convergence returns the best iterate with converged=False.
    """
    if isinstance(q, Labels):
        q = one_hot(q)
    Xv = X.values
    qv = q.q
    n, p = Xv.shape
    K = qv.shape[1]
    if q.n != n:
        raise ValueError("X and q must have matching rows")
    if n < K:
        raise ValueError("need at least K observations")
    if not (np.all(np.isfinite(Xv)) and np.all(np.isfinite(qv))):
        raise ValueError("non-finite inputs")

    d = (K - 1) * p
    theta = np.zeros(d)
    if beta0 is not None:
        theta = beta0.beta[:-1].reshape(d).copy()

    beta_mat = np.zeros((K, p))
    ridged = False

    def unpack(th):
        b = np.zeros((K, p))
        b[:-1] = th.reshape(K - 1, p)
        return b

    obj = _objective(unpack(theta), Xv, qv)
    grad_norm = np.inf
    it = 0
    converged = False
    P = None
    for it in range(1, max_iter + 1):
        beta_mat = unpack(theta)
        scores = Xv @ beta_mat.T
        scores -= scores.max(axis=1, keepdims=True)
        e = np.exp(scores)
        P = e / e.sum(axis=1, keepdims=True)
        grad = ((qv - P)[:, :-1].T @ Xv).reshape(d)
        grad_norm = float(np.max(np.abs(grad))) if d else 0.0
        if grad_norm <= tol:
            converged = True
            break
        # Hessian of the negative objective, block (k, l) = sum_i p_ik (1{k=l} - p_il) x_i x_i'
        H = np.zeros((d, d))
        for k in range(K - 1):
            for l in range(k, K - 1):
                w = P[:, k] * ((k == l) - P[:, l])
                blk = (Xv * w[:, None]).T @ Xv
                H[k * p:(k + 1) * p, l * p:(l + 1) * p] = blk
                if l != k:
                    H[l * p:(l + 1) * p, k * p:(k + 1) * p] = blk.T
        cond = np.linalg.cond(H)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            ridged = True
            H = H + RIDGE * np.eye(d)
        step = np.linalg.solve(H, grad)
        # step-halving until ascent
        t = 1.0
        for _ in range(60):
            new_obj = _objective(unpack(theta + t * step), Xv, qv)
            if new_obj >= obj:
                break
            t /= 2.0
        else:
            converged = grad_norm <= 1e-4  # stalled line search near optimum
            break
        theta = theta + t * step
        obj = new_obj

    beta_mat = unpack(theta)
    if P is None:
        P = predict_probs(Coefficients(beta_mat), X)
    H = np.zeros((d, d))
    for k in range(K - 1):
        for l in range(k, K - 1):
            w = P[:, k] * ((k == l) - P[:, l])
            blk = (Xv * w[:, None]).T @ Xv
            H[k * p:(k + 1) * p, l * p:(l + 1) * p] = blk
            if l != k:
                H[l * p:(l + 1) * p, k * p:(k + 1) * p] = blk.T
    return LogitFit(
        beta=Coefficients(beta_mat),
        observed_info=(H + H.T) / (2 * n),
        converged=converged,
        iterations=it,
        grad_norm=grad_norm,
        ridged=ridged,
    )


@dataclass(frozen=True)
class WaldRow:
    class_index: int  # 1-based class k < K
    covariate_index: int  # 0-based column of X
    estimate: float
    std_error: float
    statistic: float
    reject: bool


def wald_test(fit: LogitFit, n: int, level: float = 0.01) -> list[WaldRow]:
    """Per-coefficient z-tests from the inverse observed information.

    Singular information triggers the same ridge fallback as fitting; the
    result is then a flagged approximation rather than an error.
    """
    K, p = fit.beta.K, fit.beta.p
    info = n * fit.observed_info
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        cov = np.linalg.inv(info + RIDGE * n * np.eye(info.shape[0]))
    crit = norm.ppf(1 - level / 2)
    rows = []
    for k in range(K - 1):
        for j in range(p):
            idx = k * p + j
            est = fit.beta.beta[k, j]
            se = float(np.sqrt(max(cov[idx, idx], 0.0)))
            z = est / se if se > 0 else 0.0
            rows.append(WaldRow(k + 1, j, float(est), se, float(z), bool(abs(z) > crit)))
    return rows
