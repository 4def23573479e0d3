"""Shared data model: graphs, covariates, labelings, block/coefficient matrices.

All containers are frozen dataclasses holding numpy arrays; they validate on
construction and are treated as immutable afterwards. Community labels are
1-based internally (file I/O converts to 0-based).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "Graph",
    "Covariates",
    "Labels",
    "SoftLabels",
    "BlockMatrix",
    "Coefficients",
    "ModelParams",
    "align_labels",
    "permute_coefficients",
    "apply_permutation",
    "inverse_permutation",
]

_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Simple undirected binary graph with dense adjacency storage."""

    adjacency: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise ValueError("adjacency must have zero diagonal")
        if not np.isin(A, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        object.__setattr__(self, "adjacency", A.astype(np.float64))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(round(self.adjacency.sum() / 2))


@dataclass(frozen=True)
class Covariates:
    """n x p real design matrix of nodal features."""

    values: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.values, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("covariates must be a 2-d matrix")
        if not np.all(np.isfinite(X)):
            raise ValueError("covariates must be finite")
        object.__setattr__(self, "values", X)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Labels:
    """Hard community assignment, entries in {1..K}."""

    assignments: np.ndarray
    K: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError("assignments must be a vector")
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if a.size and (a.min() < 1 or a.max() > self.K):
            raise ValueError("label values must lie in {1..K}")
        object.__setattr__(self, "assignments", a)

    @property
    def n(self) -> int:
        return self.assignments.size

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.K + 1)[1:]


@dataclass(frozen=True)
class SoftLabels:
    """Row-stochastic n x K responsibility matrix."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        if q.ndim != 2:
            raise ValueError("q must be a 2-d matrix")
        if np.any(q < 0):
            raise ValueError("responsibilities must be nonnegative")
        if np.max(np.abs(q.sum(axis=1) - 1.0)) > 1e-8:
            raise ValueError("responsibility rows must sum to 1")
        # exact renormalization so downstream entropy sums stay on the simplex
        q = q / q.sum(axis=1, keepdims=True)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def K(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True)
class BlockMatrix:
    """Symmetric K x K connectivity matrix, Bernoulli or Poisson mode."""

    B: np.ndarray
    mode: str = "bernoulli"

    def __post_init__(self):
        B = np.asarray(self.B, dtype=np.float64)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError("B must be square")
        if np.max(np.abs(B - B.T)) > 1e-10:
            raise ValueError("B must be symmetric")
        B = (B + B.T) / 2
        if self.mode not in ("bernoulli", "poisson"):
            raise ValueError("mode must be 'bernoulli' or 'poisson'")
        if self.mode == "bernoulli":
            B = np.clip(B, 1e-10, 1 - 1e-10)
        else:
            B = np.maximum(B, 1e-10)
        object.__setattr__(self, "B", B)

    @property
    def K(self) -> int:
        return self.B.shape[0]


@dataclass(frozen=True)
class Coefficients:
    """K x p logistic coefficients; last row pinned to zero for identifiability."""

    beta: np.ndarray
    fisher_info: Optional[np.ndarray] = None

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=np.float64)
        if b.ndim != 2:
            raise ValueError("beta must be a K x p matrix")
        if np.max(np.abs(b[-1])) > 0:
            raise ValueError("last coefficient row must be zero")
        object.__setattr__(self, "beta", b)
        if self.fisher_info is not None:
            I = np.asarray(self.fisher_info, dtype=np.float64)
            if np.max(np.abs(I - I.T)) > 1e-8:
                raise ValueError("fisher_info must be symmetric")
            object.__setattr__(self, "fisher_info", (I + I.T) / 2)

    @property
    def K(self) -> int:
        return self.beta.shape[0]

    @property
    def p(self) -> int:
        return self.beta.shape[1]


@dataclass(frozen=True)
class ModelParams:
    """Generative model parameters: B = rho * Bbar, logistic beta, class prior."""

    rho: float
    Bbar: np.ndarray
    beta: Coefficients
    prior: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        Bbar = np.asarray(self.Bbar, dtype=np.float64)
        if self.rho < 0 or self.rho > 1:
            raise ValueError("rho must lie in [0, 1]")
        if self.rho * Bbar.max() > 1 + 1e-12:
            raise ValueError("rho * max(Bbar) must not exceed 1")
        object.__setattr__(self, "Bbar", (Bbar + Bbar.T) / 2)
        K = Bbar.shape[0]
        prior = self.prior
        if prior is None:
            prior = np.full(K, 1.0 / K)
        prior = np.asarray(prior, dtype=np.float64)
        if abs(prior.sum() - 1.0) > 1e-8:
            raise ValueError("prior must sum to 1")
        object.__setattr__(self, "prior", prior)

    @property
    def K(self) -> int:
        return self.Bbar.shape[0]


def _confusion_counts(reference: Labels, estimate: Labels) -> np.ndarray:
    K = reference.K
    counts = np.zeros((K, K), dtype=np.int64)
    np.add.at(counts, (estimate.assignments - 1, reference.assignments - 1), 1)
    return counts


def align_labels(reference: Labels, estimate: Labels) -> np.ndarray:
    """Permutation sigma of {1..K} maximizing agreement of sigma(estimate) with reference.

    Returned as an int array perm of length K with perm[k-1] = sigma(k).
    Solved exactly: exhaustive for K <= 6, Hungarian assignment above.
    """
    if reference.n != estimate.n:
        raise ValueError("labelings must have equal length")
    if reference.K != estimate.K:
        raise ValueError("labelings must share K")
    K = reference.K
    counts = _confusion_counts(reference, estimate)  # counts[e, r]
    if K <= 6:
        best, best_score = None, -1
        for perm in itertools.permutations(range(K)):
            score = sum(counts[k, perm[k]] for k in range(K))
            if score > best_score:
                best, best_score = perm, score
        sigma = np.asarray(best, dtype=np.int64) + 1
    else:
        rows, cols = linear_sum_assignment(-counts)
        sigma = np.empty(K, dtype=np.int64)
        sigma[rows] = cols + 1
    return sigma


def apply_permutation(labels: Labels, sigma: np.ndarray) -> Labels:
    """Relabel: new assignment of node i is sigma(old assignment)."""
    sigma = np.asarray(sigma, dtype=np.int64)
    return Labels(sigma[labels.assignments - 1], labels.K)


def inverse_permutation(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    inv = np.empty_like(sigma)
    inv[sigma - 1] = np.arange(1, sigma.size + 1)
    return inv


def permute_coefficients(beta: Coefficients, sigma: np.ndarray) -> Coefficients:
    """Coefficients expressing the relabeled classes: beta'_k = beta_{sigma(k)} - beta_{sigma(K)}.

    Predicted class probabilities are invariant under the simultaneous relabel,
    and the last row stays zero.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    K = beta.K
    if sorted(sigma.tolist()) != list(range(1, K + 1)):
        raise ValueError("sigma must be a permutation of {1..K}")
    b = beta.beta[sigma - 1] - beta.beta[sigma[-1] - 1]
    return Coefficients(b)
