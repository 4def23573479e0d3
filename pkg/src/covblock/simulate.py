"""Synthetic data generation and real-network preprocessing.

Two sampling directions are provided: `sample_model` draws covariates first and
then labels given covariates (the model-faithful direction), while
`sample_scenario` draws labels first and covariates from class-conditional laws
(scenarios A and B used throughout the experiments; B deliberately leaves the
logistic form of the membership model).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .datatypes import Covariates, Graph, Labels, ModelParams
from .logistic import predict_probs

__all__ = [
    "ScenarioSpec",
    "WeightedDigraph",
    "rep_rng",
    "sample_model",
    "sample_scenario",
    "scenario_true_beta",
    "preprocess_weighted_digraph",
]

# constants shared by both simulation scenarios
SCENARIO_K = 2
SCENARIO_BBAR = np.array([[1.6, 0.4], [0.4, 1.6]])
SCENARIO_MU_A = np.array([0.0, 0.4, 0.6, 0.8])
SCENARIO_MU_B = np.array([0.5, 0.5])
SCENARIO_SIGMA_B = np.array([[1.0, 0.3], [0.3, 1.0]])


def scenario_rho(n: int) -> float:
    return 3.0 * np.log(n) ** 1.5 / (4.0 * n)


def rep_rng(seed: int, rep: int = 0) -> np.random.Generator:
    """Deterministic per-replication stream: PCG64 keyed on (seed, rep)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, rep])))


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: str  # 'A' or 'B'
    n: int

    def __post_init__(self):
        if self.scenario not in ("A", "B"):
            raise ValueError("scenario must be 'A' or 'B'")
        if self.n < 50:
            raise ValueError("n must be at least 50")
        if self.rho * SCENARIO_BBAR.max() > 1:
            raise ValueError("n too small: edge probabilities exceed 1")

    @property
    def rho(self) -> float:
        return scenario_rho(self.n)

    @property
    def K(self) -> int:
        return SCENARIO_K

    @property
    def Bbar(self) -> np.ndarray:
        return SCENARIO_BBAR.copy()


@dataclass(frozen=True)
class WeightedDigraph:
    """Integer-weighted directed graph, weights in {0..6}, zero diagonal."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.int64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be square")
        if w.min() < 0 or w.max() > 6:
            raise ValueError("weights must lie in {0..6}")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have zero diagonal")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def _sample_adjacency(rng: np.random.Generator, labels: np.ndarray, B: np.ndarray) -> Graph:
    n = labels.size
    probs = B[labels - 1][:, labels - 1]
    upper = rng.random((n, n)) < probs
    A = np.triu(upper, 1).astype(np.float64)
    A = A + A.T
    return Graph(A)


def sample_model(
    params: ModelParams,
    n: int,
    seed: int,
    covariate_sampler: Callable[[np.random.Generator, int], np.ndarray],
    rep: int = 0,
) -> tuple[Graph, Covariates, Labels]:
    """Draw (A, X, c): X i.i.d. from the supplied marginal, c | x multi-logistic,
    A | c from the block model with B = rho * Bbar."""
    rng = rep_rng(seed, rep)
    B = params.rho * params.Bbar
    if B.max() > 1:
        raise ValueError("rho * Bbar has entries above 1")
    X = np.asarray(covariate_sampler(rng, n), dtype=np.float64)
    probs = predict_probs(params.beta, Covariates(X))
    u = rng.random(n)
    labels = 1 + (u[:, None] > np.cumsum(probs, axis=1)).sum(axis=1)
    labels = np.minimum(labels, params.K)
    g = _sample_adjacency(rng, labels, B)
    return g, Covariates(X), Labels(labels, params.K)


def sample_scenario(spec: ScenarioSpec, seed: int, rep: int = 0) -> tuple[Graph, Covariates, Labels]:
    """Draw labels uniformly on {1, 2}, covariates from the scenario's
    class-conditional law, and edges from the block model."""
    rng = rep_rng(seed, rep)
    n = spec.n
    labels = rng.integers(1, 3, size=n)
    sign = np.where(labels == 1, 1.0, -1.0)
    if spec.scenario == "A":
        X = rng.standard_normal((n, 4)) + sign[:, None] * SCENARIO_MU_A
    else:
        L = np.linalg.cholesky(SCENARIO_SIGMA_B)
        x12 = rng.standard_normal((n, 2)) @ L.T + sign[:, None] * SCENARIO_MU_B
        bern_p = np.where(labels == 1, 0.6, 0.4)
        x3 = (rng.random(n) < bern_p).astype(np.float64)
        lo = np.where(labels == 1, -0.2, -0.5)
        x4 = lo + 0.7 * rng.random(n)
        X = np.column_stack([x12, x3, x4])
    g = _sample_adjacency(rng, labels, spec.rho * spec.Bbar)
    return g, Covariates(X), Labels(labels, 2)


def scenario_true_beta() -> np.ndarray:
    """Implied logistic coefficients for scenario A: the Gaussian log-odds
    log[phi(x - mu) / phi(x + mu)] = 2 mu' x, so beta_1 = 2 mu, beta_2 = 0."""
    return np.vstack([2 * SCENARIO_MU_A, np.zeros(4)])


def preprocess_weighted_digraph(g: WeightedDigraph, threshold: int = 3) -> tuple[Graph, np.ndarray]:
    """Binarize by mutual weight > threshold, then drop isolated nodes.

    Returns the undirected graph on the surviving nodes and the ascending
    original indices they came from.
    """
    if threshold not in range(7):
        raise ValueError("threshold must lie in {0..6}")
    w = g.weights
    A = ((w > threshold) & (w.T > threshold)).astype(np.float64)
    np.fill_diagonal(A, 0.0)
    keep = np.flatnonzero(A.sum(axis=1) > 0)
    if keep.size == 0:
        raise ValueError("all nodes isolated after thresholding")
    return Graph(A[np.ix_(keep, keep)]), keep
