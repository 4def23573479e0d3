"""SDP relaxation solved by ADMM, k-means rounding, spectral clustering.

The relaxation maximizes <A + gamma * X X', Z> over PSD Z with box constraints
0 <= Z_ij <= 1 and sum_ij Z_ij = lambda. The ADMM splitting keeps three primal
copies (box / sum / PSD) with scaled duals; every update is closed form, so a
fixed iteration count gives reproducible output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datatypes import Covariates, Graph, Labels

__all__ = [
    "SdpConfig",
    "SdpSolution",
    "KmeansResult",
    "psd_project",
    "solve_sdp",
    "kmeans",
    "sdp_init_labels",
    "spectral_cluster",
    "choose_lambda",
]


@dataclass(frozen=True)
class SdpConfig:
    gamma: float
    lam: float
    iterations: int = 100
    step_size: float = 1.0
    standardize_covariates: bool = False

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.step_size <= 0:
            raise ValueError("step size must be positive")


@dataclass(frozen=True)
class SdpSolution:
    Z: np.ndarray
    objective: float
    box_violation: float
    sum_residual: float
    min_eigenvalue: float


def psd_project(M: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: zero out negative eigenvalues."""
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite input")
    M = (M + M.T) / 2
    vals, vecs = np.linalg.eigh(M)
    vals = np.maximum(vals, 0.0)
    return (vecs * vals) @ vecs.T


def _reward_matrix(g: Graph, X: Covariates, cfg: SdpConfig) -> np.ndarray:
    Xv = X.values
    if cfg.standardize_covariates and Xv.shape[1] > 0:
        sd = Xv.std(axis=0)
        sd[sd == 0] = 1.0
        Xv = (Xv - Xv.mean(axis=0)) / sd
    return g.adjacency + cfg.gamma * (Xv @ Xv.T)


def solve_sdp(g: Graph, X: Covariates, cfg: SdpConfig) -> SdpSolution:
    if g.n != X.n:
        raise ValueError("graph and covariates disagree on n")
    n = g.n
    if cfg.lam > n * n:
        raise ValueError("lambda exceeds n^2")
    R = _reward_matrix(g, X, cfg)
    xi = cfg.step_size
    Z = R.copy()
    W = np.zeros((n, n))
    Y = np.zeros((n, n))
    U = np.zeros((n, n))
    V = np.zeros((n, n))
    R_over_xi = R / xi
    for _ in range(cfg.iterations):
        Y = np.clip((W + Z - U - V) / 2.0, 0.0, 1.0)
        W = Y + U + (cfg.lam - (Y + U).sum()) / (n * n)
        Z = psd_project(Y + V + R_over_xi)
        U = U + Y - W
        V = V + Y - Z
    Z = (Z + Z.T) / 2
    box_violation = float(max(np.max(-Z, initial=0.0), np.max(Z - 1.0, initial=0.0), 0.0))
    sum_residual = float(abs(Z.sum() - cfg.lam) / cfg.lam)
    min_eig = float(np.linalg.eigvalsh(Z)[0])
    return SdpSolution(
        Z=Z,
        objective=float(np.sum(R * Z)),
        box_violation=box_violation,
        sum_residual=sum_residual,
        min_eigenvalue=min_eig,
    )


@dataclass(frozen=True)
class KmeansResult:
    labels: Labels
    inertia: float
    degenerate: bool  # fewer than K non-empty clusters


def _kmeans_once(points: np.ndarray, K: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    m = points.shape[0]
    # k-means++ seeding
    centers = np.empty((K, points.shape[1]))
    idx = int(rng.integers(m))
    centers[0] = points[idx]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(m))
        else:
            idx = int(rng.choice(m, p=d2 / total))
        centers[k] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[k]) ** 2, axis=1))
    assign = np.zeros(m, dtype=np.int64)
    for _ in range(300):
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = dists.argmin(axis=1)
        if np.array_equal(new_assign, assign) and _ > 0:
            break
        assign = new_assign
        for k in range(K):
            mask = assign == k
            if mask.any():
                centers[k] = points[mask].mean(axis=0)
    dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = dists.argmin(axis=1)
    inertia = float(dists[np.arange(m), assign].sum())
    return assign, inertia


def kmeans(points: np.ndarray, K: int, restarts: int = 10, seed: int = 0) -> KmeansResult:
    """Lloyd iterations from k-means++ seeding, best of `restarts` runs by WCSS."""
    points = np.asarray(points, dtype=np.float64)
    m = points.shape[0]
    if m < K:
        raise ValueError("need at least K points")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x6B6D])))
    best_assign, best_inertia = None, np.inf
    for _ in range(restarts):
        assign, inertia = _kmeans_once(points, K, rng)
        if inertia < best_inertia - 1e-15 or best_assign is None:
            best_assign, best_inertia = assign, inertia
    degenerate = np.unique(best_assign).size < K
    return KmeansResult(Labels(best_assign + 1, K), best_inertia, degenerate)


def sdp_init_labels(
    g: Graph, X: Covariates, cfg: SdpConfig, K: int, seed: int, restarts: int = 10
) -> Labels:
    """Solve the relaxation and round by k-means on the rows of Z."""
    sol = solve_sdp(g, X, cfg)
    return kmeans(sol.Z, K, restarts=restarts, seed=seed).labels


def spectral_cluster(g: Graph, K: int, seed: int, restarts: int = 10) -> Labels:
    """k-means on the K leading-|eigenvalue| eigenvectors of the adjacency."""
    if g.n < K:
        raise ValueError("need at least K nodes")
    vals, vecs = np.linalg.eigh(g.adjacency)
    order = np.argsort(-np.abs(vals))[:K]
    return kmeans(vecs[:, order], K, restarts=restarts, seed=seed).labels


def choose_lambda(
    strategy: str,
    n: int | None = None,
    K: int | None = None,
    truth: Labels | None = None,
    graph: Graph | None = None,
    seed: int = 0,
) -> float:
    """Sum-constraint tuning: 'oracle' needs true labels, 'balanced' gives n^2/K,
    'spectral' estimates community sizes by spectral clustering."""
    if strategy == "oracle":
        if truth is None:
            raise ValueError("oracle strategy needs true labels")
        return float(np.sum(truth.class_sizes().astype(np.float64) ** 2))
    if strategy == "balanced":
        if n is None or K is None:
            raise ValueError("balanced strategy needs n and K")
        return float(n) ** 2 / K
    if strategy == "spectral":
        if graph is None or K is None:
            raise ValueError("spectral strategy needs a graph and K")
        est = spectral_cluster(graph, K, seed)
        return float(np.sum(est.class_sizes().astype(np.float64) ** 2))
    raise ValueError(f"unknown lambda strategy: {strategy}")
