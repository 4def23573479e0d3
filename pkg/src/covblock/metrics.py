"""Partition-comparison metrics: confusion matrix, NMI, ARI, misclassification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datatypes import Labels, align_labels, apply_permutation

__all__ = ["Confusion", "confusion", "nmi", "ari", "misclassification_rate"]


@dataclass(frozen=True)
class Confusion:
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def confusion(a: Labels, b: Labels) -> Confusion:
    """counts[i, j] = number of nodes with a-label i+1 and b-label j+1."""
    if a.n != b.n:
        raise ValueError("labelings must have equal length")
    counts = np.zeros((a.K, b.K), dtype=np.int64)
    np.add.at(counts, (a.assignments - 1, b.assignments - 1), 1)
    return Confusion(counts)


def _xlogy(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # 0 * log 0 := 0
    out = np.zeros_like(x, dtype=np.float64)
    mask = x > 0
    out[mask] = x[mask] * np.log(y[mask])
    return out


def nmi(a: Labels, b: Labels) -> float:
    """Normalized mutual information between two partitions, in [0, 1].

    Trivial (single-class) partitions give 0 by the 0/0 convention.
    """
    c = confusion(a, b)
    n = c.n
    nij = c.counts.astype(np.float64)
    ni = c.row_sums.astype(np.float64)
    nj = c.col_sums.astype(np.float64)
    ratio = np.ones_like(nij)
    mask = nij > 0
    ratio[mask] = nij[mask] * n / np.outer(ni, nj)[mask]
    num = -2.0 * np.sum(_xlogy(nij, ratio) / 1.0)
    den = np.sum(_xlogy(ni, ni / n)) + np.sum(_xlogy(nj, nj / n))
    if den == 0.0:
        return 0.0
    return float(num / den)


def _comb2(x: np.ndarray) -> np.ndarray:
    return x * (x - 1) / 2.0


def ari(a: Labels, b: Labels) -> float:
    """Adjusted Rand index; 1 on identical partitions, can be negative."""
    c = confusion(a, b)
    n = c.n
    if n < 2:
        raise ValueError("need at least 2 nodes")
    sum_ij = _comb2(c.counts.astype(np.float64)).sum()
    sum_i = _comb2(c.row_sums.astype(np.float64)).sum()
    sum_j = _comb2(c.col_sums.astype(np.float64)).sum()
    expected = sum_i * sum_j / _comb2(np.float64(n))
    max_index = (sum_i + sum_j) / 2.0
    if max_index == expected:
        return 1.0 if sum_ij == expected else 0.0
    return float((sum_ij - expected) / (max_index - expected))


def misclassification_rate(a: Labels, b: Labels) -> float:
    """Fraction of disagreements after the best relabeling of b."""
    sigma = align_labels(a, b)
    aligned = apply_permutation(b, sigma)
    return float(np.mean(aligned.assignments != a.assignments))
