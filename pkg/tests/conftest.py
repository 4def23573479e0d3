import numpy as np
import pytest

from covblock.datatypes import Covariates, Graph, Labels


def random_graph(rng: np.random.Generator, n: int, p_edge: float = 0.3) -> Graph:
    upper = np.triu(rng.random((n, n)) < p_edge, 1).astype(np.float64)
    return Graph(upper + upper.T)


def random_instance(rng: np.random.Generator, n: int, K: int = 2, p: int = 2):
    g = random_graph(rng, n)
    X = Covariates(rng.standard_normal((n, p)))
    c = Labels(rng.integers(1, K + 1, size=n), K)
    return g, X, c


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)
