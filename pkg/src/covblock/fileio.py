"""Text formats: edge lists, covariate CSV, label files.

Node ids and class ids are 0-based on disk (internal labels are 1-based).
All writers produce byte-stable output for fixed inputs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO

import numpy as np

from .datatypes import Covariates, Graph, Labels

__all__ = [
    "ParsedGraph",
    "parse_edge_list",
    "write_edge_list",
    "parse_covariates",
    "write_covariates",
    "parse_labels",
    "write_labels",
]


@dataclass(frozen=True)
class ParsedGraph:
    graph: Graph
    warning_count: int  # dropped self-loops


def parse_edge_list(stream: IO[str] | str) -> ParsedGraph:
    """Lines "u v" with 0-based ids; '#' comments; optional "n=<N>" header."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    n_declared = None
    edges = set()
    max_id = -1
    warnings = 0
    for raw in stream:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("n="):
            n_declared = int(line[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"malformed edge line: {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"non-integer node id in line: {line!r}") from exc
        if u < 0 or v < 0:
            raise ValueError(f"negative node id in line: {line!r}")
        max_id = max(max_id, u, v)
        if u == v:
            warnings += 1
            continue
        edges.add((min(u, v), max(u, v)))
    n = n_declared if n_declared is not None else max_id + 1
    if n < 1:
        raise ValueError("empty edge list with no n= header")
    A = np.zeros((n, n))
    for u, v in edges:
        A[u, v] = A[v, u] = 1.0
    return ParsedGraph(Graph(A), warnings)


def write_edge_list(g: Graph) -> str:
    lines = [f"n={g.n}"]
    iu, ju = np.nonzero(np.triu(g.adjacency, 1))
    lines.extend(f"{u} {v}" for u, v in zip(iu.tolist(), ju.tolist()))
    return "\n".join(lines) + "\n"


def parse_covariates(
    stream: IO[str] | str, has_header: bool = False, add_intercept: bool = False
) -> Covariates:
    """Comma-separated numeric rows with a constant column count."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rows = []
    width = None
    for idx, raw in enumerate(stream):
        line = raw.strip()
        if not line:
            continue
        if has_header and not rows and idx == 0:
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ValueError(f"ragged row at line {idx + 1}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ValueError(f"non-numeric cell at line {idx + 1}") from exc
    X = np.asarray(rows, dtype=np.float64)
    if X.size == 0:
        raise ValueError("empty covariate file")
    if add_intercept:
        X = np.column_stack([X, np.ones(X.shape[0])])
    return Covariates(X)


def write_covariates(X: Covariates) -> str:
    return "\n".join(",".join(repr(v) for v in row) for row in X.values.tolist()) + "\n"


def parse_labels(stream: IO[str] | str, K: int | None = None) -> Labels:
    """One 0-based class id per line."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    vals = [int(line.strip()) for line in stream if line.strip()]
    arr = np.asarray(vals, dtype=np.int64) + 1
    return Labels(arr, K if K is not None else int(arr.max()))


def write_labels(labels: Labels) -> str:
    return "\n".join(str(v - 1) for v in labels.assignments.tolist()) + "\n"
