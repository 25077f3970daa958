"""Finite metric spaces: construction, validation, generation, and file I/O.

Two arithmetic modes are supported.  Integer mode keeps every distance an
exact int64 so that tie detection downstream is exact; floating mode carries
a comparison tolerance used for all tie/argmin decisions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Tolerance for tie/argmin comparisons in floating mode.
FLOAT_EPS = 1e-9

# Sentinel for "no path yet" during shortest-path computation.  Large enough
# to survive one addition without int64 overflow, far above any real distance.
_INT_INF = 10**15


class DisconnectedGraphError(ValueError):
    """Raised when a graph has no path between some pair of vertices."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive integer edge weights."""

    vertex_count: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("graph needs at least one vertex")
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        for u, v, w in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            if not isinstance(w, (int, np.integer)) or w < 1:
                raise ValueError(f"edge ({u},{v}) weight {w} must be an integer >= 1")


@dataclass(frozen=True)
class MetricSpace:
    """Finite point set with a materialized pairwise distance matrix.

    Points are the indices 0..n-1; every point is both a client and a
    candidate facility.  `mode` is "int" (exact arithmetic) or "float"
    (comparisons within `eps`).
    """

    dist: np.ndarray
    mode: str = "int"
    eps: float = FLOAT_EPS
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        d = np.asarray(self.dist)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if self.mode not in ("int", "float"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "int" and not np.issubdtype(d.dtype, np.integer):
            if not np.array_equal(d, np.round(d)):
                raise ValueError("integer mode needs integer distances")
        d = d.astype(np.int64 if self.mode == "int" else np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if self.labels is not None and len(self.labels) != d.shape[0]:
            raise ValueError("labels length must equal point count")

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def points(self) -> range:
        return range(self.n)

    def d(self, a: int, b: int):
        return self.dist[a, b]

    def tol(self) -> float:
        """Comparison slack: 0 in integer mode, eps in floating mode."""
        return 0 if self.mode == "int" else self.eps


@dataclass
class MetricValidationReport:
    """Outcome of checking the metric axioms, with one witness per violation."""

    violations: list[tuple[str, tuple]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{axiom} violation at {witness}" for axiom, witness in self.violations)


def metric_from_graph(g: WeightedGraph) -> MetricSpace:
    """All-pairs shortest-path completion of a weighted graph, in integer mode.

    Raises DisconnectedGraphError naming an unreachable pair if the graph is
    not connected.
    """
    n = g.vertex_count
    d = np.full((n, n), _INT_INF, dtype=np.int64)
    np.fill_diagonal(d, 0)
    for u, v, w in g.edges:
        if w < d[u, v]:
            d[u, v] = w
            d[v, u] = w
    # Floyd-Warshall, vectorized one pivot at a time.
    for k in range(n):
        np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :], out=d)
    unreachable = np.argwhere(d >= _INT_INF)
    if unreachable.size:
        a, b = unreachable[0]
        raise DisconnectedGraphError(f"no path between vertices {a} and {b}")
    return MetricSpace(dist=d, mode="int")


def validate_metric(m: MetricSpace) -> MetricValidationReport:
    """Check identity, symmetry, positivity, and the triangle inequality.

    Violations are report content, never exceptions; each violated axiom is
    listed with one witness.
    """
    d = m.dist
    n = m.n
    tol = m.tol()
    report = MetricValidationReport()

    diag = np.flatnonzero(np.abs(np.diagonal(d)) > tol)
    if diag.size:
        a = int(diag[0])
        report.violations.append(("identity", (a, a)))

    asym = np.argwhere(np.abs(d - d.T) > tol)
    if asym.size:
        a, b = (int(x) for x in asym[0])
        if a > b:
            a, b = b, a
        report.violations.append(("symmetry", (a, b)))

    offdiag = d + np.where(np.eye(n, dtype=bool), np.inf, 0)
    nonpos = np.argwhere(offdiag <= tol)
    if nonpos.size:
        a, b = (int(x) for x in nonpos[0])
        report.violations.append(("positivity", (a, b)))

    for b in range(n):
        viol = np.argwhere(d > d[:, b : b + 1] + d[b : b + 1, :] + tol)
        if viol.size:
            a, c = (int(x) for x in viol[0])
            report.violations.append(("triangle", (a, b, c)))
            break

    return report


def random_metric(kind: str, n: int, seed: int, *, dim: int = 2,
                  edge_prob: float = 0.3, max_weight: int = 9) -> MetricSpace:
    """Deterministic random metric: "euclidean" points or a "random-graph".

    Euclidean instances are floating mode; random graphs are integer mode
    (a random spanning tree plus extra edges, so always connected).
    """
    if n < 1:
        raise ValueError("random_metric requires n >= 1")
    rng = np.random.default_rng(seed)
    if kind == "euclidean":
        coords = rng.random((n, dim))
        diff = coords[:, None, :] - coords[None, :, :]
        d = np.sqrt((diff * diff).sum(axis=2))
        np.fill_diagonal(d, 0.0)
        return MetricSpace(dist=d, mode="float")
    if kind == "random-graph":
        edges = []
        for v in range(1, n):
            u = int(rng.integers(0, v))
            edges.append((u, v, int(rng.integers(1, max_weight + 1))))
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < edge_prob:
                    edges.append((u, v, int(rng.integers(1, max_weight + 1))))
        return metric_from_graph(WeightedGraph(n, tuple(edges)))
    raise ValueError(f"unknown kind {kind!r}")


def uniform_metric(n: int) -> MetricSpace:
    """All pairwise distances equal to 1."""
    d = np.ones((n, n), dtype=np.int64)
    np.fill_diagonal(d, 0)
    return MetricSpace(dist=d, mode="int")


def save_instance(path, m: MetricSpace, k: int | None = None,
                  graph: WeightedGraph | None = None) -> None:
    """Write the instance JSON file.

    The file carries either the generating graph (integer mode) or the full
    matrix.  Layout: {"version": 1, "mode", "n", "graph"|"matrix", "k",
    "labels"}.
    """
    doc: dict = {"version": 1, "mode": m.mode, "n": m.n, "k": k}
    if graph is not None:
        doc["graph"] = {"edges": [[int(u), int(v), int(w)] for u, v, w in graph.edges]}
    elif m.mode == "int":
        doc["matrix"] = [[int(x) for x in row] for row in m.dist]
    else:
        doc["matrix"] = [[float(x) for x in row] for row in m.dist]
    if m.labels is not None:
        doc["labels"] = list(m.labels)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_instance(path) -> tuple[MetricSpace, int | None]:
    """Read an instance JSON file; returns (metric, k or None)."""
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != 1:
        raise ValueError("unsupported instance file version")
    if "graph" in doc and "matrix" in doc:
        raise ValueError("instance file must not carry both a graph and a matrix")
    mode = doc["mode"]
    labels = tuple(doc["labels"]) if doc.get("labels") else None
    if "graph" in doc:
        g = WeightedGraph(doc["n"], tuple(tuple(e) for e in doc["graph"]["edges"]))
        m = metric_from_graph(g)
        if mode != "int":
            raise ValueError("graph instances must be integer mode")
        m = MetricSpace(dist=m.dist, mode="int", labels=labels)
    elif "matrix" in doc:
        m = MetricSpace(dist=np.asarray(doc["matrix"]), mode=mode, labels=labels)
        if m.n != doc["n"]:
            raise ValueError("matrix size does not match declared n")
    else:
        raise ValueError("instance file needs a graph or a matrix")
    return m, doc.get("k")
