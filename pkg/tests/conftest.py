"""Shared test oracles, deliberately independent of the library internals."""

from itertools import combinations

import numpy as np

from revgreedy.consolidation import required_pairs
from revgreedy.metric import MetricSpace, random_metric


def gamma_unrestricted(m, opt, facilities):
    """Minimum consolidation size by exhausting every diameter-feasible
    subset of points, with no maximal-clique shortcut (n <= 10 territory)."""
    facilities = frozenset(facilities)
    limit = 2 * opt.opt_value + m.tol()
    feasible = []
    for size in range(1, m.n + 1):
        for combo in combinations(range(m.n), size):
            if all(m.dist[a, b] <= limit for a, b in combinations(combo, 2)):
                feasible.append(frozenset(combo))
    needed = required_pairs(opt, facilities)
    # Only (facility cover, pairs satisfied) matters to validity.
    signatures = set()
    for part in feasible:
        cover = part & facilities
        if cover:
            pairs = frozenset(p for p in needed
                              if p[0] in part and p[1] in part)
            signatures.add((cover, pairs))
    signatures = sorted(signatures, key=lambda s: (sorted(s[0]), sorted(s[1])))
    for size in range(1, len(opt.balls) + 1):
        for combo in combinations(signatures, size):
            cover = frozenset().union(*(c for c, _ in combo))
            pairs = frozenset().union(*(p for _, p in combo))
            if facilities <= cover and needed <= pairs:
                return size
    raise AssertionError("no consolidation found up to size k")


def battery_instance(trial: int, *, n_span=(6, 12), k_span=(2, 4), seed_base=1000):
    """Deterministic mixed-kind random instance for ratio batteries."""
    kind = "euclidean" if trial % 2 == 0 else "random-graph"
    n = n_span[0] + trial % (n_span[1] - n_span[0] + 1)
    k = k_span[0] + trial % (k_span[1] - k_span[0] + 1)
    return random_metric(kind, n, seed_base + trial), k


def separated_pairs_metric(gap: float = 10.0) -> MetricSpace:
    """Two tight point pairs far apart; optimal balls never interact."""
    pts = np.array([[0.0, 0.0], [0.3, 0.0], [gap, 0.0], [gap + 0.3, 0.0]])
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    return MetricSpace(dist=d, mode="float")
