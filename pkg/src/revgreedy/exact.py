"""Exact small-instance k-center oracle.

Two independent strategies are kept side by side on purpose: full subset
enumeration, and binary search over candidate radii (the optimum is always
one of the pairwise distances) with a set-cover backtracker.  They are
cross-checked in the test suite; the oracle is the trust anchor for every
ratio claim downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .kcenter import cost
from .metric import MetricSpace


class OracleCapError(RuntimeError):
    """Instance too large for the exact oracle's configured cap."""


@dataclass(frozen=True)
class OptimalSolution:
    """A certified optimum: value, a minimizing facility set, and its balls."""

    opt_value: int | float
    facilities: frozenset[int]
    balls: tuple[frozenset[int], ...]


def ball(m: MetricSpace, center: int, r: float, opt_value) -> frozenset[int]:
    """Points within r * opt_value of the center (closed ball)."""
    if opt_value <= 0:
        raise ValueError("ball needs a positive optimum value")
    radius = r * opt_value
    return frozenset(int(p) for p in np.flatnonzero(m.dist[center] <= radius + m.tol()))


def opt_balls(m: MetricSpace, sol: "OptimalSolution") -> list[frozenset[int]]:
    """One ball per facility (ascending facility index), radius = optimum."""
    out = []
    for o in sorted(sol.facilities):
        out.append(frozenset(int(p) for p in
                             np.flatnonzero(m.dist[o] <= sol.opt_value + m.tol())))
    return out


def _with_balls(m: MetricSpace, value, facilities) -> OptimalSolution:
    facilities = frozenset(facilities)
    sol = OptimalSolution(value, facilities, ())
    return OptimalSolution(value, facilities, tuple(opt_balls(m, sol)))


def _cover_masks(m: MetricSpace, radius) -> list[int]:
    """Bitmask per candidate center of the points it covers at this radius."""
    within = m.dist <= radius + m.tol()
    masks = []
    for c in range(m.n):
        mask = 0
        for p in np.flatnonzero(within[c]):
            mask |= 1 << int(p)
        masks.append(mask)
    return masks


def _feasible(masks: list[int], n: int, k: int) -> bool:
    """Can k centers cover everything?  Most-constrained-first backtracking."""
    full = (1 << n) - 1
    coverers = [[c for c in range(n) if masks[c] >> p & 1] for p in range(n)]

    def search(covered: int, slots: int) -> bool:
        if covered == full:
            return True
        if slots == 0:
            return False
        # Branch on the uncovered point with the fewest candidate centers.
        best_opts = None
        for p in range(n):
            if covered >> p & 1:
                continue
            opts = coverers[p]
            if best_opts is None or len(opts) < len(best_opts):
                best_opts = opts
                if not opts:
                    return False
        for c in best_opts:
            if search(covered | masks[c], slots - 1):
                return True
        return False

    return search(0, k)


def _lex_smallest_cover(masks: list[int], n: int, k: int) -> frozenset[int]:
    """Lexicographically smallest k-subset of centers covering everything.

    Depth-first over index-increasing subsets, so the first complete
    solution found is the lexicographic minimum.
    """
    full = (1 << n) - 1
    # Highest-indexed center covering each point, for dead-branch pruning.
    highest = [max(c for c in range(n) if masks[c] >> p & 1) for p in range(n)]

    def search(start: int, chosen: list[int], covered: int):
        if len(chosen) == k:
            return list(chosen) if covered == full else None
        for p in range(n):
            if not (covered >> p & 1) and highest[p] < start:
                return None
        for c in range(start, n):
            if n - c < k - len(chosen):
                break
            chosen.append(c)
            found = search(c + 1, chosen, covered | masks[c])
            if found is not None:
                return found
            chosen.pop()
        return None

    found = search(0, [], 0)
    if found is None:
        raise AssertionError("no cover at a radius proven feasible")
    return frozenset(found)


def exact_opt_enumeration(m: MetricSpace, k: int) -> OptimalSolution:
    """Optimal by trying every k-subset; keeps the lexicographically first."""
    n = m.n
    best_value = None
    best_set = None
    for combo in combinations(range(n), k):
        value = cost(m, combo)
        if best_value is None or value < best_value:
            best_value = value
            best_set = combo
    return _with_balls(m, best_value, best_set)


def exact_opt_candidate_radius(m: MetricSpace, k: int) -> OptimalSolution:
    """Optimal via binary search over the pairwise distances.

    Coverage at each candidate radius is decided by backtracking search;
    feasibility is monotone in the radius so binary search is sound.
    """
    n = m.n
    iu = np.triu_indices(n, k=1)
    cands = np.unique(m.dist[iu])
    cands = cands[cands > 0]
    lo, hi = 0, len(cands) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        radius = cands[mid]
        if _feasible(_cover_masks(m, radius), n, k):
            best = radius
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        raise AssertionError("even the largest pairwise distance is infeasible")
    value = int(best) if m.mode == "int" else float(best)
    facilities = _lex_smallest_cover(_cover_masks(m, best), n, k)
    return _with_balls(m, value, facilities)


def exact_opt(m: MetricSpace, k: int, *, cap: int = 20,
              strategy: str = "auto") -> OptimalSolution:
    """Certified optimal k-center solution for a small instance.

    The optimum value is one of the pairwise distances (or 0 when k = n).
    When several optimal sets exist the lexicographically smallest is
    returned, so downstream verifiers are reproducible.
    """
    n = m.n
    if not (1 <= k <= n):
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if n > cap:
        raise OracleCapError(f"exact oracle cap exceeded (n={n} > cap={cap})")
    if k == n:
        zero = 0 if m.mode == "int" else 0.0
        return _with_balls(m, zero, range(n))
    if strategy == "auto":
        strategy = "enumeration" if n <= 14 else "candidate-radius"
    if strategy == "enumeration":
        return exact_opt_enumeration(m, k)
    if strategy == "candidate-radius":
        return exact_opt_candidate_radius(m, k)
    raise ValueError(f"unknown strategy {strategy!r}")
