"""Consolidations: the potential function behind the 2k upper bound.

A consolidation of a facility set F is a family of point sets that covers F,
where every set has diameter at most twice the optimum, and every pair of
facilities sharing an optimal ball lands together in some set.  The
consolidation number is the least possible family size; along a reverse
greedy trace it drops by at least one between consecutive critical states,
which is what `verify_gamma_decrement` checks empirically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .exact import OptimalSolution
from .kcenter import Trace
from .metric import FLOAT_EPS, MetricSpace


class GammaCapError(RuntimeError):
    """Consolidation-number brute force would exceed its configured caps."""

    def __init__(self, message: str, lower_bound: int | None = None):
        super().__init__(message)
        self.lower_bound = lower_bound


@dataclass(frozen=True)
class Consolidation:
    """A candidate family together with the context it is judged against."""

    sets: tuple[frozenset[int], ...]
    metric: MetricSpace
    opt_value: int | float
    balls: tuple[frozenset[int], ...]
    facilities: frozenset[int]


@dataclass
class ConsolidationReport:
    valid: bool
    violated: str | None = None
    witness: tuple | None = None

    def __str__(self) -> str:
        if self.valid:
            return "valid"
        return f"{self.violated} violation at {self.witness}"


def is_consolidation(candidate: Consolidation) -> ConsolidationReport:
    """Check covering, diameter, and optimal pairs; report the first failure."""
    m = candidate.metric
    limit = 2 * candidate.opt_value + m.tol()
    union = frozenset().union(*candidate.sets) if candidate.sets else frozenset()

    for f in sorted(candidate.facilities):
        if f not in union:
            return ConsolidationReport(False, "covering", (f,))

    for s, part in enumerate(candidate.sets):
        members = sorted(part)
        for x, y in combinations(members, 2):
            if m.dist[x, y] > limit:
                return ConsolidationReport(False, "diameter", (s, x, y))

    for t, ball_t in enumerate(candidate.balls):
        shared = sorted(candidate.facilities & ball_t)
        for f, g in combinations(shared, 2):
            if not any(f in part and g in part for part in candidate.sets):
                return ConsolidationReport(False, "optimal-pairs", (t, f, g))

    return ConsolidationReport(True)


def _maximal_cliques(adjacency: list[set[int]]) -> list[frozenset[int]]:
    """Bron-Kerbosch with pivoting."""
    cliques: list[frozenset[int]] = []

    def expand(clique: set[int], candidates: set[int], excluded: set[int]):
        if not candidates and not excluded:
            cliques.append(frozenset(clique))
            return
        pivot = max(candidates | excluded,
                    key=lambda v: len(adjacency[v] & candidates))
        for v in sorted(candidates - adjacency[pivot]):
            expand(clique | {v}, candidates & adjacency[v], excluded & adjacency[v])
            candidates.remove(v)
            excluded.add(v)

    expand(set(), set(range(len(adjacency))), set())
    return cliques


def threshold_adjacency(m: MetricSpace, opt_value) -> list[set[int]]:
    """Graph on all points with an edge wherever distance <= 2 * optimum."""
    limit = 2 * opt_value + m.tol()
    return [
        {int(q) for q in range(m.n) if q != p and m.dist[p, q] <= limit}
        for p in range(m.n)
    ]


def required_pairs(opt: OptimalSolution, facilities: frozenset[int]) -> frozenset:
    """Facility pairs that share an optimal ball and must be co-resident."""
    pairs = set()
    for ball_t in opt.balls:
        shared = sorted(facilities & ball_t)
        pairs.update(combinations(shared, 2))
    return frozenset(pairs)


def gamma(m: MetricSpace, opt: OptimalSolution, facilities, *,
          n_cap: int = 40, clique_cap: int = 2000,
          search_budget: int = 5_000_000) -> int:
    """Exact consolidation number by brute force over maximal cliques.

    The search space is restricted to maximal cliques of the threshold
    graph.  This is lossless: a set has diameter <= 2*OPT exactly when it is
    a clique there, and replacing any member of a valid family by a maximal
    clique containing it preserves all three properties (covering and
    optimal pairs survive under supersets, and a superset clique still has
    diameter <= 2*OPT).  So some minimum-size family consists of maximal
    cliques only.
    """
    facilities = frozenset(facilities)
    if not facilities:
        raise ValueError("consolidation number undefined for empty facility set")
    if m.n > n_cap:
        raise GammaCapError(
            f"gamma brute force infeasible: n={m.n} > cap={n_cap}")

    cliques = _maximal_cliques(threshold_adjacency(m, opt.opt_value))
    if len(cliques) > clique_cap:
        raise GammaCapError(
            f"gamma brute force infeasible: {len(cliques)} maximal cliques "
            f"> cap={clique_cap}")

    needed = required_pairs(opt, facilities)

    # Collapse cliques to (facility cover, pairs satisfied) signatures and
    # drop dominated ones; only those two components matter to validity.
    signatures: list[tuple[frozenset[int], frozenset]] = []
    for clique in cliques:
        cover = clique & facilities
        pairs = frozenset(p for p in needed if p[0] in clique and p[1] in clique)
        if not cover:
            continue
        dominated = False
        kept = []
        for other_cover, other_pairs in signatures:
            if cover <= other_cover and pairs <= other_pairs:
                dominated = True
                kept.append((other_cover, other_pairs))
            elif not (other_cover <= cover and other_pairs <= pairs):
                kept.append((other_cover, other_pairs))
        if not dominated:
            kept.append((cover, pairs))
        signatures = kept

    k = len(opt.balls)
    for size in range(1, k + 1):
        if comb(len(signatures), size) > search_budget:
            raise GammaCapError(
                f"gamma brute force infeasible: C({len(signatures)},{size}) "
                f"combinations exceed budget", lower_bound=size)
        for combo in combinations(signatures, size):
            cover = frozenset().union(*(c for c, _ in combo))
            if not facilities <= cover:
                continue
            pairs = frozenset().union(*(p for _, p in combo))
            if needed <= pairs:
                return size
    raise AssertionError("the optimal balls themselves form a consolidation; "
                         "search must succeed by size k")


def critical_indices(trace: Trace, opt_value, eps: float = FLOAT_EPS) -> dict[int, int]:
    """Map each threshold level l to the last step index still within 2l*OPT.

    Level l is present exactly when the trace's cost eventually exceeds
    2*l*opt_value; by monotonicity the crossing index is unique.
    """
    if opt_value <= 0:
        raise ValueError("critical indices need a positive optimum value")
    costs = trace.cost_sequence()
    for a, b in zip(costs, costs[1:]):
        if b < a:
            raise ValueError("trace cost sequence must be nondecreasing")
    exact = all(isinstance(c, int) for c in costs) and isinstance(opt_value, int)
    tol = 0 if exact else eps

    entries: dict[int, int] = {}
    final = costs[-1]
    level = 0
    while final > 2 * level * opt_value + tol:
        threshold = 2 * level * opt_value
        index = max(i for i, c in enumerate(costs) if c <= threshold + tol)
        entries[level] = index
        level += 1
    return entries


@dataclass
class GammaDecrementReport:
    """Empirical check that the consolidation number steps down between
    consecutive critical states, plus the closing accounting bound."""

    status: str
    premise_holds: bool
    critical: dict[int, int] = field(default_factory=dict)
    gamma_values: dict[int, int] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)
    accounting_ok: bool | None = None
    complete: bool = True
    note: str | None = None

    @property
    def ok(self) -> bool:
        return self.status in ("ok", "premise not applicable", "no critical states")

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "premise_holds": self.premise_holds,
            "critical_indices": {str(l): i for l, i in sorted(self.critical.items())},
            "gamma": {str(l): g for l, g in sorted(self.gamma_values.items())},
            "violations": self.violations,
            "accounting_ok": self.accounting_ok,
            "complete": self.complete,
            "note": self.note,
        }


def verify_gamma_decrement(m: MetricSpace, trace: Trace, opt: OptimalSolution,
                           *, n_cap: int = 40, clique_cap: int = 2000) -> GammaDecrementReport:
    """Check the potential drop along a trace, against a supplied optimum.

    Applies only when some optimal ball keeps at least two of the final
    facilities; results are reported for the given optimum, not quantified
    over all optima.
    """
    premise = any(len(ball_t & trace.final) >= 2 for ball_t in opt.balls)
    if not premise:
        return GammaDecrementReport(status="premise not applicable",
                                    premise_holds=False)

    critical = critical_indices(trace, opt.opt_value)
    if not critical:
        return GammaDecrementReport(status="no critical states",
                                    premise_holds=True,
                                    note="trace cost never exceeds 0")

    gamma_values: dict[int, int] = {}
    complete = True
    note = None
    for level in sorted(critical):
        try:
            gamma_values[level] = gamma(m, opt, trace.facilities_at(critical[level]),
                                        n_cap=n_cap, clique_cap=clique_cap)
        except GammaCapError as err:
            complete = False
            note = str(err)
            break

    violations = []
    levels = sorted(gamma_values)
    for a, b in zip(levels, levels[1:]):
        if gamma_values[b] >= gamma_values[a]:
            violations.append(
                f"gamma did not decrease from level {a} ({gamma_values[a]}) "
                f"to level {b} ({gamma_values[b]})")

    accounting_ok = None
    if complete and gamma_values:
        l_bar = max(critical)
        drop = gamma_values[0] - gamma_values[l_bar]
        accounting_ok = l_bar <= drop <= len(opt.balls) - 1
        if not accounting_ok:
            violations.append(
                f"accounting failed: l_bar={l_bar}, gamma drop={drop}, "
                f"k-1={len(opt.balls) - 1}")

    if not complete:
        status = "incomplete"
    elif violations:
        status = "violated"
    else:
        status = "ok"
    return GammaDecrementReport(status=status, premise_holds=True,
                                critical=critical, gamma_values=gamma_values,
                                violations=violations, accounting_ok=accounting_ok,
                                complete=complete, note=note)
