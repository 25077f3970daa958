"""The k-center cost model and the greedy engines.

Facility sets are plain frozensets of point indices.  The reverse greedy
engine re-derives, at every step, the exact marginal cost of deleting each
remaining facility from per-client nearest/second-nearest tables, so a full
run costs O(n^3) comparisons and every recorded step is argmin-verified.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Iterable

import numpy as np

from .metric import MetricSpace


class ScriptedStepError(ValueError):
    """A scripted removal did not lie in the argmin set at its step."""


@dataclass(frozen=True)
class TiePolicy:
    """How reverse greedy picks among facilities tied for minimum marginal cost.

    kind is one of "lowest-index", "seeded-random", or "scripted".  Scripted
    policies name the removal at every step and are validated against the
    argmin set during execution.
    """

    kind: str
    seed: int | None = None
    script: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("lowest-index", "seeded-random", "scripted"):
            raise ValueError(f"unknown tie policy {self.kind!r}")
        if self.kind == "seeded-random" and self.seed is None:
            raise ValueError("seeded-random policy needs a seed")
        if self.kind == "scripted":
            if not self.script:
                raise ValueError("scripted policy needs a removal sequence")
            if len(set(self.script)) != len(self.script):
                raise ValueError("scripted removals must be distinct")

    @classmethod
    def lowest_index(cls) -> "TiePolicy":
        return cls("lowest-index")

    @classmethod
    def seeded_random(cls, seed: int) -> "TiePolicy":
        return cls("seeded-random", seed=seed)

    @classmethod
    def scripted(cls, script: Iterable[int]) -> "TiePolicy":
        return cls("scripted", script=tuple(int(p) for p in script))

    def describe(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


@dataclass(frozen=True)
class TraceStep:
    removed: int
    cost: int | float
    argmin: tuple[int, ...] | None = None


@dataclass
class Trace:
    """A full reverse greedy run: removal order, per-step costs, final set."""

    k: int
    policy: dict
    steps: list[TraceStep]
    final: frozenset[int]
    instance: MetricSpace | None = None
    legality_verified: bool = True

    @property
    def n(self) -> int:
        return self.k + len(self.steps)

    def cost_sequence(self) -> list:
        """Costs of the shrinking facility sets, starting from the full set."""
        return [0] + [s.cost for s in self.steps]

    def facility_sets(self):
        """Yield every intermediate facility set, largest first."""
        current = set(range(self.n))
        yield frozenset(current)
        for s in self.steps:
            current.discard(s.removed)
            yield frozenset(current)

    def facilities_at(self, i: int) -> frozenset[int]:
        """Facility set after the first i removals."""
        removed = {s.removed for s in self.steps[:i]}
        return frozenset(p for p in range(self.n) if p not in removed)


def cost(m: MetricSpace, facilities) -> int | float:
    """Max over all clients of the distance to the nearest facility."""
    fac = sorted(facilities)
    if not fac:
        raise ValueError("cost undefined for empty facility set")
    value = m.dist[:, fac].min(axis=1).max()
    return int(value) if m.mode == "int" else float(value)


def serves(m: MetricSpace, facilities, client: int) -> int:
    """The facility nearest to the client; lowest index on ties."""
    fac = sorted(facilities)
    if not fac:
        raise ValueError("serves undefined for empty facility set")
    row = m.dist[client, fac]
    best = row.min()
    for j, g in enumerate(fac):
        if row[j] <= best + m.tol():
            return g
    raise AssertionError("unreachable")


def _service_tables(m: MetricSpace, fac: list[int]):
    """Per-client (nearest index into fac, nearest dist, second-nearest dist)."""
    d = m.dist[:, fac]
    idx1 = d.argmin(axis=1)
    val1 = d[np.arange(m.n), idx1]
    masked = d.copy()
    if m.mode == "int":
        masked[np.arange(m.n), idx1] = np.iinfo(np.int64).max
    else:
        masked[np.arange(m.n), idx1] = np.inf
    val2 = masked.min(axis=1)
    return idx1, val1, val2


def marginal_costs(m: MetricSpace, facilities) -> dict[int, int | float]:
    """Exact k-center cost after removing each facility in turn.

    Built from nearest/second-nearest tables: removing facility g re-serves
    exactly the clients whose nearest facility was g, at their second-nearest
    distance.  O(n * |facilities|) overall.
    """
    fac = sorted(facilities)
    if len(fac) < 2:
        raise ValueError("marginal costs need at least two facilities")
    idx1, val1, val2 = _service_tables(m, fac)
    nfac = len(fac)

    lowest = np.float64("-inf") if m.mode == "float" else np.int64(-1)
    group_max1 = np.full(nfac, lowest, dtype=val1.dtype)
    group_max2 = np.full(nfac, lowest, dtype=val2.dtype)
    np.maximum.at(group_max1, idx1, val1)
    np.maximum.at(group_max2, idx1, val2)

    # Max of val1 over clients outside group j = max of group_max1 excluding j.
    top = int(group_max1.argmax())
    top_val = group_max1[top]
    rest = np.delete(group_max1, top)
    second_val = rest.max() if rest.size else lowest

    out: dict[int, int | float] = {}
    for j, g in enumerate(fac):
        others = top_val if j != top else second_val
        value = max(others, group_max2[j])
        out[g] = int(value) if m.mode == "int" else float(value)
    return out


def reverse_greedy(m: MetricSpace, k: int, policy: TiePolicy | None = None,
                   *, record_argmin: bool = False, fast: bool = False) -> Trace:
    """Delete the cheapest facility until k remain, under the given tie policy.

    Every step records the removed facility and the exact cost of the
    shrunken set.  Scripted removals are checked for argmin membership
    unless `fast` is set, in which case the script is trusted and only the
    per-step costs are computed (usable for large scripted runs only).
    """
    n = m.n
    if not (1 <= k <= n):
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    policy = policy or TiePolicy.lowest_index()
    if policy.kind == "scripted" and len(policy.script) != n - k:
        raise ValueError(
            f"scripted policy names {len(policy.script)} removals, need {n - k}")
    if fast and policy.kind != "scripted":
        raise ValueError("fast mode only applies to scripted policies")

    rng = Random(policy.seed) if policy.kind == "seeded-random" else None
    current = set(range(n))
    steps: list[TraceStep] = []
    tol = m.tol()

    for i in range(1, n - k + 1):
        if fast:
            removed = policy.script[i - 1]
            if removed not in current:
                raise ScriptedStepError(
                    f"illegal scripted step {i}: facility {removed} already removed")
            current.discard(removed)
            steps.append(TraceStep(removed, cost(m, current)))
            continue

        margins = marginal_costs(m, current)
        minimum = min(margins.values())
        argmin = sorted(g for g, v in margins.items() if v <= minimum + tol)
        if policy.kind == "lowest-index":
            removed = argmin[0]
        elif policy.kind == "seeded-random":
            removed = rng.choice(argmin)
        else:
            removed = policy.script[i - 1]
            if removed not in current:
                raise ScriptedStepError(
                    f"illegal scripted step {i}: facility {removed} already removed")
            if removed not in argmin:
                raise ScriptedStepError(
                    f"illegal scripted step {i}: facility {removed} has marginal "
                    f"cost {margins[removed]} > minimum {minimum}")
        current.discard(removed)
        steps.append(TraceStep(removed, margins[removed],
                               tuple(argmin) if record_argmin else None))

    return Trace(k=k, policy=policy.describe(), steps=steps,
                 final=frozenset(current), instance=m,
                 legality_verified=not fast)


def greedy_farthest_first(m: MetricSpace, k: int, first: int = 0) -> frozenset[int]:
    """Pick `first`, then repeatedly the point farthest from the chosen set."""
    n = m.n
    if not (1 <= k <= n):
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if not (0 <= first < n):
        raise ValueError(f"first point {first} out of range")
    chosen = [first]
    nearest = m.dist[:, first].copy()
    for _ in range(k - 1):
        farthest = nearest.max()
        nxt = int(np.flatnonzero(nearest >= farthest - m.tol())[0])
        chosen.append(nxt)
        np.minimum(nearest, m.dist[:, nxt], out=nearest)
    return frozenset(chosen)


def save_trace(path, trace: Trace) -> None:
    """Trace JSON: integer costs as ints, floating costs as decimal strings."""
    mode_int = all(isinstance(s.cost, int) for s in trace.steps)
    doc = {
        "version": 1,
        "k": trace.k,
        "policy": trace.policy,
        "steps": [
            {"removed": s.removed, "cost": s.cost if mode_int else repr(s.cost)}
            for s in trace.steps
        ],
        "final": sorted(trace.final),
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_trace(path) -> Trace:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != 1:
        raise ValueError("unsupported trace file version")
    steps = [
        TraceStep(s["removed"],
                  s["cost"] if isinstance(s["cost"], int) else float(s["cost"]))
        for s in doc["steps"]
    ]
    return Trace(k=doc["k"], policy=doc["policy"], steps=steps,
                 final=frozenset(doc["final"]), instance=None)
