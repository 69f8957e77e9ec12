"""Correctness checks and termination / estimation statistics for MIS runs."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, NamedTuple, Sequence

import numpy as np

from .channel import Decision, Trace, TraceError
from .graph import Graph

GOOD_HIGH_FLOOR = (1, 10)   # HIGH must imply d >= 1/10
GOOD_LOW_CEILING = 22       # LOW must imply d <= 22


@dataclass
class Verdict:
    decisions: list[Decision]
    slots: list[int | None]

    @classmethod
    def from_trace(cls, trace: Trace) -> "Verdict":
        n = trace.n
        decisions = [Decision.UNDECIDED] * n
        slots: list[int | None] = [None] * n
        for v, (d, slot) in trace.decisions().items():
            decisions[v], slots[v] = d, slot
        return cls(decisions, slots)

    @classmethod
    def from_mapping(cls, n: int, mapping: dict[int, Decision]) -> "Verdict":
        return cls([mapping.get(v, Decision.UNDECIDED) for v in range(n)], [None] * n)

    def nodes(self, d: Decision) -> list[int]:
        return [v for v, x in enumerate(self.decisions) if x is d]


def check_independence(g: Graph, verdict: Verdict) -> list[tuple[int, int]]:
    """Every edge whose endpoints both decided IN."""
    dec = verdict.decisions
    return [(u, v) for u, v in g.edges() if dec[u] is Decision.IN and dec[v] is Decision.IN]


def check_maximality(g: Graph, verdict: Verdict) -> list[int]:
    """OUT nodes with no IN neighbor, followed by every UNDECIDED node."""
    dec = verdict.decisions
    bad = [v for v in range(g.n) if dec[v] is Decision.OUT
           and not any(dec[u] is Decision.IN for u in g.adj[v])]
    return bad + verdict.nodes(Decision.UNDECIDED)


class TemporalViolation(NamedTuple):
    kind: str        # "adjacent-in" or "out-before-in"
    node: int
    other: int | None
    slot: int


def _decided(source: Trace | Verdict) -> dict[int, tuple[Decision, int]]:
    if isinstance(source, Trace):
        return source.decisions()
    out = {}
    for v, (d, t) in enumerate(zip(source.decisions, source.slots)):
        if d is not Decision.UNDECIDED:
            if t is None:
                raise TraceError(f"node {v} decided {d.value} without a slot index")
            out[v] = (d, t)
    return out


def check_local_correctness(g: Graph, source: Trace | Verdict) -> list[TemporalViolation]:
    """Order-aware check of decision events.

    An OUT is justified by a neighbor that went IN at the same slot or earlier.
    Any two adjacent IN decisions are reported once per edge.
    """
    decided = _decided(source)
    found = []
    for v in sorted(decided):
        d, t = decided[v]
        if d is Decision.IN:
            for u in g.adj[v]:
                if u > v and u in decided and decided[u][0] is Decision.IN:
                    found.append(TemporalViolation("adjacent-in", v, u, max(t, decided[u][1])))
        elif not any(u in decided and decided[u][0] is Decision.IN and decided[u][1] <= t
                     for u in g.adj[v]):
            found.append(TemporalViolation("out-before-in", v, None, t))
    return sorted(found, key=lambda x: (x.slot, x.node))


def same_slot_double_joins(g: Graph, trace: Trace) -> list[tuple[int, int]]:
    """Edges whose endpoints both decided IN in the same slot record."""
    pairs = []
    for rec in trace.records:
        ins = {v for v, d in rec.decisions if d is Decision.IN}
        pairs.extend((v, u) for v in sorted(ins) for u in g.adj[v] if u > v and u in ins)
    return sorted(pairs)


# -- termination -------------------------------------------------------------------------

@dataclass
class TerminationStats:
    budget: int
    decided: int
    undecided: int
    within_budget: int
    fraction_within_budget: float
    median_slot: float | None
    p90_slot: float | None
    histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def termination_stats(source: Trace | Verdict, budget: int, bucket: int = 1) -> TerminationStats:
    """Decision-time summary against a slot ``budget``.

    ``fraction_within_budget`` is over all nodes; quantiles are over decided
    nodes only. ``bucket`` groups the histogram (use the round length to get
    a per-round histogram).
    """
    verdict = Verdict.from_trace(source) if isinstance(source, Trace) else source
    slots = [s for s in verdict.slots if s is not None]
    n = len(verdict.slots)
    within = sum(1 for s in slots if s < budget)
    hist = Counter(s // bucket for s in slots)
    return TerminationStats(
        budget=budget,
        decided=len(slots),
        undecided=n - len(slots),
        within_budget=within,
        fraction_within_budget=within / n if n else 1.0,
        median_slot=float(np.median(slots)) if slots else None,
        p90_slot=float(np.percentile(slots, 90)) if slots else None,
        histogram=dict(sorted(hist.items())),
    )


# -- good-node accounting ------------------------------------------------------------------

class IntervalRecord(NamedTuple):
    """One node's finished estimation interval."""

    round: int
    node: int
    k: int          # desire-level exponent in force during the interval
    c: int
    b: int
    high: bool
    coin: bool      # classification fell back to the coin (c <= I/3)


def interval_records(trace: Trace) -> list[IntervalRecord]:
    """Extract estimation-interval summaries from a full-verbosity beep trace."""
    if trace.verbosity != "full":
        raise TraceError("good-node statistics need per-slot snapshots; "
                         "rerun with full trace verbosity")
    params = trace.header.get("params", {})
    length = 2 * params["interval"] + 1
    out = []
    for rec in trace.records:
        for v, snap in (rec.snapshot or {}).items():
            est = snap.get("est")
            if est is not None:
                k, c, b, high, coin = est
                out.append(IntervalRecord(rec.slot // length, v, k, c, b, bool(high), bool(coin)))
    return out


@dataclass
class GoodNodeReport:
    interval: int
    total: int
    good: int
    frequency: float
    analytic_floor: float
    failed_listen: int      # c <= I/3
    failed_high: int        # HIGH but d < 1/10
    failed_low: int         # LOW but d > 22
    per_round: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def is_good(c: int, high: bool, nbr_exponents: Sequence[int], interval: int) -> tuple[bool, str | None]:
    """Good-node test with exact dyadic arithmetic on the true effective degree."""
    if 3 * c <= interval:
        return False, "listen"
    top = max(nbr_exponents, default=0)
    scaled = sum(1 << (top - k) for k in nbr_exponents)   # d * 2**top
    if high:
        num, den = GOOD_HIGH_FLOOR
        if den * scaled < num << top:
            return False, "high"
    elif scaled > GOOD_LOW_CEILING << top:
        return False, "low"
    return True, None


def good_node_stats(g: Graph, source: Trace | Iterable[IntervalRecord],
                    interval: int | None = None) -> GoodNodeReport:
    """Fraction of (node, interval) pairs meeting all three good-node conditions.

    The true effective degree is recomputed from the desire-levels of the
    neighbors that were active during the same interval.
    """
    if isinstance(source, Trace):
        records = interval_records(source)
        interval = source.header["params"]["interval"]
    else:
        records = list(source)
    if interval is None:
        raise ValueError("interval length required for raw interval records")
    by_round: dict[int, dict[int, IntervalRecord]] = defaultdict(dict)
    for r in records:
        by_round[r.round][r.node] = r
    fails = Counter()
    good = 0
    per_round = {}
    for rnd in sorted(by_round):
        recs = by_round[rnd]
        round_good = 0
        for v, r in recs.items():
            exps = [recs[u].k for u in g.adj[v] if u in recs]
            ok, why = is_good(r.c, r.high, exps, interval)
            if ok:
                round_good += 1
            else:
                fails[why] += 1
        good += round_good
        per_round[rnd] = round_good / len(recs)
    total = len(records)
    return GoodNodeReport(
        interval=interval,
        total=total,
        good=good,
        frequency=good / total if total else 1.0,
        analytic_floor=1 - 2 * math.exp(-interval / 100),
        failed_listen=fails["listen"],
        failed_high=fails["high"],
        failed_low=fails["low"],
        per_round=per_round,
    )


# -- full report ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    independence: list[tuple[int, int]]
    maximality: list[int]       # decided OUT nodes lacking an IN neighbor
    undecided: list[int]
    temporal: list[TemporalViolation]

    @property
    def ok(self) -> bool:
        return not (self.independence or self.maximality or self.undecided or self.temporal)

    def violation_count(self) -> int:
        return len(self.independence) + len(self.maximality) + len(self.undecided) + len(self.temporal)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "independence": [list(e) for e in self.independence],
            "maximality": self.maximality,
            "undecided": self.undecided,
            "temporal": [t._asdict() for t in self.temporal],
        }


def verify(g: Graph, source: Trace | Verdict) -> VerificationReport:
    """Run every check; ``source`` may be a trace or a verdict with decision slots."""
    verdict = Verdict.from_trace(source) if isinstance(source, Trace) else source
    undecided = verdict.nodes(Decision.UNDECIDED)
    und = set(undecided)
    return VerificationReport(
        independence=check_independence(g, verdict),
        maximality=[v for v in check_maximality(g, verdict) if v not in und],
        undecided=undecided,
        temporal=check_local_correctness(g, source),
    )
