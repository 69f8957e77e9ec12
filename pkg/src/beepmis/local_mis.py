"""LOCAL-model MIS baseline with exact neighbor information.

Order within a round: every node computes its effective degree from the
current desire-levels, all nodes update, then mark with the updated
level, then marked nodes with no marked neighbor join and are removed
together with their neighbors. Node ``v`` draws its marking coin at
position ``r`` of its stream in round ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from .channel import TRACE_SCHEMA, Decision, SlotRecord, Trace
from .coins import CoinSource, below_power
from .graph import Graph

JOIN_THRESHOLD = 2


@dataclass
class LocalNodeState:
    k: int = 1
    decision: Decision = Decision.UNDECIDED
    active: bool = True

    @property
    def p(self) -> Fraction:
        return Fraction(1, 2 ** self.k)


def effective_degree(g: Graph, v: int, states: Mapping[int, LocalNodeState]) -> Fraction:
    """Sum of the desire-levels of ``v``'s still-active neighbors."""
    return sum((states[u].p for u in g.adj[v] if states[u].active), Fraction(0))


def local_round(g: Graph, states: dict[int, LocalNodeState], coins: CoinSource,
                rnd: int) -> tuple[list[int], list[tuple[int, Decision]]]:
    """Advance all active nodes by one synchronous round, in place.

    Returns the marked nodes and the decisions made this round.
    """
    active = [v for v in range(g.n) if states[v].active]
    degrees = {v: effective_degree(g, v, states) for v in active}
    for v in active:
        st = states[v]
        st.k = st.k + 1 if degrees[v] >= JOIN_THRESHOLD else max(1, st.k - 1)
    marked = {v for v in active if below_power(coins.draw(v, rnd), states[v].k)}
    joiners = [v for v in sorted(marked) if not any(u in marked for u in g.adj[v])]
    decisions: list[tuple[int, Decision]] = []
    removed: set[int] = set()
    for v in joiners:
        decisions.append((v, Decision.IN))
        removed.add(v)
    for v in joiners:
        for u in g.adj[v]:
            if states[u].active and u not in removed:
                removed.add(u)
                decisions.append((u, Decision.OUT))
    for v, d in decisions:
        states[v].decision = d
        states[v].active = False
    return sorted(marked), decisions


def run_local_mis(g: Graph, coins: CoinSource, max_rounds: int, verbosity: str = "full",
                  params: Mapping[str, Any] | None = None) -> Trace:
    """Run rounds until every node decides or ``max_rounds`` elapse.

    The trace uses one record per round; ``beepers`` holds the marked nodes.
    """
    if max_rounds <= 0:
        raise ValueError("max_rounds must be positive")
    states = {v: LocalNodeState() for v in range(g.n)}
    records: list[SlotRecord] = []
    rnd = 0
    while rnd < max_rounds and any(st.active for st in states.values()):
        before = [v for v in range(g.n) if states[v].active]
        marked, decisions = local_round(g, states, coins, rnd)
        if verbosity == "full":
            records.append(SlotRecord(slot=rnd, decisions=decisions, beepers=marked, heard=[],
                                      snapshot={v: {"k": states[v].k} for v in before}))
        elif decisions:
            records.append(SlotRecord(slot=rnd, decisions=decisions))
        rnd += 1
    header = {
        "schema": TRACE_SCHEMA,
        "unit": "round",
        "protocol": "local",
        "n": g.n,
        "edges": [list(e) for e in g.edges()],
        "seed": coins.seed,
        "scripted": sorted(coins.scripts),
        "params": dict(params or {}),
        "verbosity": verbosity,
        "slots_run": rnd,
        "truncated": any(st.active for st in states.values()),
    }
    return Trace(header, records)
