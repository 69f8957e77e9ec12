"""Slot-synchronous beep channel, generic lockstep engine, and traces.

A listener learns one bit per slot: whether at least one neighbor
beeped. Beepers learn nothing. The engine drives any per-node state
machine implementing :class:`NodeProtocol` and records a :class:`Trace`.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Mapping, Protocol

from .coins import CoinSource, NodeStream
from .graph import Graph

TRACE_SCHEMA = 1


class SlotAction(str, enum.Enum):
    BEEP = "beep"
    LISTEN = "listen"


class Decision(str, enum.Enum):
    IN = "IN"
    OUT = "OUT"
    UNDECIDED = "UNDECIDED"


class ChannelError(ValueError):
    pass


class TraceError(ValueError):
    pass


def run_slot(g: Graph, actions: Mapping[int, SlotAction],
             active: Iterable[int] | None = None) -> dict[int, bool]:
    """Resolve one slot: ``{listener: heard_beep}``.

    ``active`` restricts which nodes may act; an action for any other node
    raises :class:`ChannelError`.
    """
    if active is not None:
        allowed = set(active)
        stray = [v for v in actions if v not in allowed]
        if stray:
            raise ChannelError(f"actions supplied for removed nodes {sorted(stray)}")
    heard: dict[int, bool] = {}
    beepers = []
    for v, a in actions.items():
        if a is SlotAction.BEEP:
            beepers.append(v)
        else:
            heard[v] = False
    for u in beepers:
        for w in g.adj[u]:
            if w in heard:
                heard[w] = True
    return heard


# -- traces -----------------------------------------------------------------------

VERBOSITY = ("full", "decisions")


@dataclass
class SlotRecord:
    slot: int
    decisions: list[tuple[int, Decision]] = field(default_factory=list)
    beepers: list[int] | None = None
    heard: list[int] | None = None
    snapshot: dict[int, dict[str, Any]] | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"slot": self.slot,
                               "decisions": [[v, d.value] for v, d in self.decisions]}
        if self.beepers is not None:
            out["beepers"] = self.beepers
        if self.heard is not None:
            out["heard"] = self.heard
        if self.snapshot is not None:
            out["snapshot"] = [[v, self.snapshot[v]] for v in sorted(self.snapshot)]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SlotRecord":
        snap = obj.get("snapshot")
        return cls(
            slot=obj["slot"],
            decisions=[(v, Decision(d)) for v, d in obj.get("decisions", [])],
            beepers=obj.get("beepers"),
            heard=obj.get("heard"),
            snapshot=None if snap is None else {v: s for v, s in snap},
        )


@dataclass
class Trace:
    """Header metadata plus ordered slot (or round) records."""

    header: dict[str, Any]
    records: list[SlotRecord]

    @property
    def n(self) -> int:
        return self.header["n"]

    @property
    def verbosity(self) -> str:
        return self.header.get("verbosity", "full")

    @property
    def slots_run(self) -> int:
        return self.header["slots_run"]

    def graph(self) -> Graph:
        return Graph(self.header["n"], self.header.get("edges", []))

    def decision_events(self) -> Iterator[tuple[int, int, Decision]]:
        for rec in self.records:
            for v, d in rec.decisions:
                yield rec.slot, v, d

    def decisions(self) -> dict[int, tuple[Decision, int]]:
        """``{node: (decision, slot)}``; duplicate decisions are a malformed trace."""
        out: dict[int, tuple[Decision, int]] = {}
        for slot, v, d in self.decision_events():
            if d is Decision.UNDECIDED:
                raise TraceError(f"node {v} emitted UNDECIDED as a decision at slot {slot}")
            if v in out:
                raise TraceError(f"node {v} decided twice (slots {out[v][1]} and {slot})")
            out[v] = (d, slot)
        return out

    def check_well_formed(self) -> None:
        last = -1
        for rec in self.records:
            if rec.slot <= last:
                raise TraceError(f"slot index {rec.slot} not increasing after {last}")
            last = rec.slot
        self.decisions()

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "header", **self.header}, sort_keys=True,
                            separators=(",", ":"))]
        lines.extend(json.dumps(r.to_json(), sort_keys=True, separators=(",", ":"))
                     for r in self.records)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise TraceError("empty trace")
        header = json.loads(lines[0])
        if header.pop("type", None) != "header":
            raise TraceError("first line must be the trace header")
        if header.get("schema") != TRACE_SCHEMA:
            raise TraceError(f"unsupported trace schema {header.get('schema')!r}")
        return cls(header, [SlotRecord.from_json(json.loads(ln)) for ln in lines[1:]])


# -- generic engine --------------------------------------------------------------------

class NodeProtocol(Protocol):
    """Per-node state machine driven by :func:`run_protocol`."""

    name: str

    def init_state(self, node: int) -> Any: ...

    def act(self, state: Any, slot: int, coins: NodeStream) -> SlotAction: ...

    def observe(self, state: Any, slot: int, action: SlotAction, heard: bool | None,
                coins: NodeStream) -> Decision | None: ...

    def snapshot(self, state: Any) -> dict[str, Any]: ...

    def describe(self) -> dict[str, Any]: ...


Channel = Callable[[Graph, Mapping[int, SlotAction], int], Mapping[int, bool]]


def native_channel(g: Graph, actions: Mapping[int, SlotAction], slot: int) -> dict[int, bool]:
    return run_slot(g, actions)


def run_protocol(g: Graph, protocol: NodeProtocol, coins: CoinSource, max_slots: int,
                 channel: Channel = native_channel, verbosity: str = "full",
                 header: Mapping[str, Any] | None = None) -> Trace:
    """Run ``protocol`` on every node in lockstep until all decide or ``max_slots``."""
    if max_slots <= 0:
        raise ValueError("max_slots must be positive")
    if verbosity not in VERBOSITY:
        raise ValueError(f"verbosity must be one of {VERBOSITY}")
    full = verbosity == "full"
    states = {v: protocol.init_state(v) for v in range(g.n)}
    streams = {v: coins.stream(v) for v in range(g.n)}
    active = list(range(g.n))
    records: list[SlotRecord] = []
    slot = 0
    while active and slot < max_slots:
        actions = {v: protocol.act(states[v], slot, streams[v]) for v in active}
        heard = channel(g, actions, slot)
        decisions = []
        for v in active:
            d = protocol.observe(states[v], slot, actions[v], heard.get(v), streams[v])
            if d is not None:
                decisions.append((v, d))
        if full:
            records.append(SlotRecord(
                slot=slot,
                decisions=decisions,
                beepers=[v for v in active if actions[v] is SlotAction.BEEP],
                heard=[v for v in active if heard.get(v)],
                snapshot={v: protocol.snapshot(states[v]) for v in active},
            ))
        elif decisions:
            records.append(SlotRecord(slot=slot, decisions=decisions))
        if decisions:
            gone = {v for v, _ in decisions}
            active = [v for v in active if v not in gone]
        slot += 1
    hdr = {
        "schema": TRACE_SCHEMA,
        "unit": "slot",
        "protocol": protocol.name,
        "n": g.n,
        "edges": [list(e) for e in g.edges()],
        "seed": coins.seed,
        "scripted": sorted(coins.scripts),
        "params": protocol.describe(),
        "verbosity": verbosity,
        "slots_run": slot,
        "truncated": bool(active),
    }
    if header:
        hdr.update(header)
    return Trace(hdr, records)
