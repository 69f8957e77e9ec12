"""Abstract MAC layer with progress bound and abort, and a beep-slot adapter.

Time is measured in integer units. Beep slot ``t`` (1-based) occupies the
window ``[(t-1)*f_prog + 1, t*f_prog]``: each beeper injects a broadcast of
"beep" at the window start and an abort at the window end. The abort
takes effect at the end of that time unit, so a delivery scheduled at
``t*f_prog`` still lands.

Scheduler modes decide *when* and *which* messages arrive inside a
window, always honoring the progress guarantee:

* ``adversarial``: exactly one message per eligible receiver, from its
  lowest-id broadcasting neighbor, at the last permissible instant.
* ``random``: one guaranteed message from a uniformly chosen neighbor at
  a uniform time, plus each other broadcasting neighbor with
  probability 1/2.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .channel import SlotAction
from .graph import Graph

BEEP_MESSAGE = "beep"
MODES = ("adversarial", "random")


@dataclass(frozen=True)
class MacParams:
    f_prog: int
    f_ack: int | None = None   # modeled for completeness; never awaited

    def __post_init__(self):
        if self.f_prog < 1:
            raise ValueError("f_prog must be >= 1")
        if self.f_ack is not None and self.f_ack < self.f_prog:
            raise ValueError("f_ack must be >= f_prog")

    @property
    def ack(self) -> int:
        return self.f_prog if self.f_ack is None else self.f_ack

    def window(self, t: int) -> tuple[int, int]:
        """Closed time window that emulates beep slot ``t`` (1-based)."""
        if t < 1:
            raise ValueError("slot index t must be >= 1")
        return (t - 1) * self.f_prog + 1, t * self.f_prog


class EventKind(str, enum.Enum):
    BCAST = "bcast"
    ABORT = "abort"
    RECEIVE = "receive"


_KIND_ORDER = {EventKind.BCAST: 0, EventKind.RECEIVE: 1, EventKind.ABORT: 2}


@dataclass(frozen=True)
class MacEvent:
    kind: EventKind
    node: int
    time: int
    message: str | None = None
    sender: int | None = None

    def sort_key(self):
        return (self.time, _KIND_ORDER[self.kind], self.node, -1 if self.sender is None else self.sender)

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value, "node": self.node, "time": self.time}
        if self.message is not None:
            d["message"] = self.message
        if self.sender is not None:
            d["sender"] = self.sender
        return d


def mac_deliver(g: Graph, broadcasts: Mapping[int, tuple[int, int]], window: tuple[int, int],
                mac: MacParams, mode: str = "adversarial", rng: random.Random | None = None,
                receivers: Iterable[int] | None = None) -> list[MacEvent]:
    """Schedule RECEIVE events inside ``window`` for the given broadcast periods.

    ``broadcasts`` maps a sender to the closed interval during which it is
    broadcasting "beep". A receiver with at least one neighbor broadcasting
    across the whole window gets at least one message by the window's end,
    provided the window spans ``f_prog`` units. Senders that cover only part
    of the window carry no guarantee and are dropped by both modes.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    lo, hi = window
    if hi < lo:
        raise ValueError("empty window")
    if hi - lo + 1 < mac.f_prog:
        return []
    if mode == "random" and rng is None:
        raise ValueError("random mode needs an rng")
    covering = {u for u, (s, e) in broadcasts.items() if s <= lo and e >= hi}
    targets = range(g.n) if receivers is None else sorted(set(receivers))
    events = []
    for v in targets:
        senders = [u for u in g.adj[v] if u in covering]
        if not senders:
            continue
        if mode == "adversarial":
            events.append(MacEvent(EventKind.RECEIVE, v, hi, BEEP_MESSAGE, senders[0]))
            continue
        first = rng.choice(senders)
        events.append(MacEvent(EventKind.RECEIVE, v, rng.randint(lo, hi), BEEP_MESSAGE, first))
        for u in senders:
            if u != first and rng.random() < 0.5:
                events.append(MacEvent(EventKind.RECEIVE, v, rng.randint(lo, hi), BEEP_MESSAGE, u))
    return sorted(events, key=MacEvent.sort_key)


def emulate_beep_slot(g: Graph, t: int, beepers: Iterable[int], mac: MacParams,
                      mode: str = "adversarial", rng: random.Random | None = None,
                      listeners: Iterable[int] | None = None) -> tuple[dict[int, bool], list[MacEvent]]:
    """Emulate beep slot ``t`` on the MAC layer.

    Returns ``{listener: heard}`` and the slot's event log. Listeners
    default to every non-beeping node.
    """
    lo, hi = mac.window(t)
    beepers = sorted(set(beepers))
    bset = set(beepers)
    if listeners is None:
        listeners = [v for v in range(g.n) if v not in bset]
    else:
        listeners = [v for v in listeners if v not in bset]
    events = [MacEvent(EventKind.BCAST, u, lo, BEEP_MESSAGE) for u in beepers]
    received = mac_deliver(g, {u: (lo, hi) for u in beepers}, (lo, hi), mac, mode, rng,
                           receivers=listeners)
    events.extend(received)
    events.extend(MacEvent(EventKind.ABORT, u, hi) for u in beepers)
    heard = {v: False for v in listeners}
    for ev in received:
        if lo <= ev.time <= hi:
            heard[ev.node] = True
    return heard, sorted(events, key=MacEvent.sort_key)


@dataclass
class MacChannel:
    """Engine channel that resolves every beep slot through the MAC layer.

    Plug into :func:`beepmis.channel.run_protocol` as ``channel=``. ``clock``
    is the MAC time consumed so far.
    """

    mac: MacParams
    mode: str = "adversarial"
    seed: int = 0
    keep_log: bool = False
    clock: int = 0
    log: list[MacEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self._rng = random.Random(self.seed)

    def __call__(self, g: Graph, actions: Mapping[int, SlotAction], slot: int) -> dict[int, bool]:
        t = slot + 1
        beepers = [v for v, a in actions.items() if a is SlotAction.BEEP]
        listeners = [v for v, a in actions.items() if a is SlotAction.LISTEN]
        heard, events = emulate_beep_slot(g, t, beepers, self.mac, self.mode, self._rng, listeners)
        self.clock = t * self.mac.f_prog
        if self.keep_log:
            self.log.extend(events)
        return heard

    def log_jsonl(self) -> str:
        return "".join(json.dumps(e.to_json(), sort_keys=True, separators=(",", ":")) + "\n"
                       for e in self.log)


def run_beep_mis_over_mac(g: Graph, params, coins, mac: MacParams, mode: str = "adversarial",
                          scheduler_seed: int = 0, verbosity: str = "full", keep_log: bool = False):
    """Reference beep-MIS run with every slot emulated on the MAC layer.

    Returns ``(trace, channel)``; ``channel.clock`` is the MAC time used.
    """
    from .beep_mis import run_beep_mis

    channel = MacChannel(mac, mode, scheduler_seed, keep_log)
    trace = run_beep_mis(g, params, coins, verbosity=verbosity, channel=channel)
    trace.header["mac"] = {"f_prog": mac.f_prog, "f_ack": mac.ack, "mode": mode,
                           "scheduler_seed": scheduler_seed, "time_units": channel.clock}
    return trace, channel
