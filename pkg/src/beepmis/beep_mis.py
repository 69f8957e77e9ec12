"""Beep-model MIS: estimation interval, marking interval, final slot.

Each emulated round is ``2*I + 1`` slots long:

* estimation interval (``I`` slots): beep with probability ``p``; count
  listening slots ``c`` and heard beeps ``b``; then classify the
  neighborhood as HIGH or LOW and halve or double ``p``.
* marking interval (``I`` slots): get marked with probability ``p``;
  a marked node beeps in a uniform random half of the slots and joins the
  candidate set if it hears nothing in the others.
* final slot: candidates beep and decide IN; listeners that hear a beep
  decide OUT.

Desire-levels are stored as exponents: ``p = 2**-k`` with ``k >= 1``.

Draw schedule (per node, per global slot ``s``): position ``2*s`` is the
slot's primary draw (beep coin in the estimation interval, subset key in
the marking interval); position ``2*s + 1`` is auxiliary (the
classification tie-break coin at the last estimation slot and the
marking coin at the first marking slot).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence

from .channel import Decision, SlotAction
from .coins import HALF, NodeStream, below_power

LN_1500 = math.log(1500)
INTERVAL_FACTOR = 2000
BETA = 1300
GAMMA = 80 * BETA  # 104000
MIN_INTERVAL = 9


class Estimate(str, enum.Enum):
    HIGH = "HIGH"
    LOW = "LOW"


class Phase(str, enum.Enum):
    EST_INTERVAL = "EST_INTERVAL"
    MARK_INTERVAL = "MARK_INTERVAL"
    FINAL_SLOT = "FINAL_SLOT"


@dataclass(frozen=True)
class ProtocolParams:
    """Constants and derived lengths for one run.

    ``scale`` shrinks both the interval length and the round count so that
    runs are feasible; ``scale=1`` gives the unscaled constants.
    """

    eps: float
    delta_bound: int
    beta: int = BETA
    gamma: int = GAMMA
    scale: float = 1.0
    max_rounds: int | None = None

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.delta_bound < 0:
            raise ValueError("delta_bound must be nonnegative")
        if self.max_rounds is not None and self.max_rounds < self.rounds:
            raise ValueError(f"max_rounds={self.max_rounds} is below R={self.rounds}")

    @staticmethod
    def base_interval(eps: float) -> float:
        return INTERVAL_FACTOR * (LN_1500 + math.log(2 / eps))

    @classmethod
    def with_interval(cls, interval: int, eps: float, delta_bound: int, **kw) -> "ProtocolParams":
        """Pick ``scale`` so the derived interval length equals ``interval``."""
        if interval < MIN_INTERVAL:
            raise ValueError(f"interval must be >= {MIN_INTERVAL}")
        # ceil(I - 1/2) == I, which avoids float round-up at exact integers
        scale = (interval - 0.5) / cls.base_interval(eps)
        params = cls(eps=eps, delta_bound=delta_bound, scale=scale, **kw)
        assert params.interval == interval
        return params

    @property
    def interval(self) -> int:
        return max(MIN_INTERVAL, math.ceil(self.scale * self.base_interval(self.eps)))

    @property
    def rounds(self) -> int:
        logs = math.log2(max(2, self.delta_bound)) + math.log2(2 / self.eps)
        return max(1, math.ceil(self.scale * self.gamma * logs))

    @property
    def local_rounds(self) -> int:
        """Round count of the LOCAL baseline (uses ``beta``)."""
        logs = math.log2(max(2, self.delta_bound)) + math.log2(2 / self.eps)
        return max(1, math.ceil(self.scale * self.beta * logs))

    @property
    def round_length(self) -> int:
        return 2 * self.interval + 1

    @property
    def slot_budget(self) -> int:
        return self.rounds * self.round_length

    @property
    def round_cap(self) -> int:
        return self.max_rounds if self.max_rounds is not None else 2 * self.rounds

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.update(interval=self.interval, rounds=self.rounds)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ProtocolParams":
        d = dict(d)
        interval = d.pop("interval", None)
        d.pop("rounds", None)
        if interval is not None and "scale" not in d:
            return cls.with_interval(interval, **d)
        params = cls(**d)
        if interval is not None and interval != params.interval:
            raise ValueError(f"interval {interval} disagrees with scale (derives {params.interval})")
        return params

    def evolve(self, **changes) -> "ProtocolParams":
        return replace(self, **changes)


# -- pure step functions -------------------------------------------------------------

def est_interval_action(k: int, draw: int) -> SlotAction:
    """Beep with probability ``2**-k``."""
    return SlotAction.BEEP if below_power(draw, k) else SlotAction.LISTEN


def classify(c: int, b: int, interval: int, coin: int | None = None) -> Estimate:
    """HIGH iff ``b/c > 1/5``; a fair coin decides when ``c <= I/3``."""
    if 3 * c <= interval:
        if coin is None:
            raise ValueError("c <= I/3 requires a coin draw")
        return Estimate.HIGH if coin < HALF else Estimate.LOW
    return Estimate.HIGH if 5 * b > c else Estimate.LOW


def update_exponent(k: int, est: Estimate) -> int:
    if k < 1:
        raise ValueError(f"desire-level exponent must be >= 1, got {k}")
    return k + 1 if est is Estimate.HIGH else max(1, k - 1)


def update_desire(p: Fraction, est: Estimate) -> Fraction:
    """HIGH halves ``p``; LOW doubles it, capped at 1/2."""
    k = exponent_of(p)
    return Fraction(1, 2 ** update_exponent(k, est))


def exponent_of(p: Fraction) -> int:
    p = Fraction(p)
    if p.numerator != 1 or p.denominator < 2 or p.denominator & (p.denominator - 1):
        raise ValueError(f"desire-level must be 2**-k with k >= 1, got {p}")
    return p.denominator.bit_length() - 1


def select_half(keys: Sequence[int]) -> frozenset[int]:
    """Offsets of the ``len(keys)//2`` smallest keys; ties go to the earlier slot."""
    order = sorted(range(len(keys)), key=lambda j: (keys[j], j))
    return frozenset(order[: len(keys) // 2])


def mark_interval_begin(k: int, mark_draw: int, key_draws: Sequence[int]) -> tuple[bool, frozenset[int]]:
    """Marked with probability ``2**-k``; if marked, pick half the slots to beep in."""
    if not below_power(mark_draw, k):
        return False, frozenset()
    return True, select_half(key_draws)


def mark_interval_end(marked: bool, heard_any: bool) -> bool:
    return marked and not heard_any


def final_slot(in_m: bool, heard: bool | None) -> Decision:
    if in_m:
        return Decision.IN
    return Decision.OUT if heard else Decision.UNDECIDED


# -- draw positions --------------------------------------------------------------------

def primary_index(slot: int) -> int:
    return 2 * slot


def aux_index(slot: int) -> int:
    return 2 * slot + 1


def round_start(rnd: int, interval: int) -> int:
    return rnd * (2 * interval + 1)


def classify_coin_index(rnd: int, interval: int) -> int:
    return aux_index(round_start(rnd, interval) + interval - 1)


def mark_coin_index(rnd: int, interval: int) -> int:
    return aux_index(round_start(rnd, interval) + interval)


# -- state machine ---------------------------------------------------------------------

@dataclass
class NodeState:
    node: int
    k: int = 1
    c: int = 0
    b: int = 0
    beeped: int = 0
    phase: Phase = Phase.EST_INTERVAL
    slot_in_phase: int = 0
    marked: bool = False
    beep_slots: frozenset[int] = field(default_factory=frozenset)
    heard_any: bool = False
    in_m: bool = False
    decision: Decision = Decision.UNDECIDED
    decision_slot: int | None = None
    # (k during interval, c, b, estimate, coin used) of the last finished estimation interval
    last_estimate: tuple[int, int, int, Estimate, bool] | None = None

    @property
    def p(self) -> Fraction:
        return Fraction(1, 2 ** self.k)


class BeepMIS:
    """The beep-model MIS protocol as a :class:`~beepmis.channel.NodeProtocol`."""

    name = "beep"

    def __init__(self, params: ProtocolParams):
        self.params = params
        self.interval = params.interval
        self.round_length = params.round_length

    def describe(self) -> dict[str, Any]:
        return self.params.to_dict()

    def init_state(self, node: int) -> NodeState:
        return NodeState(node)

    def _locate(self, slot: int) -> tuple[int, Phase, int]:
        rnd, off = divmod(slot, self.round_length)
        if off < self.interval:
            return rnd, Phase.EST_INTERVAL, off
        if off < 2 * self.interval:
            return rnd, Phase.MARK_INTERVAL, off - self.interval
        return rnd, Phase.FINAL_SLOT, 0

    def act(self, st: NodeState, slot: int, coins: NodeStream) -> SlotAction:
        rnd, phase, j = self._locate(slot)
        st.phase, st.slot_in_phase = phase, j
        if phase is Phase.EST_INTERVAL:
            if j == 0:
                st.c = st.b = st.beeped = 0
            return est_interval_action(st.k, coins.draw(primary_index(slot)))
        if phase is Phase.MARK_INTERVAL:
            if j == 0:
                mark_draw = coins.draw(aux_index(slot))
                keys: Sequence[int] = ()
                if below_power(mark_draw, st.k):
                    keys = [coins.draw(primary_index(slot + i)) for i in range(self.interval)]
                st.marked, st.beep_slots = mark_interval_begin(st.k, mark_draw, keys)
                st.heard_any = False
            return SlotAction.BEEP if st.marked and j in st.beep_slots else SlotAction.LISTEN
        return SlotAction.BEEP if st.in_m else SlotAction.LISTEN

    def observe(self, st: NodeState, slot: int, action: SlotAction, heard: bool | None,
                coins: NodeStream) -> Decision | None:
        phase, j = st.phase, st.slot_in_phase
        listening = action is SlotAction.LISTEN
        if phase is Phase.EST_INTERVAL:
            if listening:
                st.c += 1
                st.b += bool(heard)
            else:
                st.beeped += 1
            if j == self.interval - 1:
                coin_used = 3 * st.c <= self.interval
                coin = coins.draw(aux_index(slot)) if coin_used else None
                est = classify(st.c, st.b, self.interval, coin)
                st.last_estimate = (st.k, st.c, st.b, est, coin_used)
                st.k = update_exponent(st.k, est)
            return None
        st.last_estimate = None
        if phase is Phase.MARK_INTERVAL:
            if st.marked and listening and heard:
                st.heard_any = True
            if j == self.interval - 1:
                st.in_m = mark_interval_end(st.marked, st.heard_any)
            return None
        d = final_slot(st.in_m, heard)
        st.marked = st.in_m = False
        st.beep_slots = frozenset()
        if d is Decision.UNDECIDED:
            return None
        st.decision, st.decision_slot = d, slot
        return d

    def snapshot(self, st: NodeState) -> dict[str, Any]:
        snap: dict[str, Any] = {"k": st.k, "c": st.c, "b": st.b, "phase": st.phase.value,
                                "marked": st.marked}
        if st.last_estimate is not None:
            k, c, b, est, coin = st.last_estimate
            snap["est"] = [k, c, b, est is Estimate.HIGH, coin]
        return snap


def run_beep_mis(g, params: ProtocolParams, coins, verbosity: str = "full", channel=None,
                 max_slots: int | None = None):
    """Reference per-slot run of the protocol on ``g``; returns a Trace."""
    from .channel import native_channel, run_protocol
    from .coins import CoinSource

    if not isinstance(coins, CoinSource):
        coins = CoinSource(coins)
    if max_slots is None:
        max_slots = params.round_cap * params.round_length
    return run_protocol(g, BeepMIS(params), coins, max_slots,
                        channel=channel or native_channel, verbosity=verbosity)
