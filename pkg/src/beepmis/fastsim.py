"""Fast batch simulation of the beep MIS protocol.

Uses the compiled kernel when it was built, otherwise the numpy
implementation. Set ``BEEPMIS_PURE=1`` to force the fallback. Both
produce exactly the decisions, decision slots and interval statistics
of the per-slot reference engine (:func:`beepmis.beep_mis.run_beep_mis`)
for the same seed; they only skip per-slot trace recording.

Only the named adversary scripts ("min", "max") are supported here;
arbitrary scripts need the reference engine.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _fallback
from .beep_mis import ProtocolParams
from .channel import Decision
from .coins import CoinSource
from .graph import Graph
from .verifier import IntervalRecord, Verdict

try:
    if os.environ.get("BEEPMIS_PURE"):
        raise ImportError("compiled kernel disabled by BEEPMIS_PURE")
    from ._kernel import simulate as _compiled_simulate
except ImportError:
    _compiled_simulate = None

BACKENDS = ("compiled", "python")
DEFAULT_BACKEND = "compiled" if _compiled_simulate is not None else "python"

_DECODE = (Decision.UNDECIDED, Decision.IN, Decision.OUT)
_MODES = {"min": _fallback.MODE_MIN, "max": _fallback.MODE_MAX}


@dataclass
class FastResult:
    verdict: Verdict
    rounds_run: int
    slots_run: int
    backend: str
    records: list[IntervalRecord] = field(default_factory=list)


def _backend(name: str | None):
    name = name or DEFAULT_BACKEND
    if name == "compiled":
        if _compiled_simulate is None:
            raise RuntimeError("compiled kernel is not available; reinstall with a C compiler "
                               "or use backend='python'")
        return name, _compiled_simulate
    if name == "python":
        return name, _fallback.simulate
    raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")


def script_modes(coins: CoinSource, n: int) -> np.ndarray | None:
    if not coins.scripts:
        return None
    modes = np.zeros(n, dtype=np.int8)
    for v, script in coins.scripts.items():
        if not isinstance(script, str):
            raise ValueError(f"node {v}: only named scripts {sorted(_MODES)} run on the fast "
                             "path; use the reference engine for custom scripts")
        if 0 <= v < n:
            modes[v] = _MODES[script]
    return modes


def simulate_beep_mis(g: Graph, params: ProtocolParams, coins: CoinSource | int,
                      watch: Iterable[int] | None = None, record: bool = False,
                      backend: str | None = None) -> FastResult:
    """Run until every node (or every node in ``watch``) decides, or the round cap."""
    if not isinstance(coins, CoinSource):
        coins = CoinSource(coins)
    name, fn = _backend(backend)
    indptr, indices = g.csr
    mask = None
    if watch is not None:
        mask = np.zeros(g.n, dtype=np.uint8)
        mask[list(watch)] = 1
    decision, slots, rounds, raw = fn(indptr, indices, g.n, coins.seed, params.interval,
                                      params.round_cap, script_modes(coins, g.n), mask, record)
    verdict = Verdict([_DECODE[d] for d in decision.tolist()],
                      [None if s < 0 else s for s in slots.tolist()])
    records = [IntervalRecord(*rec) for rec in raw]
    return FastResult(verdict, rounds, rounds * params.round_length, name, records)
