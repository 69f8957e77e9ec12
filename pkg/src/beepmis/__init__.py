"""Beep-model maximal independent set: simulator, protocols, verifier."""

from .beep_mis import BeepMIS, Estimate, NodeState, ProtocolParams, run_beep_mis
from .channel import Decision, SlotAction, SlotRecord, Trace, run_protocol, run_slot
from .coins import CoinSource, script_adversary
from .fastsim import DEFAULT_BACKEND, simulate_beep_mis
from .graph import Graph, load_edge_list, save_edge_list
from .local_mis import run_local_mis
from .verifier import Verdict, verify

__all__ = [
    "BeepMIS", "CoinSource", "DEFAULT_BACKEND", "Decision", "Estimate", "Graph", "NodeState",
    "ProtocolParams", "SlotAction", "SlotRecord", "Trace", "Verdict", "load_edge_list",
    "run_beep_mis", "run_local_mis", "run_protocol", "run_slot", "save_edge_list",
    "script_adversary", "simulate_beep_mis", "verify",
]

__version__ = "0.1.0"
