"""Counter-based per-node random streams.

Every draw is a pure function of ``(seed, node, index)``: a SplitMix64
finalizer applied twice to integer state. There is no hidden generator
state, so a node's stream is reproducible on any platform, can be
evaluated out of order, and overriding one node's stream cannot
perturb another node's.

Draws are 53-bit integers in ``[0, 2**53)``. A draw ``u`` represents the
uniform variate ``u / 2**53``; comparing against a probability ``2**-k``
is the integer test ``u < 2**(53 - k)``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Union

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DRAW_BITS = 53
DRAW_MAX = (1 << DRAW_BITS) - 1
HALF = 1 << (DRAW_BITS - 1)

# Script forms accepted by script_adversary:
#   "min" / "max"          constant lowest / highest draw
#   {index: value}         override specific draw positions
#   callable(index, draw)  arbitrary rule; receives the honest draw
Script = Union[str, Mapping[int, int], Callable[[int, int], int]]

NAMED_SCRIPTS = ("min", "max")


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_key(seed: int) -> int:
    return mix64(seed & MASK64)


def node_key(seed: int, node: int) -> int:
    return mix64(seed_key(seed) + (node + 1) * GOLDEN)


def raw_draw(key: int, index: int) -> int:
    """53-bit draw at position ``index`` of the stream keyed by ``key``."""
    return mix64(key + (index + 1) * GOLDEN) >> (64 - DRAW_BITS)


def derive_seed(master: int, index: int) -> int:
    """Child seed for trial ``index`` of a batch seeded with ``master``."""
    return mix64(seed_key(master) ^ mix64(index + 1))


def below_power(u: int, k: int) -> bool:
    """True iff the draw ``u`` falls below probability ``2**-k``."""
    return k <= DRAW_BITS and u < (1 << (DRAW_BITS - k))


def to_unit(u: int) -> float:
    return u / float(1 << DRAW_BITS)


def _apply_script(script: Script, index: int, honest: int) -> int:
    if isinstance(script, str):
        return 0 if script == "min" else DRAW_MAX
    if callable(script):
        value = script(index, honest)
    else:
        value = script.get(index, honest)
    if not 0 <= value <= DRAW_MAX:
        raise ValueError(f"scripted draw {value} outside [0, 2**53)")
    return value


class CoinSource:
    """Seeded draw streams, one per node, with optional scripted overrides."""

    def __init__(self, seed: int, scripts: Mapping[int, Script] | None = None):
        self.seed = int(seed)
        self.scripts: dict[int, Script] = dict(scripts or {})
        for node, script in self.scripts.items():
            if isinstance(script, str) and script not in NAMED_SCRIPTS:
                raise ValueError(f"unknown script {script!r} for node {node}")
        self._keys: dict[int, int] = {}

    def key(self, node: int) -> int:
        k = self._keys.get(node)
        if k is None:
            k = self._keys[node] = node_key(self.seed, node)
        return k

    def draw(self, node: int, index: int) -> int:
        honest = raw_draw(self.key(node), index)
        script = self.scripts.get(node)
        if script is None:
            return honest
        return _apply_script(script, index, honest)

    def uniform(self, node: int, index: int) -> float:
        return to_unit(self.draw(node, index))

    def stream(self, node: int) -> "NodeStream":
        return NodeStream(self, node)

    def __repr__(self) -> str:
        return f"CoinSource(seed={self.seed}, scripted={sorted(self.scripts)})"


class NodeStream:
    """View of one node's draws; the only randomness a protocol node sees."""

    __slots__ = ("_coins", "node")

    def __init__(self, coins: CoinSource, node: int):
        self._coins = coins
        self.node = node

    def draw(self, index: int) -> int:
        return self._coins.draw(self.node, index)


def script_adversary(coins: CoinSource, nodes: Iterable[int], script: Script) -> CoinSource:
    """Return a copy of ``coins`` where every node in ``nodes`` follows ``script``.

    Nodes outside ``nodes`` keep their streams bit-for-bit.
    """
    scripts = dict(coins.scripts)
    for v in nodes:
        scripts[int(v)] = script
    return CoinSource(coins.seed, scripts)
