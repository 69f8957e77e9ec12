"""Pure-Python (numpy) beep-MIS batch simulator.

Whole intervals are evaluated at once: during an estimation interval a
node's beeps do not depend on what it hears, and during a marking
interval the beep pattern is fixed at the interval start, so each
interval reduces to a few array operations and one sparse product.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .coins import DRAW_BITS, DRAW_MAX, GOLDEN, HALF, node_key

_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(GOLDEN)
_SHIFT = np.uint64(64 - DRAW_BITS)

MODE_HONEST, MODE_MIN, MODE_MAX = 0, 1, 2
UNDECIDED, IN, OUT = 0, 1, 2


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _C1
    z = z ^ (z >> np.uint64(27))
    z = z * _C2
    return z ^ (z >> np.uint64(31))


def draws(keys: np.ndarray, index: np.ndarray) -> np.ndarray:
    """53-bit draws for every (key, index) pair; broadcasts like ``keys + index``."""
    idx = (np.asarray(index, dtype=np.uint64) + np.uint64(1)) * _GOLDEN
    return _mix64(keys + idx) >> _SHIFT


def _override(u: np.ndarray, modes: np.ndarray) -> np.ndarray:
    if modes.any():
        u = u.copy()
        u[modes == MODE_MIN] = 0
        u[modes == MODE_MAX] = DRAW_MAX
    return u


def _threshold(k: np.ndarray) -> np.ndarray:
    """Integer form of ``2**-k``: a draw is below p iff it is below this."""
    shift = np.clip(DRAW_BITS - k, 0, DRAW_BITS).astype(np.uint64)
    return np.where(k <= DRAW_BITS, np.uint64(1) << shift, np.uint64(0))


def simulate(indptr, indices, n, seed, interval, max_rounds, modes=None, watch=None,
             record=False):
    with np.errstate(over="ignore"):
        return _simulate(indptr, indices, n, seed, interval, max_rounds, modes, watch, record)


def _simulate(indptr, indices, n, seed, interval, max_rounds, modes, watch, record):
    I = interval
    L = 2 * I + 1
    half = I // 2
    adj = sp.csr_matrix((np.ones(len(indices), dtype=np.float32), indices, indptr), shape=(n, n))
    keys = np.array([node_key(seed, v) for v in range(n)], dtype=np.uint64)
    modes = np.zeros(n, dtype=np.int8) if modes is None else np.asarray(modes, dtype=np.int8)
    k = np.ones(n, dtype=np.int64)
    decision = np.zeros(n, dtype=np.int8)
    slot_of = np.full(n, -1, dtype=np.int64)
    watched = None if watch is None else np.asarray(watch, dtype=bool)
    records = []
    offsets = np.arange(I, dtype=np.uint64)

    rnd = 0
    while rnd < max_rounds:
        act = np.flatnonzero(decision == UNDECIDED)
        if act.size == 0 or (watched is not None and not (watched & (decision == UNDECIDED)).any()):
            break
        base = rnd * L
        ka, keys_a, modes_a = k[act], keys[act][:, None], modes[act]
        sub = adj[act]

        # estimation interval
        slots = np.uint64(base) + offsets
        u = _override(draws(keys_a, np.uint64(2) * slots), modes_a)
        beep = u < _threshold(ka)[:, None]
        full = np.zeros((n, I), dtype=np.float32)
        full[act] = beep
        heard = (sub @ full) > 0
        listen = ~beep
        c = listen.sum(axis=1)
        b = (listen & heard).sum(axis=1)
        coin_used = 3 * c <= I
        coin = _override(draws(keys_a[:, 0], np.uint64(2 * (base + I - 1) + 1)), modes_a)
        high = np.where(coin_used, coin < HALF, 5 * b > c)
        if record:
            records.extend(zip([rnd] * act.size, act.tolist(), ka.tolist(), c.tolist(),
                               b.tolist(), high.tolist(), coin_used.tolist()))
        ka = np.where(high, ka + 1, np.maximum(1, ka - 1))
        k[act] = ka

        # marking interval
        mdraw = _override(draws(keys_a[:, 0], np.uint64(2 * (base + I) + 1)), modes_a)
        marked = mdraw < _threshold(ka)
        mk = np.flatnonzero(marked)
        in_m = np.zeros(act.size, dtype=bool)
        if mk.size:
            mslots = np.uint64(base + I) + offsets
            kd = _override(draws(keys_a[mk], np.uint64(2) * mslots), modes_a[mk])
            order = np.argsort(kd, axis=1, kind="stable")
            sel = np.zeros(kd.shape, dtype=bool)
            np.put_along_axis(sel, order[:, :half], True, axis=1)
            full = np.zeros((n, I), dtype=np.float32)
            full[act[mk]] = sel
            heard_m = (sub[mk] @ full) > 0
            in_m[mk] = ~(heard_m & ~sel).any(axis=1)

        # final slot
        final = base + 2 * I
        ind = np.zeros(n, dtype=np.float32)
        ind[act[in_m]] = 1
        hears = (sub @ ind) > 0
        joined = act[in_m]
        removed = act[~in_m & hears]
        decision[joined] = IN
        decision[removed] = OUT
        slot_of[joined] = final
        slot_of[removed] = final
        rnd += 1

    return decision, slot_of, rnd, records
