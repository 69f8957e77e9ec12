# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled beep-MIS batch simulator; same contract as ``_fallback.simulate``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t, uint64_t
from libc.stdlib cimport malloc, free

from .coins import node_key

cnp.import_array()

cdef extern from *:
    int popcount64 "__builtin_popcountll"(unsigned long long) nogil

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t DRAW_MAX = (1ULL << 53) - 1
cdef uint64_t HALF = 1ULL << 52


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t draw(uint64_t key, int8_t mode, uint64_t index) noexcept nogil:
    if mode == 1:
        return 0
    if mode == 2:
        return DRAW_MAX
    return mix64(key + (index + 1) * GOLDEN) >> 11


cdef inline uint64_t threshold(int64_t k) noexcept nogil:
    if k > 53:
        return 0
    return 1ULL << (53 - k)


ctypedef struct KeyedSlot:
    uint64_t key
    int64_t j


cdef inline bint less(KeyedSlot x, KeyedSlot y) noexcept nogil:
    return x.key < y.key or (x.key == y.key and x.j < y.j)


cdef void select_smallest(KeyedSlot* a, int64_t size, int64_t nth) noexcept nogil:
    """Reorder ``a`` so that ``a[:nth]`` holds its ``nth`` smallest entries."""
    cdef int64_t lo = 0, hi = size - 1, i, j, mid
    cdef KeyedSlot pivot, tmp
    if nth <= 0 or nth >= size:
        return
    while lo < hi:
        mid = lo + (hi - lo) // 2
        # median of three
        if less(a[mid], a[lo]):
            tmp = a[mid]; a[mid] = a[lo]; a[lo] = tmp
        if less(a[hi], a[lo]):
            tmp = a[hi]; a[hi] = a[lo]; a[lo] = tmp
        if less(a[hi], a[mid]):
            tmp = a[hi]; a[hi] = a[mid]; a[mid] = tmp
        pivot = a[mid]
        i = lo
        j = hi
        while i <= j:
            while less(a[i], pivot):
                i += 1
            while less(pivot, a[j]):
                j -= 1
            if i <= j:
                tmp = a[i]; a[i] = a[j]; a[j] = tmp
                i += 1
                j -= 1
        if nth <= j:
            hi = j
        elif nth >= i:
            lo = i
        else:
            return


def simulate(const int64_t[:] indptr, const int32_t[:] indices, int64_t n, seed,
             int64_t interval, int64_t max_rounds, modes=None, watch=None, bint record=False):
    # Each interval is evaluated per node as a bit row of I slots: beep
    # choices never depend on what a node hears within the same interval.
    cdef int64_t I = interval
    cdef int64_t L = 2 * I + 1
    cdef int64_t half = I // 2
    cdef int64_t W = (I + 63) // 64
    cdef int64_t v, u, e, j, r, i, w, base, na, idx, n_watch = 0
    cdef uint64_t tail = ~0ULL if I % 64 == 0 else (1ULL << (I % 64)) - 1

    key_arr = np.array([node_key(seed, x) for x in range(n)], dtype=np.uint64)
    cdef uint64_t[:] keys = key_arr
    mode_arr = np.zeros(n, dtype=np.int8) if modes is None else np.ascontiguousarray(modes, dtype=np.int8)
    cdef int8_t[:] mode = mode_arr
    watch_arr = np.zeros(n, dtype=np.uint8) if watch is None else np.ascontiguousarray(watch, dtype=np.uint8)
    cdef uint8_t[:] watched = watch_arr

    decision_arr = np.zeros(n, dtype=np.int8)
    slot_arr = np.full(n, -1, dtype=np.int64)
    cdef int8_t[:] decision = decision_arr
    cdef int64_t[:] slot_of = slot_arr

    cdef int64_t[:] k = np.ones(n, dtype=np.int64)
    cdef int64_t[:] active = np.zeros(n, dtype=np.int64)
    cdef uint8_t[:] marked = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[:] in_m = np.zeros(n, dtype=np.uint8)
    cdef uint64_t[:] rows = np.zeros(n * W, dtype=np.uint64)
    cdef uint64_t[:] acc = np.zeros(W, dtype=np.uint64)
    cdef int64_t k_before, c, b
    cdef uint64_t listen_w
    cdef bint coin_used, high, heard
    cdef uint64_t thr, key, idx0
    cdef int8_t md
    cdef KeyedSlot* buf = <KeyedSlot*> malloc(I * sizeof(KeyedSlot))
    if buf == NULL:
        raise MemoryError()

    records = []
    na = n
    for v in range(n):
        active[v] = v
        if watch is not None and watched[v]:
            n_watch += 1

    r = 0
    try:
        while r < max_rounds and na > 0:
            if watch is not None and n_watch == 0:
                break
            base = r * L

            # estimation interval: rows[v] = slots in which v beeps
            for i in range(na):
                v = active[i]
                thr = threshold(k[v])
                key = keys[v]
                md = mode[v]
                for w in range(W):
                    rows[v * W + w] = 0
                if thr == 0:
                    continue
                idx0 = 2 * base
                for j in range(I):
                    if draw(key, md, idx0 + 2 * j) < thr:
                        rows[v * W + (j >> 6)] |= 1ULL << (j & 63)
            for i in range(na):
                v = active[i]
                for w in range(W):
                    acc[w] = 0
                for e in range(indptr[v], indptr[v + 1]):
                    u = indices[e]
                    if decision[u] == 0:
                        for w in range(W):
                            acc[w] |= rows[u * W + w]
                c = 0
                b = 0
                for w in range(W):
                    listen_w = ~rows[v * W + w]
                    if w == W - 1:
                        listen_w &= tail
                    c += popcount64(listen_w)
                    b += popcount64(listen_w & acc[w])
                k_before = k[v]
                coin_used = 3 * c <= I
                if coin_used:
                    high = draw(keys[v], mode[v], 2 * (base + I - 1) + 1) < HALF
                else:
                    high = 5 * b > c
                if record:
                    records.append((r, v, k_before, c, b, high, coin_used))
                if high:
                    k[v] = k_before + 1
                elif k_before > 1:
                    k[v] = k_before - 1

            # marking interval: rows[v] = chosen beep slots of marked nodes
            for i in range(na):
                v = active[i]
                marked[v] = draw(keys[v], mode[v], 2 * (base + I) + 1) < threshold(k[v])
                for w in range(W):
                    rows[v * W + w] = 0
                if not marked[v]:
                    continue
                if mode[v] != 0:
                    # constant keys: ties resolve to the earliest slots
                    for j in range(half):
                        rows[v * W + (j >> 6)] |= 1ULL << (j & 63)
                    continue
                for j in range(I):
                    buf[j].key = draw(keys[v], 0, 2 * (base + I + j))
                    buf[j].j = j
                select_smallest(buf, I, half)
                for j in range(half):
                    rows[v * W + (buf[j].j >> 6)] |= 1ULL << (buf[j].j & 63)
            for i in range(na):
                v = active[i]
                in_m[v] = 0
                if not marked[v]:
                    continue
                heard = False
                for e in range(indptr[v], indptr[v + 1]):
                    u = indices[e]
                    if decision[u] == 0 and marked[u]:
                        for w in range(W):
                            if rows[u * W + w] & ~rows[v * W + w]:
                                heard = True
                                break
                        if heard:
                            break
                in_m[v] = not heard

            # final slot
            for i in range(na):
                v = active[i]
                if in_m[v]:
                    decision[v] = 1
                    slot_of[v] = base + 2 * I
            for i in range(na):
                v = active[i]
                if decision[v] == 0:
                    for e in range(indptr[v], indptr[v + 1]):
                        u = indices[e]
                        if decision[u] == 1 and slot_of[u] == base + 2 * I:
                            decision[v] = 2
                            slot_of[v] = base + 2 * I
                            break
            idx = 0
            for i in range(na):
                v = active[i]
                if decision[v] == 0:
                    active[idx] = v
                    idx += 1
                elif watch is not None and watched[v]:
                    n_watch -= 1
            na = idx
            r += 1
    finally:
        free(buf)

    return decision_arr, slot_arr, r, records
