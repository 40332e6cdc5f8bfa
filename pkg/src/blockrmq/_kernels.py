"""Compiled inner loops shared by the structures.

Everything here works on plain numpy arrays so that numba can compile it in
nopython mode. The public modules wrap these functions and own validation.

Block sparse table layout (used by both the plain and the compact index):

``dpos``/``dval``
    direct layers, shape ``(n_direct, B)``; direct layer ``d`` holds layer
    ``j = d * period``.
``deltas``
    one row per non-direct layer ``j`` at row ``j - j // period - 1``;
    ``mode == MODE_BYTE`` rows hold one byte per entry, ``mode == MODE_BIT``
    rows are bit-packed (LSB first).

A plain index is simply ``period == 1`` with an empty ``deltas``.
"""

import numpy as np
from numba import njit

MODE_PLAIN = 0
MODE_BYTE = 1
MODE_BIT = 2

# hybrid front outcome codes
SPECULATIVE_HIT = 0
SECOND_LEVEL_HIT = 1
TIE_DECLINE = 2
RANGE_DECLINE = 3

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def floor_log2(x):
    r = 0
    if x >= 1 << 32:
        x >>= 32
        r += 32
    if x >= 1 << 16:
        x >>= 16
        r += 16
    if x >= 1 << 8:
        x >>= 8
        r += 8
    if x >= 1 << 4:
        x >>= 4
        r += 4
    if x >= 1 << 2:
        x >>= 2
        r += 2
    if x >= 1 << 1:
        r += 1
    return r


# ---------------------------------------------------------------------------
# classic sparse table of arbitrary arity


@njit(**_JIT)
def st_build_layers(values, arity, n_layers):
    n = values.shape[0]
    pos = np.empty((n_layers, n), dtype=np.uint32)
    val = np.empty((n_layers, n), dtype=np.uint32)
    for i in range(n):
        pos[0, i] = i
        val[0, i] = values[i]
    step = 1
    for j in range(1, n_layers):
        for i in range(n):
            bp = pos[j - 1, i]
            bv = val[j - 1, i]
            for m in range(1, arity):
                s = i + m * step
                if s >= n:
                    break
                if val[j - 1, s] < bv:
                    bv = val[j - 1, s]
                    bp = pos[j - 1, s]
            pos[j, i] = bp
            val[j, i] = bv
        step *= arity
    return pos, val


@njit(**_JIT)
def st_query_one(pos, val, powers, l, r):
    n_layers = pos.shape[0]
    width = r - l + 1
    j = 0
    while j + 1 < n_layers and powers[j + 1] <= width:
        j += 1
    span = powers[j]
    count = (width + span - 1) // span
    bp = pos[j, l]
    bv = val[j, l]
    for m in range(1, count - 1):
        s = l + m * span
        if val[j, s] < bv:
            bv = val[j, s]
            bp = pos[j, s]
    s = r - span + 1
    if val[j, s] < bv:
        bp = pos[j, s]
    return bp


@njit(**_JIT)
def st_query_batch(pos, val, powers, ls, rs, out):
    for t in range(ls.shape[0]):
        out[t] = st_query_one(pos, val, powers, ls[t], rs[t])


# ---------------------------------------------------------------------------
# block minima


@njit(**_JIT)
def block_minima(values, k):
    n = values.shape[0]
    n_blocks = (n + k - 1) // k
    bpos = np.empty(n_blocks, dtype=np.uint32)
    bval = np.empty(n_blocks, dtype=np.uint32)
    for b in range(n_blocks):
        start = b * k
        stop = min(start + k, n)
        best = start
        for i in range(start + 1, stop):
            if values[i] < values[best]:
                best = i
        bpos[b] = best
        bval[b] = values[best]
    return bpos, bval


@njit(**_JIT)
def block_offsets(values, k2):
    """Leftmost minimum offset inside every block of size ``k2``."""
    n = values.shape[0]
    n_blocks = (n + k2 - 1) // k2
    off = np.empty(n_blocks, dtype=np.uint8)
    for b in range(n_blocks):
        start = b * k2
        stop = min(start + k2, n)
        best = start
        for i in range(start + 1, stop):
            if values[i] < values[best]:
                best = i
        off[b] = best - start
    return off


# ---------------------------------------------------------------------------
# block sparse table lookups


@njit(**_JIT)
def span_min(dpos, dval, deltas, period, mode, i, j):
    """(position, value) of the minimum over blocks ``i .. i + 2**j - 1``."""
    if mode == MODE_BYTE:
        rem = j % period
        if rem != 0:
            base = j - rem
            m = np.int64(deltas[j - j // period - 1, i])
            i = i + (m << base)
            j = base
    elif mode == MODE_BIT:
        while j % period != 0:
            row = j - j // period - 1
            bit = (np.int64(deltas[row, i >> 3]) >> (i & 7)) & 1
            i = i + (bit << (j - 1))
            j -= 1
    d = j // period
    return dpos[d, i], dval[d, i]


@njit(**_JIT)
def block_range_min(dpos, dval, deltas, period, mode, n_layers, a, b):
    """Minimum over blocks ``a .. b`` with two overlapping span lookups."""
    j = floor_log2(b - a + 1)
    if j > n_layers - 1:
        j = n_layers - 1
    p1, v1 = span_min(dpos, dval, deltas, period, mode, a, j)
    p2, v2 = span_min(dpos, dval, deltas, period, mode, b - (1 << j) + 1, j)
    if v2 < v1:
        return p2, v2
    return p1, v1


@njit(**_JIT)
def region_min(values, off, k2, a, b):
    """Leftmost minimum of ``values[a..b]``.

    With ``k2 > 0`` fully covered ``k2``-blocks are read through their stored
    offset and only the partial ones are scanned. Returns the position, its
    value and the number of cells/offsets touched.
    """
    best = a
    bv = values[a]
    touched = 1
    if k2 == 0:
        for i in range(a + 1, b + 1):
            if values[i] < bv:
                bv = values[i]
                best = i
        return best, bv, b - a + 1
    touched = 0
    i = a
    first = True
    while i <= b:
        c = i // k2
        cstart = c * k2
        cstop = cstart + k2 - 1
        if i == cstart and cstop <= b:
            p = cstart + np.int64(off[c])
            touched += 1
            if first or values[p] < bv:
                bv = values[p]
                best = p
                first = False
            i = cstop + 1
        else:
            stop = min(cstop, b)
            for p in range(i, stop + 1):
                touched += 1
                if first or values[p] < bv:
                    bv = values[p]
                    best = p
                    first = False
            i = stop + 1
    return best, bv, touched


@njit(**_JIT)
def bbst_try_one(dpos, dval, deltas, period, mode, n_layers, k, l, r):
    p, _ = block_range_min(dpos, dval, deltas, period, mode, n_layers, l // k, r // k)
    if l <= p and p <= r:
        return np.int64(p)
    return np.int64(-1)


@njit(**_JIT)
def bbst_query_one(values, dpos, dval, deltas, period, mode, n_layers, k, off, k2, l, r):
    """Speculative read, then the bounded fallback. Returns (pos, fell_back, touched)."""
    bl = l // k
    br = r // k
    p, _ = block_range_min(dpos, dval, deltas, period, mode, n_layers, bl, br)
    if l <= p and p <= r:
        return np.int64(p), False, 0
    if br - bl >= 2:
        best, bv, t1 = region_min(values, off, k2, l, (bl + 1) * k - 1)
        pi, vi = block_range_min(dpos, dval, deltas, period, mode, n_layers, bl + 1, br - 1)
        if vi < bv:
            bv = vi
            best = np.int64(pi)
        pr, vr, t2 = region_min(values, off, k2, br * k, r)
        if vr < bv:
            best = pr
        return np.int64(best), True, t1 + t2
    best, _, t = region_min(values, off, k2, l, r)
    return np.int64(best), True, t


@njit(**_JIT)
def bbst_query_batch(values, dpos, dval, deltas, period, mode, n_layers, k, off, k2,
                     ls, rs, out, fell_back, touched):
    for t in range(ls.shape[0]):
        p, f, c = bbst_query_one(values, dpos, dval, deltas, period, mode, n_layers,
                                 k, off, k2, ls[t], rs[t])
        out[t] = p
        fell_back[t] = f
        touched[t] = c


@njit(**_JIT)
def bbst_try_batch(dpos, dval, deltas, period, mode, n_layers, k, ls, rs, out):
    for t in range(ls.shape[0]):
        out[t] = bbst_try_one(dpos, dval, deltas, period, mode, n_layers, k, ls[t], rs[t])


# ---------------------------------------------------------------------------
# A-free two-level resolution (hybrid fronts with a second level)


@njit(**_JIT)
def _second_level_region(off, keys, k2, a, b, best_key, best_pos, tie, have):
    i = a
    while i <= b:
        c = i // k2
        cstart = c * k2
        cstop = cstart + k2 - 1
        p = cstart + np.int64(off[c])
        if not (i == cstart and cstop <= b):
            # partial block: only usable when its minimum lies inside
            if p < i or p > min(cstop, b):
                return best_key, best_pos, tie, have, False
        key = np.int64(keys[c])
        if not have or key < best_key:
            best_key = key
            best_pos = p
            tie = False
            have = True
        elif key == best_key:
            tie = True
        i = cstop + 1
    return best_key, best_pos, tie, have, True


@njit(**_JIT)
def second_level_try_one(dpos, dval, deltas, period, mode, n_layers, k1, off, keys, k2,
                         ties_decline, l, r):
    """Resolve a query without A from k2-block minima keys.

    Returns ``(pos, outcome)`` where ``pos == -1`` unless the outcome is
    ``SECOND_LEVEL_HIT``.
    """
    bl = l // k1
    br = r // k1
    best_key = np.int64(0)
    best_pos = np.int64(-1)
    tie = False
    have = False
    if br - bl >= 2:
        best_key, best_pos, tie, have, ok = _second_level_region(
            off, keys, k2, l, (bl + 1) * k1 - 1, best_key, best_pos, tie, have)
        if not ok:
            return np.int64(-1), RANGE_DECLINE
        pi, _ = block_range_min(dpos, dval, deltas, period, mode, n_layers, bl + 1, br - 1)
        key = np.int64(keys[np.int64(pi) // k2])
        if key < best_key:
            best_key = key
            best_pos = np.int64(pi)
            tie = False
        elif key == best_key:
            tie = True
        best_key, best_pos, tie, have, ok = _second_level_region(
            off, keys, k2, br * k1, r, best_key, best_pos, tie, have)
    else:
        best_key, best_pos, tie, have, ok = _second_level_region(
            off, keys, k2, l, r, best_key, best_pos, tie, have)
    if not ok:
        return np.int64(-1), RANGE_DECLINE
    if tie and ties_decline:
        return np.int64(-1), TIE_DECLINE
    return best_pos, SECOND_LEVEL_HIT


@njit(**_JIT)
def front_try_batch(dpos, dval, deltas, period, mode, n_layers, k1, off, keys, k2,
                    ties_decline, ls, rs, out, outcome):
    """Front end of the hybrid: speculative read, then the second level if any."""
    for t in range(ls.shape[0]):
        l = ls[t]
        r = rs[t]
        p = bbst_try_one(dpos, dval, deltas, period, mode, n_layers, k1, l, r)
        if p >= 0:
            out[t] = p
            outcome[t] = SPECULATIVE_HIT
        elif k2 > 0:
            p, o = second_level_try_one(dpos, dval, deltas, period, mode, n_layers, k1,
                                        off, keys, k2, ties_decline, l, r)
            out[t] = p
            outcome[t] = o
        else:
            out[t] = -1
            outcome[t] = RANGE_DECLINE


# ---------------------------------------------------------------------------
# offline pipeline


@njit(**_JIT)
def radix_sort_u64(keys):
    """LSD radix sort, 8-bit digits; passes with a constant digit are skipped."""
    n = keys.shape[0]
    src = keys.copy()
    dst = np.empty_like(src)
    counts = np.zeros(256, dtype=np.int64)
    for shift in range(0, 64, 8):
        counts[:] = 0
        for i in range(n):
            counts[(src[i] >> np.uint64(shift)) & np.uint64(0xFF)] += 1
        if n == 0 or counts.max() == n:
            continue
        total = 0
        for d in range(256):
            c = counts[d]
            counts[d] = total
            total += c
        for i in range(n):
            d = (src[i] >> np.uint64(shift)) & np.uint64(0xFF)
            dst[counts[d]] = src[i]
            counts[d] += 1
        src, dst = dst, src
    return src


@njit(**_JIT)
def contract_cells(values, bounds, start, stop, aq, mapping):
    """Minimum of ``values[bounds[c] .. bounds[c + 1]]`` for cells ``start .. stop - 1``."""
    for c in range(start, stop):
        a = bounds[c]
        b = bounds[c + 1]
        best = a
        for i in range(a + 1, b + 1):
            if values[i] < values[best]:
                best = i
        aq[c] = values[best]
        mapping[c] = best
