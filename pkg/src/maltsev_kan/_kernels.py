"""Hot loops: clone-closure expansion, homomorphism tables, fiber scans.

Each kernel exists twice, a numba ``@njit`` version and a pure numpy one.
The numba path is used when numba imports and ``MALTSEV_KAN_NO_NUMBA`` is
unset (or ``0``); set it to ``1`` to force numpy.  Both paths return
identical arrays, which the test suite checks.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


# rows per numpy block; bounds temporary memory
_BLOCK = 1 << 18


# ---------------------------------------------------------------- numpy path

def _np_expand(members, table, m, arity, g_start, lo, hi):
    """Apply an ``arity``-ary table pointwise to member tuples ``lo..hi``
    (flat, base ``len(members)``, most significant digit first), keeping
    only tuples with at least one member index ``>= g_start``."""
    S, L = members.shape
    vals_out = []
    idx_out = []
    for start in range(lo, hi, _BLOCK):
        t = np.arange(start, min(hi, start + _BLOCK), dtype=np.int64)
        digits = []
        rest = t.copy()
        for _ in range(arity):
            digits.append(rest % S)
            rest //= S
        digits.reverse()
        keep = digits[0] >= g_start
        for d in digits[1:]:
            keep |= d >= g_start
        if not keep.any():
            continue
        t = t[keep]
        digits = [d[keep] for d in digits]
        flat = np.zeros((len(t), L), dtype=np.int64)
        for d in digits:
            flat *= m
            flat += members[d]
        vals_out.append(table[flat].astype(members.dtype))
        idx_out.append(t)
    if not vals_out:
        return np.empty((0, L), members.dtype), np.empty(0, np.int64)
    return np.concatenate(vals_out), np.concatenate(idx_out)


def _np_hom_failure(hmap, src_table, dst_table, m_src, m_dst, arity):
    """First flat argument index where ``hmap`` fails to commute with the
    tables, or -1."""
    total = m_src ** arity
    hmap = np.asarray(hmap, dtype=np.int64)
    for start in range(0, total, _BLOCK):
        t = np.arange(start, min(total, start + _BLOCK), dtype=np.int64)
        img = np.zeros(len(t), dtype=np.int64)
        rest = t.copy()
        scale = 1
        for _ in range(arity):
            img += hmap[rest % m_src] * scale
            rest //= m_src
            scale *= m_dst
        bad = hmap[src_table[t]] != dst_table[img]
        if bad.any():
            return int(t[np.argmax(bad)])
    return -1


def _np_fiber_scan(rows, wanted):
    """Indices ``x`` with ``rows[r, x] == wanted[r]`` for every ``r``."""
    if rows.shape[0] == 0:
        return np.arange(rows.shape[1], dtype=np.int64)
    ok = np.all(rows == wanted[:, None], axis=0)
    return np.flatnonzero(ok).astype(np.int64)


class _NpKeySet:
    """Set of packed int64 keys kept as one sorted array."""

    def __init__(self):
        self.sorted = np.empty(0, dtype=np.int64)

    def __len__(self):
        return len(self.sorted)

    def new_first(self, keys):
        """Positions of keys that are absent and first of their value."""
        _, first = np.unique(keys, return_index=True)
        first.sort()
        k = keys[first]
        if len(self.sorted):
            pos = np.minimum(np.searchsorted(self.sorted, k), len(self.sorted) - 1)
            first = first[self.sorted[pos] != k]
        return first

    def add(self, keys):
        self.sorted = np.union1d(self.sorted, np.asarray(keys, dtype=np.int64))

    def add_new(self, key: int) -> bool:
        before = len(self.sorted)
        self.add([key])
        return len(self.sorted) > before


def _np_expand_new(members, table, m, arity, g_start, lo, hi, weights, keyset, target_key, max_out):
    """Like :func:`_np_expand` but returns only rows whose packed key is not
    yet in ``keyset`` (first occurrences, in tuple order) and records them.
    Stops after ``max_out`` new rows or right after the row with
    ``target_key``.  Returns ``(vals, idx, next_t, hit)``."""
    vals_out, idx_out = [], []
    got = 0
    t = lo
    while t < hi:
        end = min(hi, t + _BLOCK)
        vals, idx = _np_expand(members, table, m, arity, g_start, t, end)
        t = end
        if not len(vals):
            continue
        keys = vals.astype(np.int64) @ weights
        fresh = keyset.new_first(keys)
        hit = False
        tk = np.flatnonzero(keys[fresh] == target_key)
        if tk.size:
            fresh = fresh[: int(tk[0]) + 1]
            hit = True
        if got + len(fresh) >= max_out:
            fresh = fresh[: max_out - got]
            hit = hit and bool(keys[fresh[-1]] == target_key)
            t = int(idx[fresh[-1]]) + 1
        keyset.add(keys[fresh])
        vals_out.append(vals[fresh])
        idx_out.append(idx[fresh])
        got += len(fresh)
        if hit or got >= max_out:
            return np.concatenate(vals_out), np.concatenate(idx_out), t, hit
    if not vals_out:
        return np.empty((0, members.shape[1]), members.dtype), np.empty(0, np.int64), hi, False
    return np.concatenate(vals_out), np.concatenate(idx_out), hi, False


numpy_kernels = SimpleNamespace(
    name="numpy",
    expand=_np_expand,
    expand_new=_np_expand_new,
    KeySet=_NpKeySet,
    hom_failure=_np_hom_failure,
    fiber_scan=_np_fiber_scan,
)


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _nb_expand_core(members, table, m, arity, g_start, lo, hi, out_vals, out_idx):
        S, L = members.shape
        digits = np.empty(max(arity, 1), dtype=np.int64)
        cnt = 0
        for t in range(lo, hi):
            rest = t
            hit = False
            for p in range(arity - 1, -1, -1):
                d = rest % S
                rest //= S
                digits[p] = d
                if d >= g_start:
                    hit = True
            if not hit:
                continue
            for c in range(L):
                flat = 0
                for p in range(arity):
                    flat = flat * m + members[digits[p], c]
                out_vals[cnt, c] = table[flat]
            out_idx[cnt] = t
            cnt += 1
        return cnt

    def _nb_expand(members, table, m, arity, g_start, lo, hi):
        n = max(hi - lo, 0)
        out_vals = np.empty((n, members.shape[1]), dtype=members.dtype)
        out_idx = np.empty(n, dtype=np.int64)
        cnt = _nb_expand_core(members, np.ascontiguousarray(table), m, arity,
                              g_start, lo, hi, out_vals, out_idx)
        return out_vals[:cnt], out_idx[:cnt]

    @njit(cache=True, nogil=True)
    def _nb_hom_failure_core(hmap, src_table, dst_table, m_src, m_dst, arity):
        total = 1
        for _ in range(arity):
            total *= m_src
        for t in range(total):
            rest = t
            img = 0
            scale = 1
            for _ in range(arity):
                img += hmap[rest % m_src] * scale
                rest //= m_src
                scale *= m_dst
            if hmap[src_table[t]] != dst_table[img]:
                return t
        return -1

    def _nb_hom_failure(hmap, src_table, dst_table, m_src, m_dst, arity):
        return int(_nb_hom_failure_core(np.asarray(hmap, dtype=np.int64),
                                        np.ascontiguousarray(src_table),
                                        np.ascontiguousarray(dst_table),
                                        m_src, m_dst, arity))

    @njit(cache=True, nogil=True)
    def _nb_fiber_scan_core(rows, wanted, out):
        R, size = rows.shape
        cnt = 0
        for x in range(size):
            ok = True
            for r in range(R):
                if rows[r, x] != wanted[r]:
                    ok = False
                    break
            if ok:
                out[cnt] = x
                cnt += 1
        return cnt

    def _nb_fiber_scan(rows, wanted):
        out = np.empty(rows.shape[1], dtype=np.int64)
        cnt = _nb_fiber_scan_core(np.ascontiguousarray(rows, dtype=np.int64),
                                  np.asarray(wanted, dtype=np.int64), out)
        return out[:cnt]

    _EMPTY = -1
    _GOLDEN = np.uint64(0x9E3779B97F4A7C15)

    @njit(cache=True, nogil=True)
    def _nb_shift(slots):
        bits = 0
        while (1 << bits) < slots.shape[0]:
            bits += 1
        return np.uint64(64 - bits)

    @njit(cache=True, nogil=True)
    def _nb_slot(slots, key, shift):
        i = np.int64((np.uint64(key) * _GOLDEN) >> shift)
        mask = slots.shape[0] - 1
        while slots[i] != _EMPTY and slots[i] != key:
            i = (i + 1) & mask
        return i

    @njit(cache=True, nogil=True)
    def _nb_insert_all(slots, keys):
        shift = _nb_shift(slots)
        added = 0
        for key in keys:
            i = _nb_slot(slots, key, shift)
            if slots[i] == _EMPTY:
                slots[i] = key
                added += 1
        return added

    class _NbKeySet:
        """Open-addressing hash set of packed int64 keys, load <= 1/2."""

        def __init__(self):
            self.slots = np.full(1 << 12, _EMPTY, dtype=np.int64)
            self.count = 0

        def __len__(self):
            return self.count

        def reserve(self, extra):
            need = 2 * (self.count + extra)
            if need <= len(self.slots):
                return
            cap = len(self.slots)
            while cap < need:
                cap *= 2
            old = self.slots[self.slots != _EMPTY]
            self.slots = np.full(cap, _EMPTY, dtype=np.int64)
            _nb_insert_all(self.slots, old)

        def add(self, keys):
            keys = np.asarray(keys, dtype=np.int64)
            self.reserve(len(keys))
            self.count += _nb_insert_all(self.slots, keys)

        def add_new(self, key: int) -> bool:
            before = self.count
            self.add([key])
            return self.count > before

    @njit(cache=True, nogil=True)
    def _nb_emit(members, table, m, arity, digits, weights, row):
        L = members.shape[1]
        key = 0
        if arity == 1:
            a = digits[0]
            for c in range(L):
                v = table[members[a, c]]
                row[c] = v
                key += np.int64(v) * weights[c]
        elif arity == 2:
            a = digits[0]
            b = digits[1]
            for c in range(L):
                v = table[np.int64(members[a, c]) * m + members[b, c]]
                row[c] = v
                key += np.int64(v) * weights[c]
        else:
            for c in range(L):
                flat = 0
                for p in range(arity):
                    flat = flat * m + members[digits[p], c]
                v = table[flat]
                row[c] = v
                key += np.int64(v) * weights[c]
        return key

    @njit(cache=True, nogil=True)
    def _nb_expand_new_core(members, table, m, arity, g_start, lo, hi, weights, slots,
                            target_key, max_out, out_vals, out_idx):
        S = members.shape[0]
        digits = np.empty(max(arity, 1), dtype=np.int64)
        row = np.empty(members.shape[1], dtype=members.dtype)
        shift = _nb_shift(slots)
        cnt = 0
        t = lo
        rest = t
        for p in range(arity - 1, -1, -1):
            digits[p] = rest % S
            rest //= S
        while t < hi:
            hit = False
            for p in range(arity):
                if digits[p] >= g_start:
                    hit = True
                    break
            if not hit and arity == 2:
                # jump to the first new member in the second slot
                t += g_start - digits[1]
                digits[1] = g_start
                continue
            if hit:
                key = _nb_emit(members, table, m, arity, digits, weights, row)
                i = _nb_slot(slots, key, shift)
                if slots[i] != key:
                    slots[i] = key
                    out_vals[cnt, :] = row
                    out_idx[cnt] = t
                    cnt += 1
                    if key == target_key:
                        return cnt, t + 1, True
                    if cnt >= max_out:
                        return cnt, t + 1, False
            t += 1
            # odometer increment, last digit fastest
            p = arity - 1
            while p >= 0:
                digits[p] += 1
                if digits[p] < S:
                    break
                digits[p] = 0
                p -= 1
        return cnt, hi, False

    def _nb_expand_new(members, table, m, arity, g_start, lo, hi, weights, keyset, target_key, max_out):
        # keep the table small (cache-resident); grow only when nearly full
        if len(keyset.slots) // 2 - keyset.count < 1024:
            keyset.reserve(len(keyset.slots) // 2)
        max_out = int(min(max_out, max(hi - lo, 0), len(keyset.slots) // 2 - keyset.count))
        out_vals = np.empty((max_out, members.shape[1]), dtype=members.dtype)
        out_idx = np.empty(max_out, dtype=np.int64)
        cnt, nxt, hit = _nb_expand_new_core(members, np.ascontiguousarray(table), m, arity, g_start,
                                            lo, hi, weights, keyset.slots, target_key, max_out,
                                            out_vals, out_idx)
        keyset.count += cnt
        return out_vals[:cnt], out_idx[:cnt], int(nxt), bool(hit)

    numba_kernels = SimpleNamespace(
        name="numba",
        expand=_nb_expand,
        expand_new=_nb_expand_new,
        KeySet=_NbKeySet,
        hom_failure=_nb_hom_failure,
        fiber_scan=_nb_fiber_scan,
    )
else:  # pragma: no cover
    numba_kernels = None


def select():
    if HAVE_NUMBA and not _flag("MALTSEV_KAN_NO_NUMBA"):
        return numba_kernels
    return numpy_kernels


kernels = select()
