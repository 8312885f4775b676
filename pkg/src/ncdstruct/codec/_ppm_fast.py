"""Compiled PPM backend.

Same model as the reference implementation in ppm.py, restated over flat
arrays so numba can compile it: an open-addressing hash table maps packed
(order, context bytes) keys to context nodes, and each node keeps its symbol
counts in a linked list living in one shared arena.  Exclusions use a
generation counter instead of clearing a set per position.

Context keys pack up to 7 context bytes plus the context length into one
int64, which is why ppm.py caps the fast path at order 7.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_EMPTY = np.int64(-1)


@njit(cache=True)
def _feed(buf, start, order, keys, vals, head, total, distinct,
          e_sym, e_cnt, e_nxt, excl, meta, node_at):
    mask = np.int64(keys.shape[0] - 1)
    n_nodes = meta[0]
    n_entries = meta[1]
    gen = meta[2]
    bits = 0.0
    n = buf.shape[0]
    for i in range(start, n):
        s = np.int64(buf[i])
        kmax = order if order < i else i
        # resolve or create the node for every context length 0..kmax
        key = np.int64(0)
        for k in range(kmax + 1):
            if k > 0:
                key = (key << 8) | np.int64(buf[i - k])
            ck = key | (np.int64(k) << 56)
            h = ck * np.int64(-7046029254386353131)
            h ^= h >> np.int64(32)
            idx = h & mask
            while True:
                kk = keys[idx]
                if kk == ck:
                    node_at[k] = vals[idx]
                    break
                if kk == _EMPTY:
                    keys[idx] = ck
                    vals[idx] = n_nodes
                    node_at[k] = n_nodes
                    n_nodes += 1
                    break
                idx = (idx + 1) & mask
        gen += 1
        n_excl = 0
        found = False
        k = kmax
        while k >= 0:
            node = np.int64(node_at[k])
            if total[node] > 0:
                ex_count = 0
                ex_distinct = 0
                c_sym = 0
                e = head[node]
                while e != -1:
                    sym = np.int64(e_sym[e])
                    if excl[sym] == gen:
                        ex_count += e_cnt[e]
                        ex_distinct += 1
                    elif sym == s:
                        c_sym = e_cnt[e]
                    e = e_nxt[e]
                n_eff = total[node] - ex_count
                d_eff = distinct[node] - ex_distinct
                if n_eff > 0:
                    if c_sym > 0:
                        bits -= math.log2((2.0 * c_sym - 1.0) / (2.0 * n_eff))
                        found = True
                        break
                    bits -= math.log2(d_eff / (2.0 * n_eff))
                    e = head[node]
                    while e != -1:
                        sym = np.int64(e_sym[e])
                        if excl[sym] != gen:
                            excl[sym] = gen
                            n_excl += 1
                        e = e_nxt[e]
            k -= 1
        if not found:
            bits += math.log2(256.0 - n_excl)
        for k in range(kmax + 1):
            node = np.int64(node_at[k])
            e = head[node]
            while e != -1:
                if np.int64(e_sym[e]) == s:
                    break
                e = e_nxt[e]
            if e == -1:
                e_sym[n_entries] = np.int16(s)
                e_cnt[n_entries] = 1
                e_nxt[n_entries] = head[node]
                head[node] = n_entries
                n_entries += 1
                distinct[node] += 1
            else:
                e_cnt[e] += 1
            total[node] += 1
    meta[0] = n_nodes
    meta[1] = n_entries
    meta[2] = gen
    return bits


@njit(cache=True)
def _rehash(old_keys, old_vals, keys, vals):
    mask = np.int64(keys.shape[0] - 1)
    for i in range(old_keys.shape[0]):
        ck = old_keys[i]
        if ck == _EMPTY:
            continue
        h = ck * np.int64(-7046029254386353131)
        h ^= h >> np.int64(32)
        idx = h & mask
        while keys[idx] != _EMPTY:
            idx = (idx + 1) & mask
        keys[idx] = ck
        vals[idx] = old_vals[i]


def _pow2_at_least(n: int) -> int:
    cap = 64
    while cap < n:
        cap *= 2
    return cap


class FastPpm:
    """Array-backed PPM state; mirrors the _PurePpm interface."""

    __slots__ = ("order", "keys", "vals", "head", "total", "distinct",
                 "e_sym", "e_cnt", "e_nxt", "excl", "meta", "tail", "node_at")

    def __init__(self, order: int, reserve_bytes: int = 0):
        self.order = order
        self.tail = b""
        cap = max((order + 1) * reserve_bytes, 0) + 64
        self.keys = np.full(_pow2_at_least(2 * cap + (cap // 2)), _EMPTY, np.int64)
        self.vals = np.zeros(self.keys.shape[0], np.int32)
        self.head = np.full(cap, -1, np.int32)
        self.total = np.zeros(cap, np.int32)
        self.distinct = np.zeros(cap, np.int32)
        self.e_sym = np.zeros(cap, np.int16)
        self.e_cnt = np.zeros(cap, np.int32)
        self.e_nxt = np.full(cap, -1, np.int32)
        self.excl = np.zeros(256, np.int64)
        self.meta = np.zeros(3, np.int64)
        self.node_at = np.zeros(order + 1, np.int64)

    def _ensure_capacity(self, extra_bytes: int) -> None:
        need = int(self.meta[1]) + (self.order + 1) * extra_bytes + 1
        cap = self.head.shape[0]
        if need <= cap:
            return
        new_cap = max(2 * cap, need + 64)
        for name in ("head", "e_nxt"):
            arr = np.full(new_cap, -1, np.int32)
            arr[:cap] = getattr(self, name)
            setattr(self, name, arr)
        for name, dtype in (("total", np.int32), ("distinct", np.int32),
                            ("e_cnt", np.int32), ("e_sym", np.int16)):
            arr = np.zeros(new_cap, dtype)
            arr[:cap] = getattr(self, name)
            setattr(self, name, arr)
        hash_cap = _pow2_at_least(2 * new_cap + (new_cap // 2))
        if hash_cap > self.keys.shape[0]:
            new_keys = np.full(hash_cap, _EMPTY, np.int64)
            new_vals = np.zeros(hash_cap, np.int32)
            _rehash(self.keys, self.vals, new_keys, new_vals)
            self.keys = new_keys
            self.vals = new_vals

    def update(self, data: bytes) -> float:
        if not data:
            return 0.0
        self._ensure_capacity(len(data))
        buf = np.frombuffer(self.tail + data, dtype=np.uint8)
        bits = _feed(buf, len(self.tail), self.order, self.keys, self.vals,
                     self.head, self.total, self.distinct,
                     self.e_sym, self.e_cnt, self.e_nxt,
                     self.excl, self.meta, self.node_at)
        self.tail = bytes(buf[-self.order:])
        return float(bits)

    def fork(self) -> "FastPpm":
        other = object.__new__(FastPpm)
        other.order = self.order
        other.tail = self.tail
        for name in ("keys", "vals", "head", "total", "distinct",
                     "e_sym", "e_cnt", "e_nxt", "excl", "meta", "node_at"):
            setattr(other, name, getattr(self, name).copy())
        return other
