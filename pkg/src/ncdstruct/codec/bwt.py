"""Block-sorting pipeline: BWT, move-to-front, zero run-length coding, and
an adaptive order-0 coder reporting ideal bits.

The forward transform appends an explicit end-of-block symbol (256, sorting
above every byte), so the alphabet downstream has 257 symbols and the
transform inverts without a separately stored index.  bwt_transform also
exposes the classic sentinel-free view (last column plus primary row) that
rotation-sort oracles produce.

Sizes include a 32-bit length field per 128 KiB block; an empty input has
zero blocks and codes to zero bits.
"""

from __future__ import annotations

import math

import numpy as np

BLOCK_SIZE = 128 * 1024
SENTINEL = 256
RUN_A = 0
RUN_B = 1
CODER_ALPHABET = 258  # RUN_A, RUN_B, then 1..256 shifted up by one
BLOCK_FIELD_BITS = 32


def rotation_order(values: np.ndarray) -> np.ndarray:
    """Indices of cyclic rotations in sorted order, ties by start position."""
    n = int(values.shape[0])
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    _, rank = np.unique(values, return_inverse=True)
    rank = rank.astype(np.int64)
    k = 1
    while k < n and rank.max() < n - 1:
        pairs = rank * np.int64(n + 1) + np.roll(rank, -k)
        _, rank = np.unique(pairs, return_inverse=True)
        rank = rank.astype(np.int64)
        k *= 2
    return np.lexsort((np.arange(n), rank))


def bwt_transform(data: bytes) -> tuple[bytes, int]:
    """Classic form: last column of sorted rotations plus the primary row."""
    if not data:
        raise ValueError("bwt_transform requires nonempty input")
    values = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    order = rotation_order(values)
    n = len(data)
    last = values[(order - 1) % n].astype(np.uint8).tobytes()
    primary = int(np.nonzero(order == 0)[0][0])
    return last, primary


def bwt_forward(data: bytes) -> np.ndarray:
    """Sentinel-terminated last column over the 257-symbol alphabet."""
    values = np.empty(len(data) + 1, dtype=np.int64)
    values[:len(data)] = np.frombuffer(data, dtype=np.uint8)
    values[len(data)] = SENTINEL
    order = rotation_order(values)
    return values[(order - 1) % len(values)].astype(np.int32)


def bwt_inverse(last: np.ndarray) -> bytes:
    last = np.asarray(last, dtype=np.int64)
    m = last.shape[0]
    # lf[i] = row whose rotation is last[i] prepended to rotation i
    rows_by_symbol = np.argsort(last, kind="stable")
    lf = np.empty(m, dtype=np.int64)
    lf[rows_by_symbol] = np.arange(m)
    sentinel_rows = np.nonzero(last == SENTINEL)[0]
    if sentinel_rows.shape[0] != 1:
        raise ValueError("last column must contain the end-of-block symbol exactly once")
    row = int(sentinel_rows[0])  # the rotation starting at position 0
    out = np.empty(m, dtype=np.int64)
    for t in range(m):
        out[t] = last[row]
        row = lf[row]
    text = out[::-1]  # walk emitted the text back to front
    return text[:-1].astype(np.uint8).tobytes()


def mtf_encode(seq: np.ndarray, alphabet: int = SENTINEL + 1) -> list[int]:
    table = list(range(alphabet))
    out = []
    for v in seq:
        r = table.index(v)
        out.append(r)
        if r:
            del table[r]
            table.insert(0, v)
    return out


def mtf_decode(ranks: list[int], alphabet: int = SENTINEL + 1) -> list[int]:
    table = list(range(alphabet))
    out = []
    for r in ranks:
        v = table[r]
        out.append(v)
        if r:
            del table[r]
            table.insert(0, v)
    return out


def _emit_run(out: list[int], run: int) -> None:
    # bijective base 2: RUN_A counts 1, RUN_B counts 2, weights 1,2,4,...
    while run > 0:
        if run & 1:
            out.append(RUN_A)
            run = (run - 1) // 2
        else:
            out.append(RUN_B)
            run = (run - 2) // 2


def rle0_encode(seq: list[int]) -> list[int]:
    out: list[int] = []
    run = 0
    for v in seq:
        if v == 0:
            run += 1
            continue
        _emit_run(out, run)
        run = 0
        out.append(v + 1)
    _emit_run(out, run)
    return out


def rle0_decode(seq: list[int]) -> list[int]:
    out: list[int] = []
    run = 0
    weight = 1
    for v in seq:
        if v in (RUN_A, RUN_B):
            run += (1 if v == RUN_A else 2) * weight
            weight *= 2
            continue
        out.extend([0] * run)
        run = 0
        weight = 1
        out.append(v - 1)
    out.extend([0] * run)
    return out


def order0_bits(seq: list[int], alphabet: int = CODER_ALPHABET) -> float:
    """Adaptive order-0 ideal code length with Krichevsky-Trofimov smoothing."""
    counts = [0] * alphabet
    n = 0
    half_alphabet = alphabet / 2.0
    bits = 0.0
    for v in seq:
        bits -= math.log2((counts[v] + 0.5) / (n + half_alphabet))
        counts[v] += 1
        n += 1
    return bits


def bwt_bits(data: bytes) -> float:
    bits = 0.0
    for start in range(0, len(data), BLOCK_SIZE):
        block = data[start:start + BLOCK_SIZE]
        coded = rle0_encode(mtf_encode(bwt_forward(block)))
        bits += BLOCK_FIELD_BITS + order0_bits(coded)
    return bits
