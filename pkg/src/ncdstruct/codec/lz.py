"""Simplified LZ77 with fixed-width tokens.

Greedy longest-match parsing over a 64 KiB window.  Matches run 3..255
bytes and may overlap their own output (offset < length).  Among equally
long matches the nearest one wins.  Token costs are fixed: a literal is
1 flag bit + 8 bits, a match is 1 flag bit + 16-bit offset + 8-bit length.
The stream carries no header; its size is just the token bits rounded up
to whole bytes.  Only sizes matter here, so no bitstream is emitted, but
lz_tokens exposes the parse for tests to decode.
"""

from __future__ import annotations

from typing import Iterator

WINDOW = 64 * 1024
MIN_MATCH = 3
MAX_MATCH = 255
LITERAL_BITS = 1 + 8
MATCH_BITS = 1 + 16 + 8

Token = tuple  # ("lit", byte) | ("match", offset, length)


def lz_tokens(data: bytes) -> Iterator[Token]:
    n = len(data)
    head: dict[bytes, int] = {}
    prev = [-1] * max(n - 2, 0)

    def register(j: int) -> None:
        key = data[j:j + 3]
        prev[j] = head.get(key, -1)
        head[key] = j

    i = 0
    while i < n:
        best_len = 0
        best_off = 0
        if i + MIN_MATCH <= n:
            cand = head.get(data[i:i + 3], -1)
            limit = i - WINDOW
            max_len = min(MAX_MATCH, n - i)
            while cand >= 0 and cand >= limit:
                length = 0
                while length < max_len and data[cand + length] == data[i + length]:
                    length += 1
                if length > best_len:
                    best_len = length
                    best_off = i - cand
                    if length >= max_len:
                        break
                cand = prev[cand]
        if best_len >= MIN_MATCH:
            yield ("match", best_off, best_len)
            for j in range(i, min(i + best_len, n - 2)):
                register(j)
            i += best_len
        else:
            yield ("lit", data[i])
            if i + 3 <= n:
                register(i)
            i += 1


def lz_bit_count(data: bytes) -> int:
    bits = 0
    for token in lz_tokens(data):
        bits += MATCH_BITS if token[0] == "match" else LITERAL_BITS
    return bits
