"""Prediction by partial matching with escape method D.

The coder is an ideal-length model: it accumulates sum(-log2 p) over the
input instead of emitting a bitstream.  Probabilities follow method D: a
symbol seen c times in a context with n total counts and d distinct symbols
gets (2c - 1) / (2n), and the escape gets d / (2n).  A novel symbol enters
a context with half a count, the other half going to the escape mass, which
is what those two formulas encode.

Prediction walks contexts from the longest suffix down to order 0 and
finally a uniform order -1 over all 256 byte values.  Symbols rejected at a
higher order are fully excluded from lower-order estimates.  Contexts that
hold no usable symbol (never seen, or everything excluded) are skipped at
no cost.  After each symbol every context order from 0 to N is updated.

Counts are plain integers and never rescaled, so code lengths are exact for
inputs of any size the tests use (up to a few MiB).

Two interchangeable backends live here: a dict-based reference model, kept
deliberately simple, and a compiled fast path in _ppm_fast used for orders
up to MAX_FAST_ORDER when numba is importable.  Both produce the same
probability sequence; tests assert agreement.
"""

from __future__ import annotations

import math

from ..errors import InvalidCodecError

MIN_ORDER = 1
MAX_ORDER = 16
ALPHABET = 256

# fast-path context keys pack the order and up to 7 context bytes in an int64
MAX_FAST_ORDER = 7

try:
    from . import _ppm_fast
except ImportError:  # pragma: no cover - numba is a declared dependency
    _ppm_fast = None


def _check_order(order: int) -> None:
    if not isinstance(order, int) or not (MIN_ORDER <= order <= MAX_ORDER):
        raise InvalidCodecError(
            f"PPM order must be an integer in [{MIN_ORDER}, {MAX_ORDER}], got {order!r}"
        )


class _PurePpm:
    """Reference implementation: contexts are a dict of byte-string keys."""

    __slots__ = ("order", "contexts", "tail")

    def __init__(self, order: int):
        self.order = order
        self.contexts: dict[bytes, dict[int, int]] = {}
        self.tail = b""  # last `order` bytes fed so far

    def fork(self) -> "_PurePpm":
        other = _PurePpm(self.order)
        other.contexts = {ctx: dict(table) for ctx, table in self.contexts.items()}
        other.tail = self.tail
        return other

    def update(self, data: bytes) -> float:
        bits = 0.0
        contexts = self.contexts
        hist = self.tail
        for b in data:
            excluded: set[int] = set()
            found = False
            for k in range(min(self.order, len(hist)), -1, -1):
                ctx = hist[len(hist) - k:]
                table = contexts.get(ctx)
                if not table:
                    continue
                n_eff = 0
                d_eff = 0
                c_sym = 0
                for sym, count in table.items():
                    if sym in excluded:
                        continue
                    n_eff += count
                    d_eff += 1
                    if sym == b:
                        c_sym = count
                if n_eff == 0:
                    continue  # everything visible here was already excluded
                if c_sym:
                    bits -= math.log2((2 * c_sym - 1) / (2 * n_eff))
                    found = True
                    break
                bits -= math.log2(d_eff / (2 * n_eff))
                excluded.update(table)
            if not found:
                # order -1: uniform over the bytes not yet rejected
                bits += math.log2(ALPHABET - len(excluded))
            for k in range(min(self.order, len(hist)) + 1):
                ctx = hist[len(hist) - k:]
                table = contexts.setdefault(ctx, {})
                table[b] = table.get(b, 0) + 1
            hist = (hist + bytes([b]))[-self.order:]
        self.tail = hist
        return bits


class PpmModel:
    """Stateful PPM coder that can be forked to share a trained prefix.

    update(data) returns the ideal code length, in bits, of `data` coded as
    a continuation of everything fed so far.  fork() snapshots the model, so
    the cost of many different continuations of one prefix can be measured
    without re-coding the prefix.
    """

    __slots__ = ("order", "_impl")

    def __init__(self, order: int = 6, use_fast: bool | None = None):
        _check_order(order)
        self.order = order
        if use_fast is None:
            use_fast = _ppm_fast is not None and order <= MAX_FAST_ORDER
        elif use_fast and (_ppm_fast is None or order > MAX_FAST_ORDER):
            raise InvalidCodecError(
                f"fast PPM backend unavailable for order {order}"
            )
        self._impl = _ppm_fast.FastPpm(order) if use_fast else _PurePpm(order)

    @property
    def backend(self) -> str:
        return "fast" if not isinstance(self._impl, _PurePpm) else "pure"

    def update(self, data: bytes) -> float:
        return self._impl.update(bytes(data))

    def fork(self) -> "PpmModel":
        clone = object.__new__(PpmModel)
        clone.order = self.order
        clone._impl = self._impl.fork()
        return clone


def ppm_bits(data: bytes, order: int = 6) -> float:
    """Ideal PPM code length of `data` in bits, starting from an empty model."""
    _check_order(order)
    if len(data) == 0:
        return 0.0
    return PpmModel(order).update(data)
