"""Compressor families behind one size-measuring interface.

Everything the rest of the package needs from a compressor is the length
of its output, as a CodeLength.  Four families are supported:

  ppm:N   adaptive PPM, escape method D, ideal bits (N in 1..16, default 6)
  lz      simplified LZ77, fixed-width tokens
  bwt     block-sorting pipeline (BWT + MTF + RLE0 + adaptive order-0)
  ext:C   external program C, measured by its stdout byte count

PPM reports fractional ideal bits; the other families report whole bits.
An empty input always codes to zero bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidCodecError
from .bwt import bwt_bits, bwt_forward, bwt_inverse, bwt_transform
from .external import external_byte_count
from .lz import lz_bit_count, lz_tokens
from .ppm import MAX_ORDER, MIN_ORDER, PpmModel, ppm_bits

__all__ = [
    "CodeLength", "CodecSpec", "parse_codec_spec", "compressed_size",
    "PpmModel", "ppm_bits", "lz_bit_count", "lz_tokens",
    "bwt_bits", "bwt_forward", "bwt_inverse", "bwt_transform",
    "MIN_ORDER", "MAX_ORDER",
]

_FAMILIES = ("ppm", "lz", "bwt", "ext")
DEFAULT_PPM_ORDER = 6


@dataclass(frozen=True)
class CodeLength:
    """Length of a compressed representation; bytes is bits rounded up."""

    bits: float

    @property
    def bytes(self) -> int:
        return math.ceil(self.bits / 8)

    def __post_init__(self):
        if self.bits < 0 or not math.isfinite(self.bits):
            raise ValueError(f"invalid code length: {self.bits!r} bits")


@dataclass(frozen=True)
class CodecSpec:
    family: str
    order: int = DEFAULT_PPM_ORDER
    command: str = ""

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidCodecError(f"unknown codec family {self.family!r}")
        if self.family == "ppm" and not (MIN_ORDER <= self.order <= MAX_ORDER):
            raise InvalidCodecError(
                f"PPM order must be in [{MIN_ORDER}, {MAX_ORDER}], got {self.order}"
            )
        if self.family == "ext" and not self.command.strip():
            raise InvalidCodecError("external codec requires a command line")

    @property
    def label(self) -> str:
        if self.family == "ppm":
            return f"ppm:{self.order}"
        if self.family == "ext":
            return f"ext:{self.command}"
        return self.family


def parse_codec_spec(text: str) -> CodecSpec:
    """Parse the textual forms "ppm:N", "lz", "bwt", "ext:<command>"."""
    spec = text.strip()
    if spec == "lz":
        return CodecSpec("lz")
    if spec == "bwt":
        return CodecSpec("bwt")
    if spec == "ppm":
        return CodecSpec("ppm")
    if spec.startswith("ppm:"):
        raw = spec[4:]
        try:
            order = int(raw)
        except ValueError:
            raise InvalidCodecError(f"bad PPM order {raw!r} in {text!r}") from None
        return CodecSpec("ppm", order=order)
    if spec.startswith("ext:"):
        return CodecSpec("ext", command=spec[4:].strip())
    raise InvalidCodecError(f"cannot parse codec spec {text!r}")


def compressed_size(data: bytes, codec: CodecSpec) -> CodeLength:
    """Compressed size of `data` under `codec`; deterministic per input."""
    if not data:
        if codec.family == "ext":
            return CodeLength(8.0 * external_byte_count(data, codec.command))
        return CodeLength(0.0)
    if codec.family == "ppm":
        return CodeLength(ppm_bits(data, codec.order))
    if codec.family == "lz":
        return CodeLength(float(lz_bit_count(data)))
    if codec.family == "bwt":
        return CodeLength(bwt_bits(data))
    return CodeLength(8.0 * external_byte_count(data, codec.command))
