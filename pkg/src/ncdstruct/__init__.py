"""Compression-based text structure analysis.

Measures how much a labeled text collection's identity rests on sequence
structure versus keyword content: distort documents to destroy structure,
compute normalized compression distances with a context-order-selectable
compressor, cluster into dendrograms, and score the damage.
"""

from .codec import (
    CodecSpec,
    CodeLength,
    PpmModel,
    compressed_size,
    parse_codec_spec,
    ppm_bits,
)
from .errors import (
    CodecUnavailableError,
    GrammarError,
    InputError,
    NcdstructError,
    ResourceLimitError,
    UndefinedDistanceError,
)
from .ncd import DistanceMatrix, Document, ncd, ncd_matrix

__version__ = "0.1.0"


def data_path(name: str):
    """Path to a packaged data file (reference trees, grammar, word list)."""
    from importlib.resources import files

    path = files("ncdstruct").joinpath("data", name)
    if not path.is_file():
        raise InputError(f"no packaged data file named {name!r}")
    return path

__all__ = [
    "CodecSpec",
    "CodeLength",
    "CodecUnavailableError",
    "DistanceMatrix",
    "Document",
    "GrammarError",
    "InputError",
    "NcdstructError",
    "PpmModel",
    "ResourceLimitError",
    "UndefinedDistanceError",
    "compressed_size",
    "data_path",
    "ncd",
    "ncd_matrix",
    "parse_codec_spec",
    "ppm_bits",
    "__version__",
]
