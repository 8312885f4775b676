"""Exception types shared across the package.

The CLI maps these to exit codes: InputError and subclasses exit 2,
CodecUnavailableError exits 3, anything else is a crash.
"""


class NcdstructError(Exception):
    """Base class for all package errors."""


class InputError(NcdstructError):
    """Bad user input: malformed files, invalid parameters, missing paths."""


class InvalidCodecError(InputError):
    """Codec specification that cannot be parsed or validated."""


class CodecUnavailableError(NcdstructError):
    """An external codec failed to run or exited nonzero."""


class UndefinedDistanceError(InputError):
    """NCD is undefined, e.g. both inputs empty."""


class GrammarError(InputError):
    """Malformed grammar file or inconsistent production probabilities."""


class ResourceLimitError(NcdstructError):
    """A guarded computation exceeded its configured size cap."""
