"""Adapter for external compressors used as a codec.

Contract: the program reads raw bytes on stdin, writes the compressed
stream to stdout, and exits 0.  Anything else (missing binary, nonzero
exit) raises CodecUnavailableError.
"""

from __future__ import annotations

import shlex
import subprocess

from ..errors import CodecUnavailableError, InvalidCodecError


def external_byte_count(data: bytes, command: str) -> int:
    argv = shlex.split(command)
    if not argv:
        raise InvalidCodecError("external codec command is empty")
    try:
        proc = subprocess.run(argv, input=data, stdout=subprocess.PIPE,
                              stderr=subprocess.PIPE)
    except (FileNotFoundError, PermissionError) as exc:
        raise CodecUnavailableError(f"cannot run external codec {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        detail = proc.stderr.decode("utf-8", "replace").strip()[-200:]
        raise CodecUnavailableError(
            f"external codec {argv[0]!r} exited {proc.returncode}: {detail}"
        )
    return len(proc.stdout)
