"""Normalized compression distance and pairwise distance matrices.

NCD(x, y) = (max{C(xy) - C(x), C(yx) - C(y)}) / max{C(x), C(y)}, with all
sizes measured in bits by the configured codec.  Both concatenation orders
are computed; nothing is approximated.

For the PPM family the concatenation sizes reuse a model trained once per
document: C(xy) = C(x) + cost of y coded as a continuation of x.  The sum
is associated differently than coding xy in one sweep, which can move the
result by a few ulps but nothing more; every entry is still a deterministic
function of (bytes, codec).
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .codec import CodecSpec, PpmModel, compressed_size
from .errors import InputError, UndefinedDistanceError

# values above 1 signal codec imperfection; above 1 + epsilon they are suspect
EPSILON = 0.1


@dataclass
class Document:
    id: str
    class_label: str
    body: bytes

    def __post_init__(self):
        if not self.id:
            raise InputError("document id must be nonempty")


@dataclass
class DistanceMatrix:
    ids: list[str]
    values: np.ndarray
    codec_label: str = ""

    def __post_init__(self):
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise InputError(
                f"matrix shape {self.values.shape} does not match {n} ids"
            )

    def index_of(self, doc_id: str) -> int:
        try:
            return self.ids.index(doc_id)
        except ValueError:
            raise InputError(f"unknown document id {doc_id!r}") from None

    def check_range(self) -> None:
        peak = float(self.values.max(initial=0.0))
        if peak > 1.0 + EPSILON:
            warnings.warn(
                f"NCD value {peak:.6f} exceeds 1 + {EPSILON}; codec output is suspect",
                stacklevel=2,
            )
        elif peak > 1.0:
            warnings.warn(
                f"NCD value {peak:.6f} exceeds 1 (within the {EPSILON} tolerance)",
                stacklevel=2,
            )

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("id," + ",".join(self.ids) + "\n")
        for i, doc_id in enumerate(self.ids):
            row = ",".join(f"{v:.6f}" for v in self.values[i])
            out.write(f"{doc_id},{row}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, codec_label: str = "") -> "DistanceMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("id,"):
            raise InputError("distance matrix CSV must start with an 'id,' header")
        ids = lines[0].split(",")[1:]
        n = len(ids)
        if len(lines) - 1 != n:
            raise InputError(f"expected {n} matrix rows, found {len(lines) - 1}")
        values = np.zeros((n, n))
        for i, line in enumerate(lines[1:]):
            cells = line.split(",")
            if cells[0] != ids[i] or len(cells) != n + 1:
                raise InputError(f"malformed matrix row {i + 1}: {line[:60]!r}")
            values[i] = [float(c) for c in cells[1:]]
        if not np.array_equal(values, values.T):
            raise InputError("distance matrix CSV is not symmetric")
        return cls(ids=ids, values=values, codec_label=codec_label)


def _pair_from_bits(cx: float, cy: float, cxy: float, cyx: float) -> float:
    denom = max(cx, cy)
    if denom <= 0:
        raise UndefinedDistanceError("NCD undefined: both inputs compress to zero bits")
    return max(cxy - cx, cyx - cy) / denom


def ncd(x: bytes, y: bytes, codec: CodecSpec) -> float:
    """Distance between two byte strings; raises if both are empty."""
    if codec.family == "ppm":
        mx = PpmModel(codec.order)
        cx = mx.update(x)
        my = PpmModel(codec.order)
        cy = my.update(y)
        cxy = cx + mx.fork().update(y)
        cyx = cy + my.fork().update(x)
    else:
        cx = compressed_size(x, codec).bits
        cy = compressed_size(y, codec).bits
        cxy = compressed_size(x + y, codec).bits
        cyx = compressed_size(y + x, codec).bits
    return _pair_from_bits(cx, cy, cxy, cyx)


def _check_ids(docs: Sequence[Document]) -> None:
    seen = set()
    for doc in docs:
        if doc.id in seen:
            raise InputError(f"duplicate document id {doc.id!r}")
        seen.add(doc.id)


def ncd_matrix(docs: Sequence[Document], codec: CodecSpec,
               workers: int = 1) -> DistanceMatrix:
    """Full symmetric NCD matrix over `docs`, including the diagonal.

    workers > 1 splits the pair computations across processes; results are
    assembled by index, so the output is identical to the sequential run.
    """
    docs = list(docs)
    _check_ids(docs)
    n = len(docs)
    values = np.zeros((n, n))
    if n and workers > 1:
        singles, concat = _pair_bits_parallel(docs, codec, workers)
    elif n:
        singles, concat = _pair_bits_sequential(docs, codec)
    for i in range(n):
        for j in range(i, n):
            d = _pair_from_bits(singles[i], singles[j],
                                concat[(i, j)], concat[(j, i)])
            values[i, j] = values[j, i] = d
    matrix = DistanceMatrix(ids=[d.id for d in docs], values=values,
                            codec_label=codec.label)
    matrix.check_range()
    return matrix


def _pair_bits_sequential(docs, codec):
    n = len(docs)
    singles = [0.0] * n
    concat: dict[tuple[int, int], float] = {}
    if codec.family == "ppm":
        # one trained model per document, forked per partner
        for i, doc in enumerate(docs):
            base = PpmModel(codec.order)
            singles[i] = base.update(doc.body)
            concat[(i, i)] = singles[i] + base.fork().update(doc.body)
            for j, other in enumerate(docs):
                if i != j:
                    concat[(i, j)] = singles[i] + base.fork().update(other.body)
        return singles, concat
    for i, doc in enumerate(docs):
        singles[i] = compressed_size(doc.body, codec).bits
    for i in range(n):
        for j in range(n):
            concat[(i, j)] = compressed_size(docs[i].body + docs[j].body, codec).bits
    return singles, concat


def _row_task(args):
    i, codec = args
    docs = _WORKER_DOCS
    base = PpmModel(codec.order) if codec.family == "ppm" else None
    out = []
    if base is not None:
        ci = base.update(docs[i])
        out.append(((i, i), ci + base.fork().update(docs[i])))
        for j in range(len(docs)):
            if j != i:
                out.append(((i, j), ci + base.fork().update(docs[j])))
    else:
        ci = compressed_size(docs[i], codec).bits
        for j in range(len(docs)):
            out.append(((i, j), compressed_size(docs[i] + docs[j], codec).bits))
    return i, ci, out


_WORKER_DOCS: list[bytes] = []


def _worker_init(bodies):
    global _WORKER_DOCS
    _WORKER_DOCS = bodies


def _pair_bits_parallel(docs, codec, workers):
    from concurrent.futures import ProcessPoolExecutor

    bodies = [d.body for d in docs]
    singles = [0.0] * len(docs)
    concat: dict[tuple[int, int], float] = {}
    with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                             initargs=(bodies,)) as pool:
        for i, ci, chunk in pool.map(_row_task,
                                     [(i, codec) for i in range(len(docs))]):
            singles[i] = ci
            concat.update(chunk)
    return singles, concat
