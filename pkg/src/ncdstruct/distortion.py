"""Structure-destroying document distortions.

The pipeline is: mask the most frequent words (each masked word becomes a
run of asterisks of the same length, so the text keeps its shape), then
optionally shuffle parts of the result:

* OO   keeps the masked text in original order (no randomness);
* RPA  permutes the asterisk runs among the asterisk slots;
* RPRW permutes the surviving words among the word slots;
* RPE  permutes words and asterisk runs together over their joint slots.

Separators never move, so the whitespace/punctuation skeleton is preserved
by every technique. Which words are masked is controlled by cumulative
frequency mass: the degree-d word set is the shortest prefix of the
frequency-sorted list accumulating at least d.

Randomness comes from a Mersenne Twister (random.Random) seeded with the
string "<seed>:<repetition_index>" and a hand-rolled Fisher-Yates shuffle,
so any fixture is reproducible from the plan alone.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import InputError
from .ncd import Document

TECHNIQUES = ("oo", "rpa", "rprw", "rpe")

# word = alphabetic run with internal apostrophes; hyphens split
_WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)*")


class TokenKind(Enum):
    WORD = "word"
    ASTERISK_RUN = "asterisk_run"
    SEPARATOR = "separator"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    original_index: int


@dataclass
class TokenSequence:
    tokens: list[Token]

    def render(self) -> str:
        return "".join(t.text for t in self.tokens)


@dataclass
class FrequencyList:
    entries: list[tuple[str, float]]

    def __post_init__(self):
        if not self.entries:
            raise InputError("frequency list is empty")

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.entries]


@dataclass(frozen=True)
class WordSet:
    degree: float
    words: frozenset[str]


@dataclass(frozen=True)
class DistortionPlan:
    technique: str
    degree: float
    seed: int = 0
    repetition_index: int = 0

    def __post_init__(self):
        if self.technique not in TECHNIQUES:
            raise InputError(f"unknown technique {self.technique!r}")
        if self.repetition_index < 0:
            raise InputError("repetition_index must be non-negative")

    def rng(self) -> random.Random:
        return random.Random(f"{self.seed}:{self.repetition_index}")


def load_frequency_list(source: Iterable[str] | str) -> FrequencyList:
    """Parse 'word<TAB>number' lines; '#' comments allowed; masses normalized."""
    if isinstance(source, str):
        source = source.splitlines()
    masses: dict[str, float] = {}
    count = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected 'word<TAB>number', got {line!r}")
        word = parts[0].strip().lower()
        try:
            mass = float(parts[1])
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric count {parts[1]!r}") from None
        if not word or mass <= 0:
            raise InputError(f"line {lineno}: word and count must be positive")
        masses[word] = masses.get(word, 0.0) + mass
        count += 1
    if not masses:
        raise InputError("frequency list has no entries")
    total = sum(masses.values())
    entries = sorted(
        ((w, m / total) for w, m in masses.items()),
        key=lambda wm: (-wm[1], wm[0]),
    )
    return FrequencyList(entries)


def build_word_sets(freq: FrequencyList, degrees: Sequence[float]) -> list[WordSet]:
    """Shortest frequency-mass prefixes; nested because prefixes nest."""
    for d in degrees:
        if not 0 < d <= 1:
            raise InputError(f"degree {d} outside (0, 1]")
    if list(degrees) != sorted(degrees):
        raise InputError("degrees must be sorted ascending")
    out = []
    for d in degrees:
        if d >= 1.0:
            out.append(WordSet(degree=d, words=frozenset(freq.words)))
            continue
        acc = 0.0
        chosen: list[str] = []
        for word, mass in freq.entries:
            if acc >= d - 1e-12:
                break
            chosen.append(word)
            acc += mass
        out.append(WordSet(degree=d, words=frozenset(chosen)))
    return out


def tokenize(text: str, asterisk_runs: bool = False) -> TokenSequence:
    """Split into word and separator tokens; concatenation reproduces text.

    With asterisk_runs=True (the post-masking mode), each maximal '*' run
    becomes its own token kind instead of being part of a separator.
    """
    tokens: list[Token] = []

    def separators(chunk: str) -> Iterable[tuple[TokenKind, str]]:
        if not asterisk_runs:
            if chunk:
                yield TokenKind.SEPARATOR, chunk
            return
        for piece in re.split(r"(\*+)", chunk):
            if not piece:
                continue
            kind = (TokenKind.ASTERISK_RUN if piece[0] == "*"
                    else TokenKind.SEPARATOR)
            yield kind, piece

    cursor = 0
    parts: list[tuple[TokenKind, str]] = []
    for m in _WORD_RE.finditer(text):
        parts.extend(separators(text[cursor:m.start()]))
        parts.append((TokenKind.WORD, m.group()))
        cursor = m.end()
    parts.extend(separators(text[cursor:]))
    for index, (kind, chunk) in enumerate(parts):
        tokens.append(Token(kind=kind, text=chunk, original_index=index))
    return TokenSequence(tokens)


def apply_oo(text: str, words: WordSet) -> str:
    """Mask every listed word with an equal-length asterisk run."""
    seq = tokenize(text)
    out = []
    for token in seq.tokens:
        if token.kind is TokenKind.WORD and token.text.lower() in words.words:
            out.append("*" * len(token.text))
        else:
            out.append(token.text)
    return "".join(out)


def _fisher_yates(items: list, rng: random.Random) -> list:
    items = list(items)
    for i in range(len(items) - 1, 0, -1):
        j = rng.randrange(i + 1)
        items[i], items[j] = items[j], items[i]
    return items


def permute(text: str, plan: DistortionPlan, rpa_any_slot: bool = False) -> str:
    """Shuffle the movable tokens of a masked text per the plan's technique.

    rpa_any_slot widens RPA: runs land on a random subset of all word and
    run slots, surviving words backfill the rest in their original order.
    """
    if plan.technique == "oo":
        raise InputError("permute is undefined for technique 'oo'")
    seq = tokenize(text, asterisk_runs=True)
    tokens = list(seq.tokens)
    movable_kinds = {
        "rpa": (TokenKind.ASTERISK_RUN,),
        "rprw": (TokenKind.WORD,),
        "rpe": (TokenKind.WORD, TokenKind.ASTERISK_RUN),
    }[plan.technique]
    rng = plan.rng()
    if plan.technique == "rpa" and rpa_any_slot:
        slots = [i for i, t in enumerate(tokens)
                 if t.kind in (TokenKind.WORD, TokenKind.ASTERISK_RUN)]
        runs = [t for t in tokens if t.kind is TokenKind.ASTERISK_RUN]
        words = [t for t in tokens if t.kind is TokenKind.WORD]
        run_slots = sorted(rng.sample(slots, len(runs)))
        shuffled = _fisher_yates(runs, rng)
        word_iter = iter(words)
        run_iter = iter(shuffled)
        filled = dict(zip(run_slots, run_iter))
        out = []
        for i, token in enumerate(tokens):
            if i in filled:
                out.append(filled[i].text)
            elif i in slots:
                out.append(next(word_iter).text)
            else:
                out.append(token.text)
        return "".join(out)
    slots = [i for i, t in enumerate(tokens) if t.kind in movable_kinds]
    shuffled = _fisher_yates([tokens[i] for i in slots], rng)
    for slot, token in zip(slots, shuffled):
        tokens[slot] = token
    return "".join(t.text for t in tokens)


def distort_document(doc: Document, words: WordSet, plan: DistortionPlan,
                     rpa_any_slot: bool = False) -> Document:
    """Mask then (except OO) permute; id and label are preserved."""
    text = doc.body.decode("utf-8")
    masked = apply_oo(text, words)
    if plan.technique != "oo":
        masked = permute(masked, plan, rpa_any_slot=rpa_any_slot)
    return Document(id=doc.id, class_label=doc.class_label,
                    body=masked.encode("utf-8"))
