"""Probabilistic context-free grammars with exact probability accounting.

Grammar files hold one production per line, "<prob> <LHS> : <RHS symbols>",
where <prob> is a rational literal ("1", "0.5", "1/4") or a parameter
expression ("v", "1-v", "w", "1-w") resolved against caller bindings.
Symbols appearing on a left-hand side are nonterminals; everything else is
a terminal. The first production's LHS is the root.

All probabilities are Fractions, so production sums, sentence probabilities
and enumerated distributions are exact; entropies are -log2 of an exact
rational.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import GrammarError, InputError, ResourceLimitError
from .ncd import Document

MAX_EXPANSIONS = 10_000
MAX_LANGUAGE_SIZE = 10 ** 6

_PARAM_RE = re.compile(r"^1-([A-Za-z_]\w*)$")


@dataclass(frozen=True)
class Production:
    probability: Fraction
    lhs: str
    rhs: tuple[str, ...]


@dataclass
class Grammar:
    productions: list[Production]
    root: str
    nonterminals: frozenset[str]

    @property
    def terminals(self) -> frozenset:
        seen = set()
        for prod in self.productions:
            seen.update(s for s in prod.rhs if s not in self.nonterminals)
        return frozenset(seen)

    def rules_for(self, symbol: str) -> list[Production]:
        return [p for p in self.productions if p.lhs == symbol]

    def is_recursive(self) -> bool:
        edges: dict[str, set[str]] = {nt: set() for nt in self.nonterminals}
        for prod in self.productions:
            edges[prod.lhs].update(s for s in prod.rhs if s in self.nonterminals)
        # white/grey/black DFS over the nonterminal dependency graph
        state: dict[str, int] = {}

        def visit(node: str) -> bool:
            state[node] = 1
            for nxt in edges[node]:
                mark = state.get(nxt, 0)
                if mark == 1 or (mark == 0 and visit(nxt)):
                    return True
            state[node] = 2
            return False

        return any(visit(nt) for nt in self.nonterminals if state.get(nt, 0) == 0)


@dataclass(frozen=True)
class Sentence:
    text: str
    probability: Fraction

    def __post_init__(self):
        if not 0 < self.probability <= 1:
            raise GrammarError(f"sentence probability {self.probability} out of (0, 1]")

    @property
    def entropy_bits(self) -> float:
        return -math.log2(self.probability)


@dataclass
class CorpusSpec:
    grammar: Grammar
    target_size_bytes: int = 16000
    seed: int | str = 0
    doc_id: str = "corpus"
    class_label: str = ""


def _parse_probability(token: str, bindings: Mapping[str, Fraction],
                       lineno: int) -> Fraction:
    if token in bindings:
        return Fraction(bindings[token])
    m = _PARAM_RE.match(token)
    if m:
        name = m.group(1)
        if name not in bindings:
            raise GrammarError(f"line {lineno}: unbound parameter {name!r}")
        return 1 - Fraction(bindings[name])
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise GrammarError(
            f"line {lineno}: {token!r} is neither a rational nor a bound parameter"
        ) from None


def parse_grammar(source: Iterable[str] | str,
                  bindings: Mapping[str, Fraction] | None = None) -> Grammar:
    """Parse and validate a grammar, resolving parameter probabilities."""
    if isinstance(source, str):
        source = source.splitlines()
    bindings = bindings or {}
    productions: list[Production] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise GrammarError(f"line {lineno}: missing ':' in {line!r}")
        head_parts = head.split()
        if len(head_parts) != 2:
            raise GrammarError(f"line {lineno}: expected '<prob> <LHS> :', got {head!r}")
        prob = _parse_probability(head_parts[0], bindings, lineno)
        if not 0 < prob <= 1:
            raise GrammarError(f"line {lineno}: probability {prob} out of (0, 1]")
        rhs = tuple(tail.split())
        if not rhs:
            raise GrammarError(f"line {lineno}: empty right-hand side")
        productions.append(Production(prob, head_parts[1], rhs))
    if not productions:
        raise GrammarError("grammar has no productions")
    nonterminals = frozenset(p.lhs for p in productions)
    sums: dict[str, Fraction] = {}
    for prod in productions:
        sums[prod.lhs] = sums.get(prod.lhs, Fraction(0)) + prod.probability
    bad = {nt: s for nt, s in sums.items() if s != 1}
    if bad:
        detail = ", ".join(f"{nt} sums to {s}" for nt, s in sorted(bad.items()))
        raise GrammarError(f"production probabilities must sum to 1: {detail}")
    return Grammar(productions=productions, root=productions[0].lhs,
                   nonterminals=nonterminals)


def generate_sentence(g: Grammar, rng: random.Random) -> Sentence:
    """Sample one sentence by leftmost expansion from the root."""
    pending = [g.root]
    parts: list[str] = []
    probability = Fraction(1)
    expansions = 0
    while pending:
        symbol = pending.pop(0)
        if symbol not in g.nonterminals:
            parts.append(symbol)
            continue
        expansions += 1
        if expansions > MAX_EXPANSIONS:
            raise ResourceLimitError(
                f"sentence generation exceeded {MAX_EXPANSIONS} expansions"
            )
        rules = g.rules_for(symbol)
        draw = rng.random()
        acc = 0.0
        chosen = rules[-1]
        for rule in rules:
            acc += float(rule.probability)
            if draw < acc:
                chosen = rule
                break
        probability *= chosen.probability
        pending[:0] = chosen.rhs
    return Sentence(text="".join(parts), probability=probability)


def enumerate_distribution(g: Grammar) -> dict[str, Fraction]:
    """Exact sentence distribution of a non-recursive grammar."""
    if g.is_recursive():
        raise GrammarError("cannot enumerate a recursive grammar")
    cache: dict[str, dict[str, Fraction]] = {}

    def expand(symbol: str) -> dict[str, Fraction]:
        if symbol not in g.nonterminals:
            return {symbol: Fraction(1)}
        if symbol in cache:
            return cache[symbol]
        out: dict[str, Fraction] = {}
        for rule in g.rules_for(symbol):
            partial: dict[str, Fraction] = {"": rule.probability}
            for part in rule.rhs:
                sub = expand(part)
                nxt: dict[str, Fraction] = {}
                for text, p in partial.items():
                    for tail, q in sub.items():
                        nxt[text + tail] = nxt.get(text + tail, Fraction(0)) + p * q
                partial = nxt
                if len(partial) > MAX_LANGUAGE_SIZE:
                    raise ResourceLimitError(
                        f"language exceeds {MAX_LANGUAGE_SIZE} sentences"
                    )
            for text, p in partial.items():
                out[text] = out.get(text, Fraction(0)) + p
        cache[symbol] = out
        return out

    return expand(g.root)


def kl_divergence(q: Mapping[str, Fraction], p: Mapping[str, Fraction]) -> float:
    """Sum of q(x) * log2(q(x)/p(x)) in bits; requires support(q) within support(p)."""
    total = 0.0
    for text, q_x in q.items():
        if q_x == 0:
            continue
        p_x = p.get(text, Fraction(0))
        if p_x == 0:
            raise InputError(f"support violation: {text!r} has zero reference probability")
        total += float(q_x) * math.log2(Fraction(q_x) / Fraction(p_x))
    return total


def format_distribution(dist: Mapping[str, Fraction]) -> str:
    """One 'sentence<TAB>numerator/denominator' line per sentence, sorted."""
    lines = []
    for text in sorted(dist):
        p = Fraction(dist[text])
        lines.append(f"{text}\t{p.numerator}/{p.denominator}")
    return "\n".join(lines) + "\n"


def generate_corpus(spec: CorpusSpec) -> Document:
    """Concatenate sampled sentences until the next would overflow the target."""
    rng = random.Random(str(spec.seed))
    chunks: list[bytes] = []
    size = 0
    while True:
        sentence = generate_sentence(spec.grammar, rng).text.encode()
        if not sentence:
            raise GrammarError("grammar generated an empty sentence")
        if size + len(sentence) > spec.target_size_bytes:
            break
        chunks.append(sentence)
        size += len(sentence)
    if not chunks:
        raise InputError(
            f"target size {spec.target_size_bytes} is smaller than one sentence"
        )
    return Document(id=spec.doc_id, class_label=spec.class_label,
                    body=b"".join(chunks))
