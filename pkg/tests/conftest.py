from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from ncdstruct import data_path
from ncdstruct.dendro import UnrootedBinaryTree
from ncdstruct.distortion import build_word_sets, load_frequency_list
from ncdstruct.grammar import parse_grammar
from ncdstruct.ncd import DistanceMatrix, Document

TESTS_DIR = Path(__file__).parent


@pytest.fixture(scope="session")
def english_text() -> bytes:
    return (TESTS_DIR / "data" / "english.txt").read_bytes()


@pytest.fixture(scope="session")
def frequency_list():
    return load_frequency_list(data_path("english_freq.tsv").read_text())


@pytest.fixture(scope="session")
def word_sets(frequency_list):
    """Word sets for the ten standard degrees, keyed by degree."""
    degrees = [round(0.1 * k, 1) for k in range(1, 11)]
    return {ws.degree: ws for ws in build_word_sets(frequency_list, degrees)}


@pytest.fixture(scope="session")
def mixed_tree() -> UnrootedBinaryTree:
    return UnrootedBinaryTree.from_newick(data_path("books14_mixed.nwk").read_text())


@pytest.fixture(scope="session")
def clean_tree() -> UnrootedBinaryTree:
    return UnrootedBinaryTree.from_newick(data_path("books14_clean.nwk").read_text())


# Grammar whose sentences carry a genuine long-range dependency: the
# symbol before the terminator is determined by the first symbol, with
# two constant symbols in between.  A model with context length >= 3 can
# resolve it; shorter contexts see a coin flip.
DEEP_CONTEXT_GRAMMAR = """\
1 SS : S . 9 8 7
0.5 S : a M
0.5 S : b N
1 M : x y P
1 N : x y Q
0.9 P : c
0.1 P : d
0.1 Q : c
0.9 Q : d
"""


@pytest.fixture(scope="session")
def deep_context_corpus():
    from ncdstruct.grammar import CorpusSpec, generate_corpus, parse_grammar

    grammar = parse_grammar(DEEP_CONTEXT_GRAMMAR)
    doc = generate_corpus(CorpusSpec(grammar=grammar, target_size_bytes=16000,
                                     seed="deep", doc_id="deep",
                                     class_label="deep"))
    return doc.body


@pytest.fixture(scope="session")
def half_bound_grammar():
    half = Fraction(1, 2)
    return parse_grammar(data_path("structural.pcfg").read_text(),
                         {"v": half, "w": half})


def random_bytes(seed: int, size: int) -> bytes:
    return random.Random(seed).randbytes(size)


def star3(a="a", b="b", c="c") -> UnrootedBinaryTree:
    return UnrootedBinaryTree({a: [0], b: [0], c: [0], 0: [a, b, c]})


def quartet() -> UnrootedBinaryTree:
    """((a,b),(c,d)) as an unrooted tree."""
    return UnrootedBinaryTree({
        "a": [0], "b": [0], "c": [1], "d": [1],
        0: ["a", "b", 1], 1: ["c", "d", 0],
    })


def tree_edges(t):
    seen = set()
    for u, nbrs in t.adj.items():
        for v in nbrs:
            edge = (u, v) if repr(u) < repr(v) else (v, u)
            seen.add(edge)
    return sorted(seen, key=repr)


def insert_leaf(t, leaf, edge, new_internal):
    out = t.copy()
    u, v = edge
    out.adj[u][out.adj[u].index(v)] = new_internal
    out.adj[v][out.adj[v].index(u)] = new_internal
    out.adj[new_internal] = [u, v, leaf]
    out.adj[leaf] = [new_internal]
    return out


def all_topologies(leaves):
    """Every unrooted binary tree over `leaves`, built by edge insertion."""
    trees = [star3(*leaves[:3])]
    next_internal = 1
    for leaf in leaves[3:]:
        trees = [insert_leaf(t, leaf, edge, next_internal)
                 for t in trees for edge in tree_edges(t)]
        next_internal += 1
    return trees


def swap_leaves(t, a, b):
    """Exchange the positions of two leaves, keeping the topology."""
    out = t.copy()
    pa, pb = out.adj[a][0], out.adj[b][0]
    out.adj[pa][out.adj[pa].index(a)] = b
    out.adj[pb][out.adj[pb].index(b)] = a
    out.adj[a] = [pb]
    out.adj[b] = [pa]
    return out


@pytest.fixture(scope="session")
def english_dataset(tmp_path_factory, english_text) -> Path:
    """Directory-per-class corpus: three classes x two 800-byte documents.

    Within a class the two slices share 350 bytes of running text, so a
    substring-matching compressor pairs them up confidently; across classes
    the slices come from distant regions of the fixture text.
    """
    text = english_text.decode("utf-8")
    root = tmp_path_factory.mktemp("english3x2")
    for label, base in (("alpha", 0), ("beta", 6000), ("gamma", 12000)):
        class_dir = root / label
        class_dir.mkdir()
        (class_dir / "doc0.txt").write_text(text[base:base + 800])
        (class_dir / "doc1.txt").write_text(text[base + 450:base + 1250])
    return root


# Corpus whose class signal is purely lexical: each class draws most of its
# tokens from a private vocabulary, the rest from a shared filler pool, and
# token order is random.  There is nothing for a long context to latch onto,
# so a short-context compressor should do at least as well as a long one.
KEYWORD_FILLER = ["the", "and", "with", "from", "this", "that",
                  "then", "very", "some", "more"]
KEYWORD_VOCAB = {
    "law": ["statute", "verdict", "appeal", "court", "judge", "plea"],
    "sea": ["harbor", "sailing", "anchor", "tide", "vessel", "reef"],
    "farm": ["harvest", "plough", "barley", "meadow", "cattle", "silo"],
}


@pytest.fixture(scope="session")
def keyword_dataset_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("keywords")
    for label, words in KEYWORD_VOCAB.items():
        class_dir = root / label
        class_dir.mkdir()
        for k in range(4):
            rng = random.Random(f"kw:{label}:{k}")
            tokens = [rng.choice(words) if rng.random() < 0.65
                      else rng.choice(KEYWORD_FILLER)
                      for _ in range(140)]
            (class_dir / f"doc{k:02d}.txt").write_text(" ".join(tokens))
    return root


def square_matrix(ids, values, codec_label="test") -> DistanceMatrix:
    return DistanceMatrix(ids=list(ids),
                          values=np.asarray(values, dtype=float),
                          codec_label=codec_label)


def make_documents(bodies: dict[str, bytes]) -> list[Document]:
    """Documents from {'class/file': body} mappings."""
    return [Document(id=doc_id, class_label=doc_id.split("/")[0], body=body)
            for doc_id, body in sorted(bodies.items())]
