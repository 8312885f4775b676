"""Unrooted binary trees over documents, built from a distance matrix.

Leaves carry document ids; internal nodes are anonymous. For n leaves a
valid tree has exactly n - 2 internal nodes, all of degree 3. The metric
used everywhere downstream is the number of internal nodes on the unique
path between two leaves.

Construction is deterministic average-linkage agglomeration; an optional
refinement stage proposes random nearest-neighbor interchanges and leaf
swaps, accepting only strict score improvements. The score of a tree is
sum over leaf pairs of distance(i,j) * 2^-(path+1): pairs the matrix calls
similar are pulled onto short paths, so lower is better.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import InputError
from .ncd import DistanceMatrix


@dataclass
class UnrootedBinaryTree:
    # adjacency over node ids: leaves are strings, internal nodes ints
    adj: dict[object, list[object]] = field(default_factory=dict)

    @property
    def leaves(self) -> list[str]:
        return sorted(n for n in self.adj if isinstance(n, str))

    @property
    def internal_nodes(self) -> list[int]:
        return sorted(n for n in self.adj if not isinstance(n, str))

    def validate(self) -> None:
        leaves = self.leaves
        internal = self.internal_nodes
        n = len(leaves)
        if n < 3:
            raise InputError(f"tree needs at least 3 leaves, got {n}")
        if len(internal) != n - 2:
            raise InputError(
                f"{n} leaves require {n - 2} internal nodes, found {len(internal)}"
            )
        for leaf in leaves:
            if len(self.adj[leaf]) != 1:
                raise InputError(f"leaf {leaf!r} has degree {len(self.adj[leaf])}")
        for node in internal:
            if len(self.adj[node]) != 3:
                raise InputError(f"internal node {node} has degree {len(self.adj[node])}")
        # connectivity: walk from one leaf
        seen = {leaves[0]}
        stack = [leaves[0]]
        while stack:
            for nxt in self.adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(self.adj):
            raise InputError("tree is not connected")

    def copy(self) -> "UnrootedBinaryTree":
        return UnrootedBinaryTree({k: list(v) for k, v in self.adj.items()})

    def leaf_distance(self, a: str, b: str) -> int:
        """Internal nodes on the unique a-b path."""
        if a == b:
            raise InputError("leaf_distance requires two distinct leaves")
        for leaf in (a, b):
            if leaf not in self.adj or not isinstance(leaf, str):
                raise InputError(f"unknown leaf id {leaf!r}")
        parent = {a: None}
        stack = [a]
        while stack:
            node = stack.pop()
            if node == b:
                break
            for nxt in self.adj[node]:
                if nxt not in parent:
                    parent[nxt] = node
                    stack.append(nxt)
        edges = 0
        node = b
        while parent[node] is not None:
            node = parent[node]
            edges += 1
        return edges - 1

    def all_leaf_distances(self) -> dict[tuple[str, str], int]:
        """Distance for every unordered leaf pair, keyed both ways."""
        out: dict[tuple[str, str], int] = {}
        for a in self.leaves:
            depth = {a: 0}
            stack = [a]
            while stack:
                node = stack.pop()
                for nxt in self.adj[node]:
                    if nxt not in depth:
                        depth[nxt] = depth[node] + 1
                        if isinstance(nxt, str):
                            out[(a, nxt)] = depth[nxt] - 1
                        else:
                            stack.append(nxt)
        return out

    # Newick support: internal nodes unlabeled, no branch lengths.
    def to_newick(self) -> str:
        root = self._canonical_root()
        rendered = ",".join(self._render(child, root) for child in self._ordered(root))
        return f"({rendered});"

    def _canonical_root(self) -> int:
        smallest = min(self.leaves)
        return self.adj[smallest][0]

    def _min_descendant(self, node, parent) -> str:
        if isinstance(node, str):
            return node
        return min(self._min_descendant(c, node)
                   for c in self.adj[node] if c != parent)

    def _ordered(self, root) -> list:
        return sorted(self.adj[root], key=lambda c: self._min_descendant(c, root))

    def _render(self, node, parent) -> str:
        if isinstance(node, str):
            return node
        children = sorted((c for c in self.adj[node] if c != parent),
                          key=lambda c: self._min_descendant(c, node))
        return "(" + ",".join(self._render(c, node) for c in children) + ")"

    @classmethod
    def from_newick(cls, text: str) -> "UnrootedBinaryTree":
        text = text.strip()
        if not text.endswith(";"):
            raise InputError("newick text must end with ';'")
        tree = cls()
        counter = [0]

        def fresh() -> int:
            counter[0] += 1
            return counter[0]

        def link(a, b):
            tree.adj.setdefault(a, []).append(b)
            tree.adj.setdefault(b, []).append(a)

        pos = [0]
        body = text[:-1]

        def parse_node():
            if pos[0] < len(body) and body[pos[0]] == "(":
                pos[0] += 1
                node = fresh()
                while True:
                    child = parse_node()
                    link(node, child)
                    if pos[0] >= len(body):
                        raise InputError("unbalanced parentheses in newick text")
                    ch = body[pos[0]]
                    pos[0] += 1
                    if ch == ")":
                        return node
                    if ch != ",":
                        raise InputError(f"unexpected {ch!r} in newick text")
            start = pos[0]
            while pos[0] < len(body) and body[pos[0]] not in "(),":
                pos[0] += 1
            label = body[start:pos[0]].strip()
            if not label:
                raise InputError("empty leaf label in newick text")
            return label

        root = parse_node()
        if pos[0] != len(body):
            raise InputError("trailing characters after newick root")
        # a rooted two-child node is an artifact of serialization: fuse it
        if not isinstance(root, str) and len(tree.adj[root]) == 2:
            a, b = tree.adj.pop(root)
            tree.adj[a].remove(root)
            tree.adj[b].remove(root)
            link(a, b)
        tree.validate()
        return tree


def tree_score(t: UnrootedBinaryTree, m: DistanceMatrix) -> float:
    """Sum of matrix distance times 2^-(leaf path + 1); lower is better."""
    dist = t.all_leaf_distances()
    total = 0.0
    ids = m.ids
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            total += m.values[i, j] * 2.0 ** -(dist[(ids[i], ids[j])] + 1)
    return total


def build_tree_agglomerative(m: DistanceMatrix) -> UnrootedBinaryTree:
    """Average-linkage merge tree with the degree-2 root suppressed.

    Ties pick the merge whose (min id, min id) pair is lexicographically
    smallest, so the topology is independent of input row order.
    """
    n = len(m.ids)
    if n < 3:
        raise InputError(f"need at least 3 documents, got {n}")
    if not (m.values == m.values.T).all():
        raise InputError("distance matrix must be symmetric")
    index = {doc_id: k for k, doc_id in enumerate(m.ids)}
    # cluster state: members, attachment node, pairwise distance sums
    clusters: dict[str, dict] = {
        doc_id: {"members": [doc_id], "node": doc_id} for doc_id in m.ids
    }
    cross: dict[tuple[str, str], float] = {}
    for a in m.ids:
        for b in m.ids:
            if a < b:
                cross[(a, b)] = float(m.values[index[a], index[b]])

    tree = UnrootedBinaryTree({doc_id: [] for doc_id in m.ids})
    next_internal = 0
    while len(clusters) > 2:
        best = None
        for a in clusters:
            for b in clusters:
                if a < b:
                    link = cross[(a, b)] / (len(clusters[a]["members"])
                                            * len(clusters[b]["members"]))
                    key = (link, a, b)
                    if best is None or key < best:
                        best = key
        _, a, b = best
        node = next_internal
        next_internal += 1
        tree.adj[node] = [clusters[a]["node"], clusters[b]["node"]]
        tree.adj[clusters[a]["node"]].append(node)
        tree.adj[clusters[b]["node"]].append(node)
        merged = {
            "members": clusters[a]["members"] + clusters[b]["members"],
            "node": node,
        }
        del clusters[a], clusters[b]
        new_key = min(a, b)
        for other in clusters:
            lo_a, hi_a = sorted((a, other))
            lo_b, hi_b = sorted((b, other))
            summed = cross.pop((lo_a, hi_a)) + cross.pop((lo_b, hi_b))
            cross[tuple(sorted((new_key, other)))] = summed
        clusters[new_key] = merged
    # join the last two clusters directly: no degree-2 root
    (a, b) = sorted(clusters)
    tree.adj[clusters[a]["node"]].append(clusters[b]["node"])
    tree.adj[clusters[b]["node"]].append(clusters[a]["node"])
    tree.validate()
    return tree


def _nni_variants(t: UnrootedBinaryTree, u: int, v: int) -> list[UnrootedBinaryTree]:
    """The two alternative topologies across internal edge (u, v)."""
    u_side = [x for x in t.adj[u] if x != v]
    v_side = [x for x in t.adj[v] if x != u]
    out = []
    for swap_with in v_side:
        alt = t.copy()
        moved = u_side[1]
        alt.adj[u].remove(moved)
        alt.adj[moved].remove(u)
        alt.adj[v].remove(swap_with)
        alt.adj[swap_with].remove(v)
        alt.adj[u].append(swap_with)
        alt.adj[swap_with].append(u)
        alt.adj[v].append(moved)
        alt.adj[moved].append(v)
        out.append(alt)
    return out


def refine_tree(m: DistanceMatrix, t: UnrootedBinaryTree, iterations: int,
                seed: int | str = 0) -> UnrootedBinaryTree:
    """Hill-climb on tree_score with random NNI and leaf-swap proposals."""
    t.validate()
    if sorted(t.leaves) != sorted(m.ids):
        raise InputError("tree leaves do not match matrix ids")
    rng = random.Random(str(seed))
    best = t.copy()
    best_score = tree_score(best, m)
    leaves = best.leaves
    for _ in range(iterations):
        internal_edges = [
            (u, v)
            for u in best.internal_nodes
            for v in best.adj[u]
            if not isinstance(v, str) and u < v
        ]
        if internal_edges and rng.random() < 0.5:
            u, v = internal_edges[rng.randrange(len(internal_edges))]
            variants = _nni_variants(best, u, v)
            candidate = variants[rng.randrange(len(variants))]
        else:
            a, b = rng.sample(leaves, 2)
            candidate = best.copy()
            pa, pb = candidate.adj[a][0], candidate.adj[b][0]
            candidate.adj[pa][candidate.adj[pa].index(a)] = b
            candidate.adj[pb][candidate.adj[pb].index(b)] = a
            candidate.adj[a] = [pb]
            candidate.adj[b] = [pa]
        score = tree_score(candidate, m)
        if score < best_score:
            best, best_score = candidate, score
    best.validate()
    return best
