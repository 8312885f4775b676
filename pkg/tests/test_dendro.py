"""Tests for unrooted binary trees, scoring, construction and refinement."""

import random

import numpy as np
import pytest

from ncdstruct.dendro import (UnrootedBinaryTree, build_tree_agglomerative,
                              refine_tree, tree_score)
from ncdstruct.errors import InputError

from conftest import all_topologies, quartet, square_matrix, star3


class TestStructure:
    def test_three_leaf_star(self):
        t = star3()
        t.validate()
        assert t.leaves == ["a", "b", "c"]
        assert t.internal_nodes == [0]
        assert t.leaf_distance("a", "b") == 1

    def test_quartet_distances(self):
        t = quartet()
        t.validate()
        assert t.leaf_distance("a", "b") == 1
        assert t.leaf_distance("c", "d") == 1
        assert t.leaf_distance("a", "c") == 2
        assert t.leaf_distance("b", "d") == 2

    def test_all_leaf_distances_agree_pairwise(self, mixed_tree):
        dist = mixed_tree.all_leaf_distances()
        leaves = mixed_tree.leaves
        assert len(leaves) == 14
        for i, a in enumerate(leaves):
            for b in leaves[i + 1:]:
                assert dist[(a, b)] == dist[(b, a)]
                assert dist[(a, b)] == mixed_tree.leaf_distance(a, b)

    def test_too_few_leaves(self):
        t = UnrootedBinaryTree({"a": ["b"], "b": ["a"]})
        with pytest.raises(InputError, match="at least 3"):
            t.validate()

    def test_internal_count_checked(self):
        # four leaves hanging off one node: right leaf degrees, wrong count
        t = UnrootedBinaryTree({"a": [0], "b": [0], "c": [0], "d": [0],
                                0: ["a", "b", "c", "d"]})
        with pytest.raises(InputError, match="internal nodes"):
            t.validate()

    def test_leaf_degree_checked(self):
        t = star3()
        t.adj["a"].append(0)
        t.adj[0].append("a")
        with pytest.raises(InputError, match="degree"):
            t.validate()

    def test_internal_degree_checked(self):
        t = UnrootedBinaryTree({"a": [0], "b": [0], "c": [1], "d": [1],
                                0: ["a", "b"], 1: ["c", "d", 0]})
        t.adj[0].append(1)
        t.adj[0].append(1)
        t.adj[1].append(0)
        with pytest.raises(InputError, match="degree"):
            t.validate()

    def test_connectivity_checked(self):
        # five leaves and three internals with valid degrees, but the
        # second component is a doubled edge disconnected from the star
        t = UnrootedBinaryTree({
            "a": [0], "b": [0], "c": [0], 0: ["a", "b", "c"],
            "d": [1], "e": [2], 1: ["d", 2, 2], 2: ["e", 1, 1],
        })
        with pytest.raises(InputError, match="not connected"):
            t.validate()

    def test_copy_is_independent(self):
        t = star3()
        u = t.copy()
        u.adj["a"].append(99)
        assert t.adj["a"] == [0]

    def test_leaf_distance_requires_distinct_known_leaves(self):
        t = star3()
        with pytest.raises(InputError, match="distinct"):
            t.leaf_distance("a", "a")
        with pytest.raises(InputError, match="unknown"):
            t.leaf_distance("a", "z")


class TestNewick:
    def test_star_rendering(self):
        assert star3().to_newick() == "(a,b,c);"

    def test_quartet_rendering(self):
        assert quartet().to_newick() == "(a,b,(c,d));"

    def test_roundtrip(self):
        text = "(a,b,(c,(d,e)));"
        assert UnrootedBinaryTree.from_newick(text).to_newick() == text

    def test_canonical_order(self):
        assert UnrootedBinaryTree.from_newick("(b,a,(d,c));").to_newick() \
            == "(a,b,(c,d));"

    def test_rooted_form_is_fused(self):
        # a two-child root is a rooted serialization of the same topology
        t = UnrootedBinaryTree.from_newick("((a,b),(c,d));")
        assert t.to_newick() == "(a,b,(c,d));"
        assert len(t.internal_nodes) == 2

    def test_packaged_trees_are_canonical(self, mixed_tree, clean_tree):
        for t in (mixed_tree, clean_tree):
            t.validate()
            assert len(t.leaves) == 14
            text = t.to_newick()
            assert UnrootedBinaryTree.from_newick(text).to_newick() == text

    def test_missing_semicolon(self):
        with pytest.raises(InputError, match=";"):
            UnrootedBinaryTree.from_newick("(a,b,c)")

    def test_unbalanced(self):
        with pytest.raises(InputError, match="unbalanced"):
            UnrootedBinaryTree.from_newick("(a,(b,c;")

    def test_empty_label(self):
        with pytest.raises(InputError, match="empty leaf label"):
            UnrootedBinaryTree.from_newick("(a,,b);")

    def test_trailing_characters(self):
        with pytest.raises(InputError, match="trailing"):
            UnrootedBinaryTree.from_newick("(a,b,c)x;")

    def test_nonbinary_rejected(self):
        with pytest.raises(InputError, match="internal nodes"):
            UnrootedBinaryTree.from_newick("(a,b,c,d);")


class TestTreeScore:
    def test_hand_value_star(self):
        m = square_matrix(["a", "b", "c"],
                          [[0.0, 0.2, 0.4], [0.2, 0.0, 0.6], [0.4, 0.6, 0.0]])
        # every pair sits one internal node apart: (0.2+0.4+0.6) * 2^-2
        assert tree_score(star3(), m) == pytest.approx(0.3, abs=1e-15)

    def test_hand_value_quartet(self):
        values = np.full((4, 4), 0.5)
        np.fill_diagonal(values, 0.0)
        values[0, 1] = values[1, 0] = 0.25
        values[2, 3] = values[3, 2] = 0.25
        m = square_matrix(["a", "b", "c", "d"], values)
        # cherries at 2^-2, cross pairs at 2^-3: 0.5/4 + 2.0/8 exactly
        assert tree_score(quartet(), m) == 0.375

    def test_matching_topology_scores_lower(self):
        values = np.full((4, 4), 0.9)
        np.fill_diagonal(values, 0.0)
        values[0, 1] = values[1, 0] = 0.1
        values[2, 3] = values[3, 2] = 0.1
        m = square_matrix(["a", "b", "c", "d"], values)
        mismatched = UnrootedBinaryTree.from_newick("(a,c,(b,d));")
        assert tree_score(quartet(), m) < tree_score(mismatched, m)


class TestAgglomerative:
    def block_matrix(self, ids, within=0.2, across=0.8):
        n = len(ids)
        values = np.full((n, n), across)
        for i in range(n):
            values[i, i] = 0.0
            for j in range(n):
                if i != j and ids[i].split("/")[0] == ids[j].split("/")[0]:
                    values[i, j] = within
        return square_matrix(ids, values)

    def test_block_matrix_forms_cherries(self):
        ids = ["x/1", "x/2", "y/1", "y/2", "z/1", "z/2"]
        t = build_tree_agglomerative(self.block_matrix(ids))
        t.validate()
        assert t.leaf_distance("x/1", "x/2") == 1
        assert t.leaf_distance("y/1", "y/2") == 1
        assert t.leaf_distance("z/1", "z/2") == 1

    def test_row_order_irrelevant(self):
        ids = ["x/1", "x/2", "y/1", "y/2", "z/1", "z/2"]
        m = self.block_matrix(ids)
        perm = [3, 0, 5, 2, 4, 1]
        shuffled = square_matrix([ids[k] for k in perm],
                                 m.values[np.ix_(perm, perm)])
        assert build_tree_agglomerative(m).to_newick() \
            == build_tree_agglomerative(shuffled).to_newick()

    def test_needs_three_documents(self):
        with pytest.raises(InputError, match="at least 3"):
            build_tree_agglomerative(square_matrix(["a", "b"], np.zeros((2, 2))))

    def test_rejects_asymmetric_matrix(self):
        values = np.zeros((3, 3))
        values[0, 1] = 0.5
        with pytest.raises(InputError, match="symmetric"):
            build_tree_agglomerative(square_matrix(["a", "b", "c"], values))


def random_matrix(ids, seed):
    rng = random.Random(seed)
    n = len(ids)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = rng.uniform(0.2, 1.0)
    return square_matrix(ids, values)


class TestBruteForceOracle:
    IDS = ["a", "b", "c", "d", "e"]

    def test_topology_count_matches_double_factorial(self):
        trees = all_topologies(self.IDS)
        assert len(trees) == 15  # (2*5 - 5)!!
        for t in trees:
            t.validate()
        assert len({t.to_newick() for t in trees}) == 15

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_search_reaches_enumerated_optimum(self, seed):
        m = random_matrix(self.IDS, seed)
        brute_best = min(tree_score(t, m) for t in all_topologies(self.IDS))
        built = build_tree_agglomerative(m)
        refined = refine_tree(m, built, iterations=300, seed=0)
        score = tree_score(refined, m)
        assert score >= brute_best - 1e-12
        assert score == pytest.approx(brute_best, abs=1e-12)


class TestRefine:
    def test_never_worse_than_input(self):
        m = random_matrix(list("abcdefg"), 11)
        t = build_tree_agglomerative(m)
        before = tree_score(t, m)
        after = tree_score(refine_tree(m, t, iterations=100, seed=3), m)
        assert after <= before

    def test_more_iterations_never_worse(self):
        m = random_matrix(list("abcdefg"), 12)
        t = build_tree_agglomerative(m)
        short = tree_score(refine_tree(m, t, iterations=40, seed=5), m)
        long = tree_score(refine_tree(m, t, iterations=400, seed=5), m)
        assert long <= short

    def test_deterministic(self):
        m = random_matrix(list("abcdef"), 13)
        t = build_tree_agglomerative(m)
        first = refine_tree(m, t, iterations=80, seed=9).to_newick()
        second = refine_tree(m, t, iterations=80, seed=9).to_newick()
        assert first == second

    def test_preserves_leaf_set(self):
        m = random_matrix(list("abcdef"), 14)
        t = build_tree_agglomerative(m)
        refined = refine_tree(m, t, iterations=60, seed=1)
        refined.validate()
        assert refined.leaves == t.leaves

    def test_leaf_mismatch_rejected(self):
        m = random_matrix(["a", "b", "c"], 15)
        with pytest.raises(InputError, match="leaves"):
            refine_tree(m, star3("a", "b", "z"), iterations=5)

    def test_zero_iterations_returns_input_topology(self):
        m = random_matrix(list("abcde"), 16)
        t = build_tree_agglomerative(m)
        assert refine_tree(m, t, iterations=0).to_newick() == t.to_newick()
