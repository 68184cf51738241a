import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treepatterns import (
    Infeasible,
    InvalidInput,
    RootedTree,
    make_complete_binary_tree,
    make_path,
    random_tree,
    tree_from_json,
)


def naive_ancestor_set(tree, v):
    out = set()
    p = tree.parent[v]
    while p is not None:
        out.add(p)
        p = tree.parent[p]
    return out


parents_strategy = st.integers(min_value=2, max_value=60).flatmap(
    lambda n: st.tuples(*[st.integers(min_value=0, max_value=i) for i in range(n - 1)])
)


def tree_from_draw(draw):
    return RootedTree([None] + list(draw))


class TestConstructors:
    def test_complete_binary_height0(self):
        t = make_complete_binary_tree(0)
        assert t.n == 1 and t.depth == [0]

    def test_complete_binary_height2(self):
        t = make_complete_binary_tree(2)
        assert t.n == 7
        assert sorted(t.depth) == [0, 1, 1, 2, 2, 2, 2]
        internal = [v for v in range(t.n) if t.children[v]]
        assert all(len(t.children[v]) == 2 for v in internal)
        leaves = [v for v in range(t.n) if not t.children[v]]
        assert all(t.depth[v] == 2 for v in leaves)

    @pytest.mark.parametrize("m", [0, 1, 3, 5, 9])
    def test_complete_binary_node_count(self, m):
        assert make_complete_binary_tree(m).n == 2 ** (m + 1) - 1

    def test_complete_binary_size_guard(self):
        with pytest.raises(Infeasible):
            make_complete_binary_tree(40)

    def test_path(self):
        t = make_path(3)
        assert t.depth == [0, 1, 2]
        assert make_path(1).n == 1

    def test_path_rejects_zero(self):
        with pytest.raises(InvalidInput):
            make_path(0)


class TestAncestry:
    def test_root_is_ancestor_of_all(self):
        t = make_complete_binary_tree(2)
        assert all(t.is_ancestor(0, v) for v in range(1, t.n))

    def test_strictness(self):
        t = make_complete_binary_tree(2)
        assert not any(t.is_ancestor(v, v) for v in range(t.n))

    def test_siblings_incomparable(self):
        t = make_complete_binary_tree(1)
        assert not t.is_ancestor(1, 2) and not t.is_ancestor(2, 1)

    @given(parents_strategy)
    @settings(max_examples=60, deadline=None)
    def test_is_ancestor_matches_walk_up(self, parents):
        t = tree_from_draw(parents)
        for b in range(t.n):
            anc = naive_ancestor_set(t, b)
            for a in range(t.n):
                assert t.is_ancestor(a, b) == (a in anc)

    def test_lca_matches_intersection_oracle_up_to_200_nodes(self):
        rng = np.random.default_rng(11)
        for _ in range(12):
            t = random_tree(int(rng.integers(2, 201)), rng)
            for _ in range(40):
                a, b = rng.integers(0, t.n, 2)
                common = (naive_ancestor_set(t, a) | {a}) & (naive_ancestor_set(t, b) | {b})
                assert t.lca(int(a), int(b)) == max(common, key=lambda v: t.depth[v])

    def test_common_ancestors_of_root(self):
        t = make_complete_binary_tree(2)
        assert t.common_ancestors([0]).common_ancestor_count == 1

    def test_single_node_count_is_depth_plus_one(self):
        t = make_complete_binary_tree(3)
        for v in range(t.n):
            assert t.common_ancestors([v]).common_ancestor_count == t.depth[v] + 1

    def test_sibling_leaves_share_only_root(self):
        t = make_complete_binary_tree(1)
        assert t.common_ancestors([1, 2]).common_ancestor_count == 1

    @given(parents_strategy, st.data())
    @settings(max_examples=40, deadline=None)
    def test_common_ancestors_order_and_duplication_invariant(self, parents, data):
        t = tree_from_draw(parents)
        vs = data.draw(st.lists(st.integers(0, t.n - 1), min_size=1, max_size=5))
        base = t.common_ancestors(vs)
        shuffled = data.draw(st.permutations(vs))
        assert t.common_ancestors(shuffled) == base
        assert t.common_ancestors(vs + [vs[0]]) == base

    def test_empty_tuple_rejected(self):
        with pytest.raises(InvalidInput):
            make_path(2).common_ancestors([])

    def test_bad_index_rejected(self):
        t = make_path(2)
        with pytest.raises(InvalidInput):
            t.is_ancestor(0, 5)


class TestSerialization:
    @given(parents_strategy)
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, parents):
        t = tree_from_draw(parents)
        t2, bags, meta = tree_from_json(t.to_json())
        assert t2 == t and bags is None and meta is None

    def test_round_trip_with_balls(self):
        t = make_path(2)
        doc = t.to_json(bags=[[1, 3], [2]], meta={"n": 3})
        t2, bags, meta = tree_from_json(doc)
        assert t2 == t and bags == [[1, 3], [2]] and meta == {"n": 3}

    def test_single_root_document(self):
        t, _, _ = tree_from_json('{"nodes": [{"id": 0, "parent": null}]}')
        assert t.n == 1

    def test_multiple_roots_rejected(self):
        doc = json.dumps({"nodes": [{"id": 0, "parent": None}, {"id": 1, "parent": None}]})
        with pytest.raises(InvalidInput, match="multiple roots"):
            tree_from_json(doc)

    def test_cycle_rejected(self):
        doc = json.dumps(
            {"nodes": [{"id": 0, "parent": None}, {"id": 1, "parent": 2}, {"id": 2, "parent": 1}]}
        )
        with pytest.raises(InvalidInput):
            tree_from_json(doc)

    def test_out_of_range_id_rejected(self):
        doc = json.dumps({"nodes": [{"id": 0, "parent": None}, {"id": 7, "parent": 0}]})
        with pytest.raises(InvalidInput, match="7"):
            tree_from_json(doc)

    def test_self_parent_rejected(self):
        with pytest.raises(InvalidInput):
            RootedTree([None, 1])
