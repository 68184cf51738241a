"""Generalized path-length parameters and ancestor statistics.

The central quantity is

    upsilon(T; r, k) = sum over ordered r-tuples (v_1..v_r) of
                       c(v_1..v_r) * prod_i C(depth(v_i), k-2)

with C(x, 0) = 1, where c(...) counts weak common ancestors.  The naive
enumeration exists as an oracle; the default route groups tuples by their
least common ancestor using per-subtree aggregates, which is exact and
O(n * Bell(r)) instead of O(n^r).  ``distinct`` tuple mode removes tuples
with repeated nodes by Moebius inversion over set partitions.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Literal

import numpy as np

from .errors import Infeasible, InvalidInput
from .trees import RootedTree

TupleMode = Literal["with_repetition", "distinct"]

NAIVE_TUPLE_GUARD = 10**9
MAX_R = 12


def total_path_length(tree: RootedTree) -> int:
    return sum(tree.depth)


def ancestor_tail(tree: RootedTree, ell: int) -> int:
    """Ordered pairs of distinct nodes with at least ``ell`` common ancestors.

    A pair has >= ell common ancestors iff both nodes share the subtree of
    some depth ell-1 node, so the count is a sum of sz*(sz-1) over that level.
    """
    if ell < 1:
        raise InvalidInput("ell must be >= 1")
    if ell - 1 > tree.height:
        return 0
    return sum(
        tree.subtree_size[v] * (tree.subtree_size[v] - 1)
        for v in range(tree.n)
        if tree.depth[v] == ell - 1
    )


def _partitions_with_mobius(r: int):
    """(block sizes, Moebius weight) over set partitions of [r].

    The weight of a partition with q blocks of sizes s_1..s_q in the
    partition lattice is prod (-1)^(s_i - 1) (s_i - 1)!.
    """
    from .constants import iter_set_partitions

    for part in iter_set_partitions(list(range(r))):
        w = 1
        for block in part:
            m = len(block)
            w *= (-1) ** (m - 1) * math.factorial(m - 1)
        yield [len(b) for b in part], w


def upsilon_naive(tree: RootedTree, r: int, k: int, mode: TupleMode = "with_repetition") -> int:
    """Direct enumeration over node tuples; the oracle for the fast route."""
    _check_spec(r, k)
    if tree.n**r > NAIVE_TUPLE_GUARD:
        raise Infeasible(
            f"n^r = {tree.n}^{r} exceeds the naive enumeration guard ({NAIVE_TUPLE_GUARD})"
        )
    weights = [math.comb(d, k - 2) for d in tree.depth]
    total = 0
    for tup in product(range(tree.n), repeat=r):
        if mode == "distinct" and len(set(tup)) != r:
            continue
        w = 1
        for v in tup:
            w *= weights[v]
        if w:
            total += tree.common_ancestors(tup).common_ancestor_count * w
    return total


def upsilon(tree: RootedTree, r: int, k: int, mode: TupleMode = "with_repetition") -> int:
    """Exact value of the generalized path-length parameter.

    Grouping by LCA: an r-tuple has LCA w iff every node lies in w's
    subtree and not all lie in one child subtree.  With subtree weight
    sums W_w^(j) = sum of C(depth(u), k-2)^j over u in subtree(w), the
    with-repetition sum is

        sum_w (depth(w)+1) * (W_w^(1)^r - sum_child W_c^(1)^r)

    and each Moebius term of the distinct mode has the same shape with a
    product of W^(block size) factors.
    """
    _check_spec(r, k)
    if r > MAX_R:
        raise Infeasible(f"r = {r} exceeds the partition guard (MAX_R = {MAX_R})")

    if mode == "with_repetition":
        terms = [([1] * r, 1)]
    else:
        terms = list(_partitions_with_mobius(r))
    max_power = max(max(sizes) for sizes, _ in terms)

    g = [math.comb(d, k - 2) for d in tree.depth]
    # subtree sums of g**j, python ints to avoid overflow
    W: list[list[int]] = [[0] * tree.n for _ in range(max_power + 1)]
    order = tree._dfs_order
    for v in reversed(order):
        for j in range(1, max_power + 1):
            s = g[v] ** j
            for c in tree.children[v]:
                s += W[j][c]
            W[j][v] = s

    total = 0
    for sizes, mob in terms:
        sub = 0
        for w in range(tree.n):
            own = 1
            for j in sizes:
                own *= W[j][w]
            rest = 0
            for c in tree.children[w]:
                p = 1
                for j in sizes:
                    p *= W[j][c]
                rest += p
            sub += (tree.depth[w] + 1) * (own - rest)
        total += mob * sub
    return total


def _check_spec(r: int, k: int) -> None:
    if r < 1:
        raise InvalidInput("tuple arity r must be >= 1")
    if k < 2:
        raise InvalidInput("pattern length k must be >= 2")


# ---------------------------------------------------------------------------
# LCA-grouped depth tensors
#
# lca_depth_tensors(tree, r) returns T with
#   T[j][d_1, ..., d_r] = number of ordered r-tuples of *distinct* nodes
#                         with componentwise depths d_i and LCA depth j.
# Supported for r in {1, 2, 3}; this backs the closed-form star counts on
# trees far too large for tuple enumeration.


def _profile_tensors_with_repetition(tree: RootedTree, r: int) -> np.ndarray:
    h = tree.height
    out = np.zeros((h + 1,) + (h + 1,) * r, dtype=np.int64)
    # bottom-up depth profiles q_v (length h+1)
    q = [None] * tree.n
    for v in reversed(tree._dfs_order):
        prof = np.zeros(h + 1, dtype=np.int64)
        prof[tree.depth[v]] = 1
        for c in tree.children[v]:
            prof += q[c]
        q[v] = prof
        own = _outer_power(prof, r)
        for c in tree.children[v]:
            own = own - _outer_power(q[c], r)
        out[tree.depth[v]] += own
    return out


def _outer_power(vec: np.ndarray, r: int) -> np.ndarray:
    if r == 1:
        return vec.copy()
    if r == 2:
        return np.einsum("i,j->ij", vec, vec)
    if r == 3:
        return np.einsum("i,j,k->ijk", vec, vec, vec)
    raise Infeasible(f"depth tensors support r <= 3, got r = {r}")


_TENSOR_CACHE: dict[tuple[int, int], np.ndarray] = {}
_TENSOR_CACHE_KEYS: list[tuple[RootedTree, int]] = []


def lca_depth_tensors(tree: RootedTree, r: int) -> np.ndarray:
    """Cached per (tree, r); callers must treat the result as read-only."""
    if r not in (1, 2, 3):
        raise Infeasible(f"depth tensors support r in 1..3, got r = {r}")
    if tree.n**r > 4 * 10**18:
        raise Infeasible(f"tuple counts n^r = {tree.n}^{r} overflow int64 tensors")
    for cached_tree, cached_r in _TENSOR_CACHE_KEYS:
        if cached_r == r and cached_tree is tree:
            return _TENSOR_CACHE[(id(cached_tree), r)]
    out = _lca_depth_tensors_impl(tree, r)
    _TENSOR_CACHE[(id(tree), r)] = out
    _TENSOR_CACHE_KEYS.append((tree, r))
    if len(_TENSOR_CACHE_KEYS) > 8:
        old_tree, old_r = _TENSOR_CACHE_KEYS.pop(0)
        _TENSOR_CACHE.pop((id(old_tree), old_r), None)
    return out


def _lca_depth_tensors_impl(tree: RootedTree, r: int) -> np.ndarray:
    W = _profile_tensors_with_repetition(tree, r)
    if r == 1:
        return W
    h = tree.height
    if r == 2:
        D = W.copy()
        W1 = _profile_tensors_with_repetition(tree, 1)
        for j in range(h + 1):
            for d in range(h + 1):
                D[j][d, d] -= W1[j][d]  # tuples (u, u)
        return D
    # r == 3: subtract the three pair-collision classes, add back the
    # triple collision twice (Moebius on the partition lattice of [3])
    D = W.copy()
    W2rep = _profile_tensors_with_repetition(tree, 2)
    W1 = _profile_tensors_with_repetition(tree, 1)
    for j in range(h + 1):
        for a in range(h + 1):
            D[j][a, a, :] -= W2rep[j][a, :]  # tuples (u, u, v)
            D[j][a, :, a] -= W2rep[j][a, :]  # tuples (u, v, u)
            D[j][:, a, a] -= W2rep[j][:, a]  # tuples (v, u, u)
            D[j][a, a, a] += 2 * W1[j][a]
    return D
