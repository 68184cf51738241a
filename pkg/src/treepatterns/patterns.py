"""Counting permutation-pattern occurrences in labelled trees.

An occurrence of a pattern ``a_1 ... a_k`` in a labelling is a chain of k
elements, each a proper ancestor of the next, whose labels appear in the
same relative order as the pattern.  For plain trees the elements are
nodes; for split trees they are balls and two balls sharing a bag never
form a chain link.

The module keeps two counting routes.  ``count_occurrences`` walks the
tree once per labelling, extending the root-to-node label stack.  The
batched route evaluates many labellings at once with numpy and backs the
Monte Carlo and exact-distribution machinery; it must (and is tested to)
agree with the single-labelling walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations, product
from typing import Sequence, Union

import numpy as np

from .errors import Infeasible, InvalidInput
from .trees import RootedTree

# split trees are defined in splitgen; imported lazily to keep this module
# usable on plain trees without the generator machinery
TreeLike = Union[RootedTree, "splitgen.SplitTree"]  # noqa: F821


@dataclass(frozen=True)
class Pattern:
    entries: tuple[int, ...]

    def __post_init__(self):
        k = len(self.entries)
        if k < 1:
            raise InvalidInput("pattern must be nonempty")
        if sorted(self.entries) != list(range(1, k + 1)):
            raise InvalidInput(f"{self.entries} is not a permutation of 1..{k}")

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def first(self) -> int:
        return self.entries[0]

    @staticmethod
    def parse(text: str) -> "Pattern":
        """Digit string ("231") for k <= 9, comma-separated list otherwise."""
        text = text.strip()
        if "," in text:
            parts = [p.strip() for p in text.split(",")]
        else:
            parts = list(text)
        try:
            entries = tuple(int(p) for p in parts)
        except ValueError:
            raise InvalidInput(f"cannot parse pattern {text!r}") from None
        return Pattern(entries)

    def __str__(self) -> str:
        if self.k <= 9:
            return "".join(map(str, self.entries))
        return ",".join(map(str, self.entries))


def all_patterns(k: int):
    for p in permutations(range(1, k + 1)):
        yield Pattern(p)


# ---------------------------------------------------------------------------
# labellings


def sample_labelling(n: int, seed=None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Uniform bijection {elements} -> {1..n} via an unbiased shuffle."""
    if n < 1:
        raise InvalidInput("universe size must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    return rng.permutation(n).astype(np.int64) + 1


def _check_labelling(labels: Sequence[int], n: int) -> np.ndarray:
    arr = np.asarray(labels, dtype=np.int64)
    if arr.shape != (n,) or sorted(arr.tolist()) != list(range(1, n + 1)):
        raise InvalidInput(f"labelling must be a bijection onto 1..{n}")
    return arr


def _sort_positions(alpha: Pattern) -> list[int]:
    # positions of the chain in increasing label order; a chain matches
    # alpha iff its labels increase along this ordering
    return sorted(range(alpha.k), key=lambda i: alpha.entries[i])


# ---------------------------------------------------------------------------
# single-labelling counting


def count_occurrences(t: TreeLike, alpha: Pattern, labelling: Sequence[int]) -> int:
    """Number of ancestor-ordered k-chains whose labels induce ``alpha``."""
    from . import splitgen

    if isinstance(t, splitgen.SplitTree):
        return _count_split(t, alpha, labelling)
    return _count_nodes(t, alpha, labelling)


def _count_nodes(tree: RootedTree, alpha: Pattern, labelling: Sequence[int]) -> int:
    labels = _check_labelling(labelling, tree.n)
    k = alpha.k
    if k == 1:
        return tree.n
    if k > tree.height + 1:
        return 0
    order = _sort_positions(alpha)
    total = 0
    path: list[int] = []
    stack: list[tuple[int, bool]] = [(tree.root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            path.pop()
            continue
        lv = int(labels[v])
        if len(path) >= k - 1:
            for combo in combinations(path, k - 1):
                chain = combo + (lv,)
                if all(chain[order[i]] < chain[order[i + 1]] for i in range(k - 1)):
                    total += 1
        path.append(lv)
        stack.append((v, True))
        for c in tree.children[v]:
            stack.append((c, False))
    return total


def _count_split(split, alpha: Pattern, labelling: Sequence[int]) -> int:
    # Chains live on balls: one ball from each of k strictly nested bags.
    labels = _check_labelling(labelling, split.n_balls)
    k = alpha.k
    if k == 1:
        return split.n_balls
    tree = split.tree
    order = _sort_positions(alpha)
    total = 0
    path: list[list[int]] = []  # one label list per ancestor bag
    stack: list[tuple[int, bool]] = [(tree.root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            path.pop()
            continue
        bag_labels = [int(labels[b - 1]) for b in split.bags[v]]
        if len(path) >= k - 1:
            for x in bag_labels:
                for bag_combo in combinations(path, k - 1):
                    for picks in product(*bag_combo):
                        chain = picks + (x,)
                        if all(chain[order[i]] < chain[order[i + 1]] for i in range(k - 1)):
                            total += 1
        path.append(bag_labels)
        stack.append((v, True))
        for c in tree.children[v]:
            stack.append((c, False))
    return total


# ---------------------------------------------------------------------------
# batched counting

MAX_BATCH_CHAINS = 3_000_000


def _chain_arrays(t: TreeLike, k: int) -> np.ndarray:
    """All ancestor chains of length k, as element-index rows (m, k)."""
    from . import splitgen

    chains: list[tuple[int, ...]] = []
    if isinstance(t, splitgen.SplitTree):
        tree = t.tree
        bag_elems = [[b - 1 for b in bag] for bag in t.bags]  # 0-based ball slots
    else:
        tree = t
        bag_elems = [[v] for v in range(tree.n)]

    path: list[list[int]] = []
    stack: list[tuple[int, bool]] = [(tree.root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            path.pop()
            continue
        if len(path) >= k - 1:
            for combo in combinations(path, k - 1) if k > 1 else [()]:
                for picks in product(*combo):
                    for x in bag_elems[v]:
                        chains.append(picks + (x,))
                        if len(chains) > MAX_BATCH_CHAINS:
                            raise Infeasible(
                                f"chain enumeration exceeds the guard "
                                f"({MAX_BATCH_CHAINS}); use per-labelling counting"
                            )
        path.append(bag_elems[v])
        stack.append((v, True))
        for c in tree.children[v]:
            stack.append((c, False))
    if not chains:
        return np.empty((0, k), dtype=np.int64)
    return np.asarray(chains, dtype=np.int64)


def _ancestor_pairs(tree: RootedTree) -> tuple[np.ndarray, np.ndarray]:
    """(a, v) index arrays over all proper-ancestor pairs a < v."""
    a_idx: list[int] = []
    v_idx: list[int] = []
    for v in range(tree.n):
        for a in tree.ancestors(v):
            a_idx.append(a)
            v_idx.append(v)
    return np.asarray(a_idx, dtype=np.int64), np.asarray(v_idx, dtype=np.int64)


def count_occurrences_batch(t: TreeLike, alpha: Pattern, labels: np.ndarray) -> np.ndarray:
    """Occurrence counts for a batch of labellings (rows of ``labels``).

    Fast paths cover k = 2 and the monotone length-3 patterns on plain
    trees, which is what the large Monte Carlo runs need; everything else
    falls back to explicit chain enumeration.
    """
    from . import splitgen

    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise InvalidInput("labels must be a 2-d (samples, universe) array")
    S = labels.shape[0]
    k = alpha.k
    if k == 1:
        return np.full(S, labels.shape[1], dtype=np.int64)

    plain = not isinstance(t, splitgen.SplitTree)
    if plain and labels.shape[1] != t.n:
        raise InvalidInput("label width does not match node count")

    if plain and k == 2:
        return _batch_k2(t, alpha, labels)
    if plain and k == 3 and alpha.entries in ((3, 2, 1), (1, 2, 3)):
        return _batch_k3_monotone(t, alpha, labels)

    chains = _chain_arrays(t, k)
    if chains.shape[0] == 0:
        return np.zeros(S, dtype=np.int64)
    order = _sort_positions(alpha)
    ok = np.ones((S, chains.shape[0]), dtype=bool)
    for i in range(k - 1):
        lo = labels[:, chains[:, order[i]]]
        hi = labels[:, chains[:, order[i + 1]]]
        ok &= lo < hi
    return ok.sum(axis=1, dtype=np.int64)


_PAIR_CHUNK = 1 << 22  # label comparisons per chunk, keeps peak memory modest


def _batch_k2(tree: RootedTree, alpha: Pattern, labels: np.ndarray) -> np.ndarray:
    a_idx, v_idx = _ancestor_pairs(tree)
    S = labels.shape[0]
    R = np.zeros(S, dtype=np.int64)
    if a_idx.size == 0:
        return R
    descending = alpha.entries == (2, 1)
    step = max(1, _PAIR_CHUNK // max(S, 1))
    for lo in range(0, a_idx.size, step):
        a = a_idx[lo : lo + step]
        v = v_idx[lo : lo + step]
        cmp = labels[:, a] > labels[:, v] if descending else labels[:, a] < labels[:, v]
        R += cmp.sum(axis=1, dtype=np.int64)
    return R


def _batch_k3_monotone(tree: RootedTree, alpha: Pattern, labels: np.ndarray) -> np.ndarray:
    # Chains (a, b, v) with monotone labels factor through the middle:
    # given b, the a- and v-side conditions are independent, so
    # R = sum over ancestor pairs (b, v) of 1[b, v ordered right] * X_b
    # with X_b the matching-ancestor count of b.  One DFS pass computes
    # X and folds the pair sum; the path arrays are indexed by depth and
    # only depths above the current node are ever read, so backtracking
    # needs no cleanup.
    S = labels.shape[0]
    descending = alpha.entries == (3, 2, 1)
    R = np.zeros(S, dtype=np.int64)
    lab32 = np.ascontiguousarray(labels.T.astype(np.int32))  # (n, S)
    h = tree.height
    P = np.empty((h + 1, S), dtype=np.int32)
    PX = np.empty((h + 1, S), dtype=np.int32)
    stack = [tree.root]
    while stack:
        v = stack.pop()
        d = tree.depth[v]
        lv = lab32[v]
        if d:
            cmp = (P[:d] > lv) if descending else (P[:d] < lv)
            x = cmp.sum(axis=0, dtype=np.int32)
            R += np.einsum("ds,ds->s", cmp, PX[:d], dtype=np.int64)
        else:
            x = np.zeros(S, dtype=np.int32)
        P[d] = lv
        PX[d] = x
        stack.extend(tree.children[v])
    return R


# ---------------------------------------------------------------------------
# exact quantities


def chain_count(t: TreeLike, k: int) -> int:
    """Number of ancestor-ordered k-chains, in closed form."""
    from . import splitgen

    if isinstance(t, splitgen.SplitTree):
        s0 = t.params.s0
        return sum(
            math.comb(t.tree.depth[t.node_of_ball(b)], k - 1) * s0 ** (k - 1)
            for b in range(1, t.n_balls + 1)
        )
    return sum(math.comb(d, k - 1) for d in t.depth)


def expected_occurrences(t: TreeLike, alpha: Pattern):
    """Exact mean of the occurrence count under a uniform labelling.

    Every chain matches with probability 1/k!, so the mean is the chain
    count over k!.  For split trees a chain picks one ball from each of
    k-1 distinct proper-ancestor bags (all internal, hence holding
    exactly s0 balls) plus the deepest ball.
    """
    from fractions import Fraction

    return Fraction(chain_count(t, alpha.k), math.factorial(alpha.k))


DEFAULT_UNIVERSE_CAP = 9


def exact_distribution(t: TreeLike, alpha: Pattern, max_universe: int = DEFAULT_UNIVERSE_CAP):
    """Exact pmf of the occurrence count over all universe! labellings.

    Returns {count: Fraction probability}; probabilities sum to exactly 1.
    """
    from fractions import Fraction

    from . import splitgen

    n = t.n_balls if isinstance(t, splitgen.SplitTree) else t.n
    if n > max_universe:
        raise Infeasible(
            f"universe of {n} elements exceeds the exact-enumeration cap "
            f"({max_universe}); raise max_universe explicitly if you mean it"
        )
    chains = _chain_arrays(t, alpha.k)
    total = math.factorial(n)
    if chains.shape[0] == 0:
        return {0: Fraction(1)}

    order = _sort_positions(alpha)
    counts: dict[int, int] = {}
    batch = 40320
    perm_iter = permutations(range(1, n + 1))
    while True:
        block = []
        for _ in range(batch):
            p = next(perm_iter, None)
            if p is None:
                break
            block.append(p)
        if not block:
            break
        L = np.asarray(block, dtype=np.int64)
        ok = np.ones((L.shape[0], chains.shape[0]), dtype=bool)
        for i in range(alpha.k - 1):
            ok &= L[:, chains[:, order[i]]] < L[:, chains[:, order[i + 1]]]
        for r in ok.sum(axis=1):
            counts[int(r)] = counts.get(int(r), 0) + 1
    return {x: Fraction(c, total) for x, c in sorted(counts.items())}
