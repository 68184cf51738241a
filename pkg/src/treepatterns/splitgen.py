"""Random split trees: trickle-down and recursive multinomial generation.

A split tree stores n balls in the nodes (bags) of a b-ary tree.  Balls
are inserted one at a time; at internal nodes a ball descends to child i
with probability given by the node's split vector, and an overflowing
leaf redistributes its s+1 balls: s0 chosen uniformly stay, s1 go to each
child uniformly, and the rest descend independently per the split vector,
recursing on any child pushed over capacity.  Subtrees that never receive
a ball are never materialized, which is the pruning step.

Reproducibility: generation is deterministic given (params, n, seed).
Each node of the *infinite* b-ary tree has a canonical integer key
(root 0, children of key u are u*b+1 .. u*b+b); its split vector is a
pure function of (seed, key) via a splitmix-style hash, so the vectors do
not depend on discovery order.  Ball-routing and split-event choices
consume one seeded master uniform stream in insertion order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput
from .trees import RootedTree

_M64 = (1 << 64) - 1


def _mix64(*parts: int) -> int:
    """splitmix64 finalizer folded over the parts; stable across runs."""
    z = 0x9E3779B97F4A7C15
    for p in parts:
        z = (z + (p & _M64)) & _M64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        z ^= z >> 31
    return z


def _unit(*parts: int) -> float:
    return _mix64(*parts) / 2.0**64


class _UniformStream:
    """Buffered uniforms from one seeded generator (cheap scalar draws)."""

    __slots__ = ("_rng", "_buf", "_i")

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(np.random.SeedSequence([seed & _M64, 0xB0FFE7]))
        self._buf = self._rng.random(8192)
        self._i = 0

    def next(self) -> float:
        i = self._i
        if i >= self._buf.size:
            self._buf = self._rng.random(8192)
            i = 0
        self._i = i + 1
        return self._buf[i]


# ---------------------------------------------------------------------------
# split-vector laws


class SplitLaw:
    """Distribution over probability vectors of length b."""

    name = "abstract"

    def vector(self, b: int, seed: int, node_key: int) -> np.ndarray:
        raise NotImplementedError

    def mean_sum_squares(self, b: int) -> Fraction | None:
        """E[sum V_i^2] in closed form, or None when only sampling works."""
        return None

    def check_b(self, b: int) -> None:
        pass

    def spec(self) -> dict:
        return {"name": self.name}


class BstLaw(SplitLaw):
    """(U, 1-U) with U uniform on [0,1]; requires b = 2."""

    name = "bst"

    def check_b(self, b: int) -> None:
        if b != 2:
            raise InvalidInput("the bst split law requires b = 2")

    def vector(self, b: int, seed: int, node_key: int) -> np.ndarray:
        u = _unit(seed, node_key, 1)
        return np.array([u, 1.0 - u])

    def mean_sum_squares(self, b: int) -> Fraction:
        # int_0^1 u^2 + (1-u)^2 du
        return Fraction(2, 3)


class DirichletLaw(SplitLaw):
    """Symmetric Dirichlet(a, ..., a) of length b."""

    name = "dirichlet"

    def __init__(self, concentration: float | Fraction = 1):
        if concentration <= 0:
            raise InvalidInput("Dirichlet concentration must be positive")
        self.concentration = concentration

    def vector(self, b: int, seed: int, node_key: int) -> np.ndarray:
        rng = np.random.default_rng(_mix64(seed, node_key, 1))
        return rng.dirichlet([float(self.concentration)] * b)

    def mean_sum_squares(self, b: int) -> Fraction | None:
        # b * E[V_1^2] with V_1 ~ Beta(a, (b-1)a)
        a = self.concentration
        if isinstance(a, (int, Fraction)):
            a = Fraction(a)
            return (a + 1) / (a * b + 1)
        return None

    def spec(self) -> dict:
        return {"name": self.name, "concentration": str(self.concentration)}


class FixedLaw(SplitLaw):
    """A deterministic probability vector, randomly permuted per node.

    The per-node permutation makes the components identically distributed,
    matching the convention the other laws already satisfy.
    """

    name = "fixed"

    def __init__(self, probs: Sequence):
        ps = [Fraction(p) for p in probs]
        if any(p < 0 for p in ps):
            raise InvalidInput("split probabilities must be nonnegative")
        if sum(ps) != 1:
            raise InvalidInput(f"fixed split vector must sum to exactly 1, got {sum(ps)}")
        if any(p == 1 for p in ps):
            raise InvalidInput("degenerate split vector: some V_i = 1 almost surely")
        self.probs = tuple(ps)

    def check_b(self, b: int) -> None:
        if b != len(self.probs):
            raise InvalidInput(f"fixed law has {len(self.probs)} entries but b = {b}")

    def vector(self, b: int, seed: int, node_key: int) -> np.ndarray:
        keys = [_unit(seed, node_key, 2 + i) for i in range(b)]
        order = sorted(range(b), key=keys.__getitem__)
        return np.array([float(self.probs[i]) for i in order])

    def mean_sum_squares(self, b: int) -> Fraction:
        return sum((p * p for p in self.probs), Fraction(0))

    def spec(self) -> dict:
        return {"name": self.name, "probs": [str(p) for p in self.probs]}


def law_from_spec(spec: str | dict) -> SplitLaw:
    """Parse "bst", "dirichlet(a)", "fixed(p1,p2,...)" or a spec dict."""
    if isinstance(spec, dict):
        name = spec.get("name")
        if name == "bst":
            return BstLaw()
        if name == "dirichlet":
            return DirichletLaw(Fraction(spec.get("concentration", 1)))
        if name == "fixed":
            return FixedLaw(spec["probs"])
        raise InvalidInput(f"unknown split law {name!r}")
    text = spec.strip()
    if text == "bst":
        return BstLaw()
    if text.startswith("dirichlet(") and text.endswith(")"):
        return DirichletLaw(Fraction(text[10:-1]))
    if text.startswith("fixed(") and text.endswith(")"):
        return FixedLaw([Fraction(p) for p in text[6:-1].split(",")])
    raise InvalidInput(f"unknown split law {text!r}")


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class SplitParams:
    """Generation parameters (b, s, s0, s1) plus the split-vector law.

    The constructor enforces 2 <= b, 0 < s, 0 <= s0 <= s and
    0 <= b*s1 <= s + 1 - s0, plus s0 >= 1 so internal bags hold balls.
    """

    b: int
    s: int
    s0: int
    s1: int
    law: SplitLaw = field(default_factory=BstLaw)

    def __post_init__(self):
        b, s, s0, s1 = self.b, self.s, self.s0, self.s1
        if b < 2:
            raise InvalidInput("branching factor b must be >= 2")
        if s <= 0:
            raise InvalidInput("leaf capacity s must be positive")
        if not (0 <= s0 <= s):
            raise InvalidInput("internal capacity must satisfy 0 <= s0 <= s")
        if s0 < 1:
            raise InvalidInput("s0 >= 1 is required so internal bags are labelled")
        if not (0 <= b * s1 <= s + 1 - s0):
            raise InvalidInput("forced allocation must satisfy 0 <= b*s1 <= s+1-s0")
        self.law.check_b(b)


def bst_params() -> SplitParams:
    return SplitParams(b=2, s=1, s0=1, s1=0, law=BstLaw())


def mu_magnitude(params: SplitParams, samples: int = 200_000, seed: int = 0) -> float:
    """|sum_i E[V_i ln V_i]|, the depth-centering constant.

    Closed form 1/2 for the bst law; Monte Carlo otherwise.  The defining
    sum is negative; depths center at (1/|mu|) ln n.
    """
    if isinstance(params.law, BstLaw):
        return 0.5
    rng_keys = range(samples)
    acc = 0.0
    for i in rng_keys:
        v = params.law.vector(params.b, seed, i + 1)
        nz = v[v > 0]
        acc += float(np.sum(nz * np.log(nz)))
    return abs(acc / samples)


def same_child_probability_bound(
    params: SplitParams, mc_samples: int = 200_000, seed: int = 0
) -> Fraction | tuple[float, float]:
    """E[sum_i V_i^2], the per-level factor bounding shared descents.

    Returns an exact Fraction when the law has a closed form, otherwise a
    (estimate, standard_error) pair from mc_samples draws.
    """
    closed = params.law.mean_sum_squares(params.b)
    if closed is not None:
        return closed
    vals = np.empty(mc_samples)
    for i in range(mc_samples):
        v = params.law.vector(params.b, seed, i + 1)
        vals[i] = float(np.dot(v, v))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(mc_samples))


# ---------------------------------------------------------------------------
# split trees


class SplitTree:
    """An immutable generated split tree: node tree + per-node ball bags."""

    __slots__ = ("tree", "bags", "params", "n_balls", "seed", "generator", "_ball_node")

    def __init__(self, tree: RootedTree, bags: list[list[int]], params: SplitParams,
                 n_balls: int, seed: int, generator: str):
        self.tree = tree
        self.bags = bags
        self.params = params
        self.n_balls = n_balls
        self.seed = seed
        self.generator = generator
        ball_node = [-1] * (n_balls + 1)
        for v, bag in enumerate(bags):
            for ball in bag:
                ball_node[ball] = v
        self._ball_node = ball_node
        self._check_invariants()

    def _check_invariants(self):
        p = self.params
        seen = 0
        for v, bag in enumerate(self.bags):
            if self.tree.children[v]:
                if len(bag) != p.s0:
                    raise AssertionError(f"internal bag {v} holds {len(bag)} balls, not s0={p.s0}")
            else:
                if not (1 <= len(bag) <= p.s):
                    raise AssertionError(f"leaf bag {v} holds {len(bag)} balls, not 1..{p.s}")
            if len(self.tree.children[v]) > p.b:
                raise AssertionError(f"node {v} has more than b={p.b} children")
            seen += len(bag)
        if seen != self.n_balls or any(x < 0 for x in self._ball_node[1:]):
            raise AssertionError("ball identifiers do not partition 1..n")

    def node_of_ball(self, ball: int) -> int:
        if not (1 <= ball <= self.n_balls):
            raise InvalidInput(f"unknown ball id {ball} (balls are 1..{self.n_balls})")
        return self._ball_node[ball]

    def ball_ancestor_count(self, ball: int) -> int:
        """Nodes weakly above the ball's bag, i.e. depth + 1."""
        return self.tree.depth[self.node_of_ball(ball)] + 1

    def ball_common_ancestors(self, balls: Iterable[int]) -> int:
        nodes = [self.node_of_ball(b) for b in balls]
        if not nodes:
            raise InvalidInput("need at least one ball id")
        return self.tree.common_ancestors(nodes).common_ancestor_count

    def to_json(self) -> str:
        meta = {
            "b": self.params.b,
            "s": self.params.s,
            "s0": self.params.s0,
            "s1": self.params.s1,
            "distribution": self.params.law.spec(),
            "seed": self.seed,
            "n": self.n_balls,
            "generator": self.generator,
        }
        return self.tree.to_json(bags=self.bags, meta=meta)


class BallOrder:
    """The partial order balls inherit from their bags' ancestor relation."""

    def __init__(self, split: SplitTree):
        self.split = split

    def less(self, j1: int, j2: int) -> bool:
        s = self.split
        return s.tree.is_ancestor(s.node_of_ball(j1), s.node_of_ball(j2))

    def incomparable(self, j1: int, j2: int) -> bool:
        return not self.less(j1, j2) and not self.less(j2, j1)


def split_tree_from_json(text: str) -> SplitTree:
    from .trees import tree_from_json

    tree, bags, meta = tree_from_json(text)
    if bags is None or meta is None:
        raise InvalidInput("split-tree documents need per-node 'balls' and a 'meta' object")
    params = SplitParams(
        b=meta["b"], s=meta["s"], s0=meta["s0"], s1=meta["s1"],
        law=law_from_spec(meta["distribution"]),
    )
    n = meta["n"]
    return SplitTree(tree, bags, params, n, meta.get("seed", 0), meta.get("generator", "file"))


# ---------------------------------------------------------------------------
# trickle-down generation


def generate_trickle_down(params: SplitParams, n: int, seed: int) -> SplitTree:
    """Insert balls 1..n one by one and split overflowing leaves."""
    if n < 1:
        raise InvalidInput("ball count n must be >= 1")
    b, s, s0, s1 = params.b, params.s, params.s0, params.s1
    law = params.law
    stream = _UniformStream(seed)
    nxt = stream.next

    keys = [0]  # infinite-tree key per created node
    parent: list[int | None] = [None]
    children: list[list[int]] = [[-1] * b]
    bags: list[list[int]] = [[]]
    internal = [False]
    cums: list[list[float] | None] = [None]  # cumulative split vector

    def cum_of(u: int) -> list[float]:
        c = cums[u]
        if c is None:
            vec = law.vector(b, seed, keys[u])
            if abs(float(vec.sum()) - 1.0) > 1e-12 or np.any(vec < 0):
                raise InvalidInput("split law produced an invalid probability vector")
            c = np.cumsum(vec).tolist()
            cums[u] = c
        return c

    def child_of(u: int, i: int) -> int:
        c = children[u][i]
        if c < 0:
            c = len(keys)
            keys.append(keys[u] * b + i + 1)
            parent.append(u)
            children.append([-1] * b)
            bags.append([])
            internal.append(False)
            cums.append(None)
            children[u][i] = c
        return c

    def pick_child(u: int) -> int:
        cu = cum_of(u)
        x = nxt()
        # b is small; linear scan beats bisect dispatch overhead
        for i in range(b - 1):
            if x < cu[i]:
                return i
        return b - 1

    def partial_shuffle(pool: list[int], count: int) -> None:
        # uniform without replacement: first `count` entries after the loop
        m = len(pool)
        for t in range(count):
            r = t + int(nxt() * (m - t))
            pool[t], pool[r] = pool[r], pool[t]

    for j in range(1, n + 1):
        u = 0
        if b == 2:
            while internal[u]:
                cu = cums[u] or cum_of(u)
                i = 0 if nxt() < cu[0] else 1
                c = children[u][i]
                u = c if c >= 0 else child_of(u, i)
        else:
            while internal[u]:
                u = child_of(u, pick_child(u))
        if len(bags[u]) < s:
            bags[u].append(j)
            continue
        # overflow: split u, recursing on any overfull child
        stack: list[tuple[int, list[int]]] = [(u, bags[u] + [j])]
        while stack:
            v, pool = stack.pop()
            partial_shuffle(pool, s0)
            bags[v] = pool[:s0]
            internal[v] = True
            movers = pool[s0:]
            buckets: list[list[int]] = [[] for _ in range(b)]
            if s1:
                partial_shuffle(movers, b * s1)
                for i in range(b):
                    buckets[i].extend(movers[i * s1 : (i + 1) * s1])
                movers = movers[b * s1 :]
            cv = cum_of(v)
            for ball in movers:
                x = nxt()
                i = 0
                while i < b - 1 and x >= cv[i]:
                    i += 1
                buckets[i].append(ball)
            for i in range(b):
                bucket = buckets[i]
                if not bucket:
                    continue
                c = child_of(v, i)
                if len(bucket) > s:
                    stack.append((c, bucket))
                else:
                    bags[c] = bucket

    # canonical breadth-first renumbering by child slot, so structure (and
    # child order) is independent of discovery order and comparable with
    # the multinomial construction
    order = [0]
    for u in order:
        for i in range(b):
            c = children[u][i]
            if c >= 0:
                order.append(c)
    new_id = {old: new for new, old in enumerate(order)}
    parent2: list[int | None] = [None] * len(order)
    bags2: list[list[int]] = [[] for _ in order]
    for old, new in new_id.items():
        p = parent[old]
        parent2[new] = None if p is None else new_id[p]
        bags2[new] = bags[old]
    tree = RootedTree(parent2)
    return SplitTree(tree, bags2, params, n, seed, "trickle")


# ---------------------------------------------------------------------------
# multinomial construction


def generate_multinomial(params: SplitParams, n: int, seed: int) -> SplitTree:
    """Recursive subtree-size construction.

    Sizes: a node with n_u <= s balls is a leaf; otherwise its children
    receive Mult(n_u - s0 - b*s1, V_u) + (s1, ..., s1) balls.  Ball ids are
    then assigned uniformly at random to the bag slots, which leaves all
    labelling statistics invariant.
    """
    if n < 1:
        raise InvalidInput("ball count n must be >= 1")
    b, s, s0, s1 = params.b, params.s, params.s0, params.s1
    law = params.law

    from collections import deque

    parent: list[int | None] = [None]
    bag_sizes: list[int] = []
    queue: deque[tuple[int, int]] = deque([(0, n)])  # (node id, subtree ball count)
    keys = [0]
    while queue:
        u, n_u = queue.popleft()
        if n_u <= s:
            bag_sizes.append(n_u)
            continue
        bag_sizes.append(s0)
        m = n_u - s0 - b * s1
        if m < 0:
            raise AssertionError("n_u - s0 - b*s1 < 0: parameter inequalities violated")
        vec = law.vector(b, seed, keys[u])
        rng_node = np.random.default_rng(_mix64(seed, keys[u], 3))
        counts = rng_node.multinomial(m, vec / vec.sum()) + s1
        for i in range(b):
            if counts[i] == 0:
                continue
            c = len(keys)
            keys.append(keys[u] * b + i + 1)
            parent.append(u)
            queue.append((c, int(counts[i])))

    # breadth-first creation order means node ids already match tree order
    tree = RootedTree(parent)
    master = np.random.default_rng(np.random.SeedSequence([seed & _M64, 0xA551617]))
    ids = master.permutation(n) + 1
    bags: list[list[int]] = []
    at = 0
    for v in range(tree.n):
        bags.append([int(x) for x in ids[at : at + bag_sizes[v]]])
        at += bag_sizes[v]
    return SplitTree(tree, bags, params, n, seed, "multinomial")
