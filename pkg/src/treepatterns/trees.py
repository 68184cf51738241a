"""Rooted trees over dense integer node indexes.

Trees are immutable after construction: every query is read-only, so
instances can be shared freely across threads.  Constructors place the
root at index 0; deserialized documents may carry the root elsewhere.

Depth/ancestor conventions: the root has depth 0, ``is_ancestor`` is
strict (no node is its own ancestor), while ``common_ancestors`` counts
weakly (a node is a common ancestor of any tuple containing it), so the
count for a tuple equals ``depth(lca) + 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import Infeasible, InvalidInput

MAX_NODES = 1 << 22


@dataclass(frozen=True)
class NodeSetAncestry:
    """LCA of a node tuple plus the number of its weak common ancestors."""

    lca: int
    common_ancestor_count: int


class RootedTree:
    __slots__ = (
        "n",
        "parent",
        "children",
        "depth",
        "root",
        "height",
        "subtree_size",
        "_tin",
        "_tout",
        "_dfs_order",
    )

    def __init__(self, parent: Sequence[int | None]):
        n = len(parent)
        if n == 0:
            raise InvalidInput("a tree needs at least one node")
        if n > MAX_NODES:
            raise Infeasible(f"{n} nodes exceeds the MAX_NODES guard ({MAX_NODES})")

        roots = [v for v in range(n) if parent[v] is None]
        if not roots:
            raise InvalidInput("no root: every node has a parent")
        if len(roots) > 1:
            raise InvalidInput(f"multiple roots: nodes {roots[0]} and {roots[1]}")
        root = roots[0]

        children: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            p = parent[v]
            if p is None:
                continue
            if not isinstance(p, (int, np.integer)) or not (0 <= p < n):
                raise InvalidInput(f"node {v}: parent {p!r} out of range")
            if p == v:
                raise InvalidInput(f"node {v} is its own parent")
            children[p].append(v)

        # BFS from the root assigns depths and proves the parent relation
        # is acyclic and connected in one pass.
        depth = [-1] * n
        depth[root] = 0
        order = [root]
        for v in order:
            for c in children[v]:
                depth[c] = depth[v] + 1
                order.append(c)
        if len(order) != n:
            missing = next(v for v in range(n) if depth[v] < 0)
            raise InvalidInput(
                f"node {missing} is not reachable from the root "
                f"(cycle or disconnected component)"
            )

        self.n = n
        self.parent = [None if parent[v] is None else int(parent[v]) for v in range(n)]
        self.children = children
        self.depth = depth
        self.root = root
        self.height = max(depth)

        # Euler intervals give O(1) strict-ancestor tests; subtree sizes
        # back the per-level pair counts used by ancestor_tail.
        tin = [0] * n
        tout = [0] * n
        size = [1] * n
        dfs: list[int] = []
        t = 0
        stack: list[tuple[int, bool]] = [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                tout[v] = t
                for c in children[v]:
                    size[v] += size[c]
                continue
            tin[v] = t
            t += 1
            dfs.append(v)
            stack.append((v, True))
            for c in reversed(children[v]):
                stack.append((c, False))
        self._tin = tin
        self._tout = tout
        self._dfs_order = dfs
        self.subtree_size = size

    # -- queries ---------------------------------------------------------

    def _check_node(self, v: int) -> int:
        if not isinstance(v, (int, np.integer)) or not (0 <= v < self.n):
            raise InvalidInput(f"node index {v!r} out of range 0..{self.n - 1}")
        return int(v)

    def is_ancestor(self, a: int, b: int) -> bool:
        """True iff ``a`` is a *proper* ancestor of ``b``."""
        a = self._check_node(a)
        b = self._check_node(b)
        # half-open Euler interval: descendants of a have tin in (tin[a], tout[a])
        return self._tin[a] < self._tin[b] < self._tout[a]

    def ancestors(self, v: int) -> list[int]:
        """Proper ancestors of ``v``, nearest first."""
        v = self._check_node(v)
        out = []
        p = self.parent[v]
        while p is not None:
            out.append(p)
            p = self.parent[p]
        return out

    def lca(self, a: int, b: int) -> int:
        a = self._check_node(a)
        b = self._check_node(b)
        da, db = self.depth[a], self.depth[b]
        while da > db:
            a = self.parent[a]
            da -= 1
        while db > da:
            b = self.parent[b]
            db -= 1
        while a != b:
            a = self.parent[a]
            b = self.parent[b]
        return a

    def common_ancestors(self, vs: Iterable[int]) -> NodeSetAncestry:
        """Weak common-ancestor count of a nonempty node tuple.

        Repetition and arbitrary order are allowed; the result depends
        only on the set of nodes.
        """
        vs = list(vs)
        if not vs:
            raise InvalidInput("common_ancestors needs a nonempty node list")
        acc = self._check_node(vs[0])
        for v in vs[1:]:
            acc = self.lca(acc, self._check_node(v))
        return NodeSetAncestry(lca=acc, common_ancestor_count=self.depth[acc] + 1)

    def descendant_slice(self, v: int) -> list[int]:
        """All proper descendants of ``v`` (contiguous in DFS order)."""
        v = self._check_node(v)
        return self._dfs_order[self._tin[v] + 1 : self._tout[v]]

    def nodes_at_depth(self) -> list[int]:
        """Histogram: entry d = number of nodes at depth d."""
        out = [0] * (self.height + 1)
        for d in self.depth:
            out[d] += 1
        return out

    # -- serialization ----------------------------------------------------

    def to_json(self, bags: Sequence[Sequence[int]] | None = None, meta: dict | None = None) -> str:
        nodes = []
        for v in range(self.n):
            rec: dict = {"id": v, "parent": self.parent[v]}
            if bags is not None:
                rec["balls"] = list(map(int, bags[v]))
            nodes.append(rec)
        doc: dict = {"nodes": nodes}
        if meta is not None:
            doc["meta"] = meta
        return json.dumps(doc)

    def __eq__(self, other) -> bool:
        return isinstance(other, RootedTree) and self.parent == other.parent

    def __hash__(self):
        return hash(tuple(-1 if p is None else p for p in self.parent))

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, height={self.height})"


def tree_from_json(text: str) -> tuple[RootedTree, list[list[int]] | None, dict | None]:
    """Parse the tree document schema.

    Returns ``(tree, bags, meta)``; ``bags``/``meta`` are None when absent.
    Errors name the offending node.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"malformed JSON: {e}") from None
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise InvalidInput("document must be an object with a 'nodes' array")
    recs = doc["nodes"]
    if not isinstance(recs, list) or not recs:
        raise InvalidInput("'nodes' must be a nonempty array")
    n = len(recs)
    parent: list[int | None] = [None] * n
    seen = [False] * n
    any_balls = any(isinstance(r, dict) and "balls" in r for r in recs)
    bags: list[list[int]] | None = [[] for _ in range(n)] if any_balls else None
    for r in recs:
        if not isinstance(r, dict) or "id" not in r:
            raise InvalidInput("every node record needs an 'id'")
        i = r["id"]
        if not isinstance(i, int) or not (0 <= i < n):
            raise InvalidInput(f"node id {i!r} not in 0..{n - 1}")
        if seen[i]:
            raise InvalidInput(f"duplicate node id {i}")
        seen[i] = True
        parent[i] = r.get("parent", None)
        if bags is not None:
            balls = r.get("balls", [])
            if not isinstance(balls, list):
                raise InvalidInput(f"node {i}: 'balls' must be a list")
            bags[i] = [int(b) for b in balls]
    tree = RootedTree(parent)
    return tree, bags, doc.get("meta")


def make_complete_binary_tree(height: int) -> RootedTree:
    """Complete binary tree of the given height: 2**(height+1) - 1 nodes."""
    if height < 0:
        raise InvalidInput("height must be >= 0")
    if height >= MAX_NODES.bit_length():
        raise Infeasible(
            f"height {height} gives 2**{height + 1}-1 nodes, over the "
            f"MAX_NODES guard ({MAX_NODES})"
        )
    n = (1 << (height + 1)) - 1
    if n > MAX_NODES:
        raise Infeasible(f"height {height} gives {n} nodes, over the MAX_NODES guard ({MAX_NODES})")
    parent: list[int | None] = [None] * n
    for v in range(1, n):
        parent[v] = (v - 1) // 2
    return RootedTree(parent)


def make_path(length: int) -> RootedTree:
    """Rooted path on ``length`` nodes; node i's sole child is i + 1."""
    if length < 1:
        raise InvalidInput("path length must be >= 1")
    if length > MAX_NODES:
        raise Infeasible(f"{length} nodes exceeds the MAX_NODES guard ({MAX_NODES})")
    parent: list[int | None] = [None] + list(range(length - 1))
    return RootedTree(parent)


def random_tree(n: int, rng: np.random.Generator) -> RootedTree:
    """Uniform-attachment random tree: node i's parent is uniform on 0..i-1."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    parent: list[int | None] = [None] + [int(rng.integers(0, i)) for i in range(1, n)]
    return RootedTree(parent)
