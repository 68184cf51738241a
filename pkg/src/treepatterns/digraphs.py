"""Small acyclic digraphs and their order-preserving embeddings into trees.

An embedding of a DAG G into a tree maps vertices injectively to nodes
(to balls, for split trees) so that every directed reachability u < v in
G lands on a strict ancestor pair; incomparable vertices of G are free to
land anywhere distinct.  Vertices split into sinks (A0), "ancestors" (A1,
exactly one reachable sink) and "common ancestors" (A2, at least two);
these sizes drive the growth rates of embedding counts.

Counting routes:

* ``embedding_count`` -- plain backtracking over a constraint-aware vertex
  order; the reference oracle, fine at desk scale.
* ``star_count_formula`` -- closed form for the fused-source star S(k, r),
  summing over sink tuples and root placements.
* ``embedding_count_sink_profile`` -- exact fast route for DAGs with at
  most two sinks: every vertex must land on the ancestor spine of the
  sink images, so the count factors through (depth, depth, LCA-depth)
  tallies and tiny pinned counts on synthetic spine trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Sequence

import numpy as np

from .errors import Infeasible, InvalidInput
from .trees import RootedTree

MAX_EMBED_VERTICES = 12
MAX_FUSION_VERTICES = 12
MAX_ISO_VERTICES = 10


class Digraph:
    """Directed multigraph on vertices 0..n-1; parallel edges allowed."""

    __slots__ = ("n", "edges", "out_adj", "in_adj", "_reach")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        self.n = n
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInput(f"edge ({u},{v}) out of vertex range 0..{n - 1}")
            if u == v:
                raise InvalidInput(f"self-loop at vertex {u}")
        out_adj: list[set[int]] = [set() for _ in range(n)]
        in_adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in self.edges:
            out_adj[u].add(v)
            in_adj[v].add(u)
        self.out_adj = out_adj
        self.in_adj = in_adj
        self._reach = self._reachability()

    def _reachability(self) -> list[int]:
        """Strict-descendant bitmask per vertex; raises on a cycle."""
        n = self.n
        state = [0] * n  # 0 new, 1 active, 2 done
        reach = [0] * n
        for start in range(n):
            if state[start]:
                continue
            stack: list[tuple[int, list[int]]] = [(start, sorted(self.out_adj[start]))]
            state[start] = 1
            while stack:
                v, todo = stack[-1]
                if todo:
                    w = todo.pop()
                    if state[w] == 1:
                        raise InvalidInput(f"digraph has a directed cycle through vertex {w}")
                    if state[w] == 0:
                        state[w] = 1
                        stack.append((w, sorted(self.out_adj[w])))
                else:
                    stack.pop()
                    state[v] = 2
                    m = 0
                    for w in self.out_adj[v]:
                        m |= (1 << w) | reach[w]
                    reach[v] = m
        return reach

    def reaches(self, u: int, v: int) -> bool:
        """True iff u < v in the induced strict partial order."""
        return bool(self._reach[u] >> v & 1)

    def edge_multiset(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = {0}
        frontier = [0]
        und: list[set[int]] = [self.out_adj[v] | self.in_adj[v] for v in range(self.n)]
        while frontier:
            v = frontier.pop()
            for w in und[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == self.n

    def __eq__(self, other):
        return (
            isinstance(other, Digraph)
            and self.n == other.n
            and self.edge_multiset() == other.edge_multiset()
        )

    def __hash__(self):
        return hash((self.n, self.edge_multiset()))

    def __repr__(self):
        return f"Digraph(n={self.n}, edges={sorted(self.edges)})"


@dataclass(frozen=True)
class VertexClassification:
    a0: frozenset[int]
    a1: frozenset[int]
    a2: frozenset[int]


def classify_vertices(g: Digraph) -> VertexClassification:
    """Partition by the number of reachable sinks: 0 (is one), 1, or >= 2."""
    sinks = [v for v in range(g.n) if not g.out_adj[v]]
    sink_mask = 0
    for s in sinks:
        sink_mask |= 1 << s
    a0, a1, a2 = set(), set(), set()
    for v in range(g.n):
        if not g.out_adj[v]:
            a0.add(v)
            continue
        reach_sinks = (g._reach[v] & sink_mask).bit_count()
        (a1 if reach_sinks == 1 else a2).add(v)
    return VertexClassification(frozenset(a0), frozenset(a1), frozenset(a2))


def a1_partition_by_sink(g: Digraph) -> dict[int, list[int]]:
    """A1 vertices grouped by the unique sink they reach."""
    cls = classify_vertices(g)
    out: dict[int, list[int]] = {s: [] for s in cls.a0}
    for v in cls.a1:
        for s in cls.a0:
            if g.reaches(v, s):
                out[s].append(v)
                break
    return out


# -- constructors -----------------------------------------------------------


def directed_path(k: int) -> Digraph:
    if k < 1:
        raise InvalidInput("path needs at least one vertex")
    return Digraph(k, [(i, i + 1) for i in range(k - 1)])


def star(k: int, r: int) -> Digraph:
    """r directed k-vertex paths with their sources fused: 1 + (k-1)r vertices."""
    if k < 2 or r < 1:
        raise InvalidInput("star needs k >= 2 and r >= 1")
    edges = []
    nxt = 1
    for _ in range(r):
        prev = 0
        for _ in range(k - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    return Digraph(nxt, edges)


def diamond() -> Digraph:
    """Two incomparable middles between a top and a bottom vertex."""
    return Digraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])


def digraph_from_edge_text(text: str) -> Digraph:
    """One 'u v' pair per line, 0-based vertices; blank lines ignored."""
    edges = []
    top = -1
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidInput(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidInput(f"line {lineno}: expected integers, got {line!r}") from None
        edges.append((u, v))
        top = max(top, u, v)
    if not edges:
        raise InvalidInput("edge list is empty")
    return Digraph(top + 1, edges)


# ---------------------------------------------------------------------------
# embedding targets: a thin view over node trees and split-tree ball orders


class _Universe:
    """Elements with a strict ancestor order, ancestor chains, and ranges."""

    def __init__(self, t):
        from .splitgen import SplitTree

        if isinstance(t, SplitTree):
            tree = t.tree
            self.size = t.n_balls
            elem_node = [t.node_of_ball(b) for b in range(1, t.n_balls + 1)]
            node_elems: list[list[int]] = [[] for _ in range(tree.n)]
            for e, v in enumerate(elem_node):
                node_elems[v].append(e)
            self._node_elems = node_elems
        else:
            tree = t
            self.size = t.n
            elem_node = list(range(t.n))
            self._node_elems = [[v] for v in range(t.n)]
        self._tree = tree
        self._elem_node = elem_node

    def is_anc(self, a: int, b: int) -> bool:
        return self._tree.is_ancestor(self._elem_node[a], self._elem_node[b])

    def ancestors(self, e: int) -> list[int]:
        out = []
        for v in self._tree.ancestors(self._elem_node[e]):
            out.extend(self._node_elems[v])
        return out

    def descendants(self, e: int) -> list[int]:
        out = []
        for v in self._tree.descendant_slice(self._elem_node[e]):
            out.extend(self._node_elems[v])
        return out

    def all_elements(self) -> range:
        return range(self.size)


def _placement_order(g: Digraph, pinned: Sequence[int]) -> list[int]:
    """Static order: pinned first, then grow each component from a sink,
    preferring vertices whose constraints point at already-placed images
    (ancestor chains are far smaller candidate sets than subtrees)."""
    order = [v for v in pinned]
    placed = set(order)
    und = [g.out_adj[v] | g.in_adj[v] for v in range(g.n)]
    while len(order) < g.n:
        frontier = [v for v in range(g.n) if v not in placed and und[v] & placed]
        if not frontier:
            # new component: pick a sink so the chain above it goes first
            rest = [v for v in range(g.n) if v not in placed]
            sinks = [v for v in rest if not g.out_adj[v]]
            order.append(sinks[0] if sinks else rest[0])
            placed.add(order[-1])
            continue
        out_ready = [v for v in frontier if g.out_adj[v] & placed]
        pick = out_ready[0] if out_ready else frontier[0]
        order.append(pick)
        placed.add(pick)
    return order


def embedding_count(g: Digraph, t, pins: dict[int, int] | None = None) -> int:
    """Number of order-preserving injective embeddings of g into t.

    ``pins`` (vertex -> element) fixes images, used by the profile route
    and by tests.  Backtracking explores a static vertex order; candidate
    sets come from the cheapest placed neighbor constraint.
    """
    if g.n > MAX_EMBED_VERTICES:
        raise Infeasible(f"digraph has {g.n} > {MAX_EMBED_VERTICES} vertices (guard)")
    uni = _Universe(t)
    if g.n > uni.size:
        return 0
    pins = dict(pins or {})
    for v, e in pins.items():
        if not (0 <= e < uni.size):
            raise InvalidInput(f"pin {v}->{e} outside the universe")
    order = _placement_order(g, list(pins))
    img: dict[int, int] = {}
    used: set[int] = set()

    def ok(v: int, x: int) -> bool:
        if x in used:
            return False
        for w in g.out_adj[v]:
            if w in img and not uni.is_anc(x, img[w]):
                return False
        for w in g.in_adj[v]:
            if w in img and not uni.is_anc(img[w], x):
                return False
        return True

    def place(i: int) -> int:
        if i == len(order):
            return 1
        v = order[i]
        if v in pins:
            x = pins[v]
            if not ok(v, x):
                return 0
            img[v] = x
            used.add(x)
            total = place(i + 1)
            del img[v]
            used.discard(x)
            return total
        base: Iterable[int]
        placed_out = [img[w] for w in g.out_adj[v] if w in img]
        placed_in = [img[w] for w in g.in_adj[v] if w in img]
        if placed_out:
            base = uni.ancestors(placed_out[0])
        elif placed_in:
            base = uni.descendants(placed_in[0])
        else:
            base = uni.all_elements()
        total = 0
        for x in base:
            if ok(v, x):
                img[v] = x
                used.add(x)
                total += place(i + 1)
                del img[v]
                used.discard(x)
        return total

    return place(0)


# ---------------------------------------------------------------------------
# closed-form star counts


def _binom(top: int, j: int) -> int:
    return 0 if top < 0 else math.comb(top, j)


STAR_NAIVE_GUARD = 2_000_000


def _disjoint_interior_count(groups: list[tuple[tuple[int, ...], int]], need: int, r: int) -> int:
    """Ways to pick `need` interior nodes per ray, pairwise disjoint.

    ``groups`` lists (rays that may use the group, group size); rays index
    0..r-1.  Counted by distributing each group's nodes among its rays.
    """
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def rec(gi: int, remaining: tuple[int, ...]) -> int:
        if all(x == 0 for x in remaining):
            return 1
        if gi == len(groups):
            return 0
        members, size = groups[gi]
        rem = list(remaining)
        total = 0

        def assign(mi: int, left: int, ways: int):
            nonlocal total
            if mi == len(members):
                total += ways * rec(gi + 1, tuple(rem))
                return
            ray = members[mi]
            take_max = min(left, rem[ray])
            for x in range(take_max + 1):
                rem[ray] -= x
                assign(mi + 1, left - x, ways * math.comb(left, x))
                rem[ray] += x

        assign(0, size, 1)
        return total

    return rec(0, (need,) * r)


def _star_shape_count(k: int, depths: tuple[int, ...], pair_j: dict[tuple[int, int], int]) -> int:
    """Exact embedding count of S(k, r) onto one class of sink images.

    The sink images' ancestor chains form a spine described by the depth
    vector and the pairwise LCA depths.  For each admissible root depth t
    (a strict common ancestor), interior vertices are spine nodes strictly
    below t that are strict ancestors of their ray's sink; nodes shared by
    several chains may serve any one of those rays, sinks sitting on
    another ray's chain are unavailable, and the choices must be disjoint,
    which _disjoint_interior_count enforces.  Summing over t resolves the
    root-placement formula so it matches the backtracking oracle exactly.
    """
    r = len(depths)
    if r == 1:
        t_max = depths[0] - 1
    else:
        j_all = min(pair_j.values())
        t_max = min(j_all, min(depths) - 1)
    total = 0
    for t in range(0, t_max + 1):
        groups: dict[tuple[int, ...], int] = {}
        for e in range(t + 1, max(depths) + 1):
            present = [i for i in range(r) if e <= depths[i]]
            seen: set[int] = set()
            for i in present:
                if i in seen:
                    continue
                block = [i]
                seen.add(i)
                for i2 in present:
                    if i2 not in seen and pair_j[(min(i, i2), max(i, i2))] >= e:
                        block.append(i2)
                        seen.add(i2)
                if any(e == depths[i2] for i2 in block):
                    continue  # this spine node is a sink image
                key = tuple(sorted(block))
                groups[key] = groups.get(key, 0) + 1
        if k == 2:
            total += 1  # no interior vertices to place
        else:
            total += _disjoint_interior_count(sorted(groups.items()), k - 2, r)
    return total


def star_count_formula(tree: RootedTree, k: int, r: int) -> int:
    """[S(k, r)] via the root-placement sum over sink tuples.

    Resolved convention: over ordered r-tuples of distinct sink images,
    admissible root images are the *strict* common ancestors (depth t with
    t <= lca depth and t < every sink depth); given t, each ray chooses
    its k-2 interior vertices among the strict ancestors of its sink
    strictly below t, disjointly across rays and avoiding sink nodes.
    Where the chains do not overlap below the root this reduces to the
    plain product of binomials binom(d_i - t - 1, k - 2); the disjointness
    correction is what makes the sum agree with the backtracking oracle
    exactly on every tree, not just asymptotically.
    """
    if k < 2 or r < 1:
        raise InvalidInput("star counts need k >= 2 and r >= 1")
    if tree.n**r <= STAR_NAIVE_GUARD:
        return _star_count_shapes(tree, k, r)
    if r == 1 or r == 2 or k == 2:
        return _star_count_profile(tree, k, r)
    raise Infeasible(
        f"n^r = {tree.n}^{r} exceeds the enumeration guard ({STAR_NAIVE_GUARD}) "
        f"and the aggregated route covers r <= 2 (or k = 2, r <= 3) only"
    )


def _star_count_shapes(tree: RootedTree, k: int, r: int) -> int:
    """Enumerate sink tuples, group by spine shape, evaluate shapes once."""
    from collections import Counter

    shapes: Counter = Counter()
    for tup in product(range(tree.n), repeat=r):
        if r > 1 and len(set(tup)) != r:
            continue
        depths = tuple(tree.depth[v] for v in tup)
        pj = tuple(
            tree.depth[tree.lca(tup[i], tup[i2])]
            for i in range(r)
            for i2 in range(i + 1, r)
        )
        shapes[(depths, pj)] += 1
    total = 0
    for (depths, pj), mult in shapes.items():
        pair_j = {}
        idx = 0
        for i in range(r):
            for i2 in range(i + 1, r):
                pair_j[(i, i2)] = pj[idx]
                idx += 1
        total += mult * _star_shape_count(k, depths, pair_j)
    return total


def _star_count_profile(tree: RootedTree, k: int, r: int) -> int:
    """Aggregated route on large trees via LCA-depth tensors.

    Valid when the (depths, overall-LCA-depth) class determines the shape
    count: always for r <= 2, and for any r <= 3 when k = 2 (no interior
    vertices, so chain overlaps below the root are irrelevant).
    """
    from .treeparams import lca_depth_tensors

    if r == 1:
        counts = np.bincount(tree.depth, minlength=tree.height + 1)
        return sum(
            int(counts[d]) * _star_shape_count(k, (d,), {})
            for d in range(tree.height + 1)
            if counts[d]
        )
    if r > 2 and k != 2:
        raise Infeasible("aggregated star counts need r <= 2 unless k = 2")

    D = lca_depth_tensors(tree, r)
    h = tree.height

    @lru_cache(maxsize=None)
    def shape_eval(j: int, depths: tuple[int, ...]) -> int:
        if k == 2:
            # interiors absent: count admissible strict-root depths
            t_max = min(j, min(depths) - 1)
            return t_max + 1 if t_max >= 0 else 0
        pair_j = {(0, 1): j}
        return _star_shape_count(k, depths, pair_j)

    total = 0
    for j in range(h + 1):
        slab = D[j]
        for idx in np.argwhere(slab):
            cnt = int(slab[tuple(idx)])
            total += cnt * shape_eval(j, tuple(int(d) for d in idx))
    return total


# fast exact counting for <= 2-sink DAGs ------------------------------------


def _spine_tree(d1: int, d2: int | None = None, j: int | None = None) -> tuple[RootedTree, int, int | None]:
    """Chain to depth d1, optionally with a side branch from depth j to d2.

    Returns (tree, leaf1, leaf2); every ancestor of either leaf is on the
    spine, so pinned counts here equal pinned counts in any host tree with
    the same (d1, d2, lca-depth) geometry.
    """
    parent: list[int | None] = [None] + list(range(d1))
    leaf1 = d1
    leaf2 = None
    if d2 is not None:
        assert j is not None and j <= min(d1, d2) and (d1 > j or d2 > j)
        if d2 == j:
            leaf2 = j
        else:
            base = len(parent)
            parent.append(j)  # depth j+1
            for t in range(d2 - j - 1):
                parent.append(base + t)
            leaf2 = len(parent) - 1
        if d1 == j:
            leaf1 = j
    return RootedTree(parent), leaf1, leaf2


@lru_cache(maxsize=200_000)
def _spine_pinned_count(g: Digraph, d1: int, d2: int | None, j: int | None) -> int:
    sinks = sorted(classify_vertices(g).a0)
    spine, leaf1, leaf2 = _spine_tree(d1, d2, j)
    pins = {sinks[0]: leaf1}
    if d2 is not None:
        pins[sinks[1]] = leaf2
    return embedding_count(g, spine, pins=pins)


def embedding_count_sink_profile(g: Digraph, tree: RootedTree) -> int:
    """Exact [g] for DAGs with one or two sinks, fast on large trees.

    Every vertex of a DAG reaches a sink, so all images lie on the union
    of the sink images' ancestor chains.  Summing pinned counts on
    synthetic spine trees against (depth, depth, lca-depth) tallies gives
    the total without enumerating embeddings.
    """
    from .treeparams import lca_depth_tensors

    cls = classify_vertices(g)
    if len(cls.a0) not in (1, 2):
        raise Infeasible("profile counting supports DAGs with 1 or 2 sinks")
    if not g.is_connected():
        raise Infeasible("profile counting expects a connected DAG")
    h = tree.height
    if len(cls.a0) == 1:
        counts = np.bincount(tree.depth, minlength=h + 1)
        return sum(
            int(counts[d]) * _spine_pinned_count(g, d, None, None)
            for d in range(h + 1)
            if counts[d]
        )

    D = lca_depth_tensors(tree, 2)
    total = 0
    for j in range(h + 1):
        slab = D[j]
        for d1, d2 in np.argwhere(slab):
            total += int(slab[d1, d2]) * _spine_pinned_count(g, int(d1), int(d2), j)
    return total


def embedding_lower_bound_complete_binary(g: Digraph, height: int) -> int:
    """Constructive lower bound for complete binary trees of given height:
    common-ancestors near the root, sinks on leaves, ancestors on the
    root-leaf paths."""
    cls = classify_vertices(g)
    a2 = len(cls.a2)
    a1 = len(cls.a1)
    per_sink = a1_partition_by_sink(g)
    total = _binom(2 ** (height - a2), len(cls.a0))
    for s in sorted(per_sink):
        total *= _binom(height - a2 - a1 - 1, len(per_sink[s]))
    return total


# ---------------------------------------------------------------------------
# fused-path families


@dataclass
class FusedPathFamily:
    k: int
    r: int
    variant: str
    members: list[Digraph]
    labellings: list[dict[int, tuple]] | None = None

    def __len__(self):
        return len(self.members)


def _labelled_fusions(k: int, r: int):
    """All partitions of the r*k path vertices with at most one vertex per
    path in a class and an acyclic quotient.  Yields (digraph, classes)."""
    verts = [(i, j) for i in range(r) for j in range(k)]

    def rec(idx: int, classes: list[list[tuple[int, int]]]):
        if idx == len(verts):
            yield [list(c) for c in classes]
            return
        v = verts[idx]
        for c in classes:
            if all(w[0] != v[0] for w in c):
                c.append(v)
                yield from rec(idx + 1, classes)
                c.pop()
        classes.append([v])
        yield from rec(idx + 1, classes)
        classes.pop()

    for classes in rec(0, []):
        cls_index = {}
        for ci, c in enumerate(classes):
            for v in c:
                cls_index[v] = ci
        edges = []
        for i in range(r):
            for j in range(k - 1):
                edges.append((cls_index[(i, j)], cls_index[(i, j + 1)]))
        try:
            q = Digraph(len(classes), edges)
        except InvalidInput:
            continue  # cyclic quotient
        yield q, {ci: tuple(sorted(c)) for ci, c in enumerate(classes)}


def canonical_form(g: Digraph) -> tuple:
    """Isomorphism-canonical encoding of a directed multigraph.

    Iterated degree/neighbor-color refinement, then exhaustive permutation
    within the refined classes; guard at MAX_ISO_VERTICES vertices.
    """
    n = g.n
    if n > MAX_ISO_VERTICES:
        raise Infeasible(f"isomorphism dedup guarded at {MAX_ISO_VERTICES} vertices")
    emult: dict[tuple[int, int], int] = {}
    for e in g.edges:
        emult[e] = emult.get(e, 0) + 1
    colors = [0] * n
    for _ in range(n):
        sig = []
        for v in range(n):
            outs = tuple(sorted((colors[w], emult[(v, w)]) for w in g.out_adj[v]))
            ins = tuple(sorted((colors[w], emult[(w, v)]) for w in g.in_adj[v]))
            sig.append((colors[v], outs, ins))
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if new == colors:
            break
        colors = new
    classes: dict[int, list[int]] = {}
    for v in range(n):
        classes.setdefault(colors[v], []).append(v)
    buckets = [classes[c] for c in sorted(classes)]
    best = None
    for perm_parts in product(*(permutations(b) for b in buckets)):
        mapping = {}
        pos = 0
        for bucket, perm in zip(buckets, perm_parts):
            for src, dst_slot in zip(perm, range(pos, pos + len(bucket))):
                mapping[src] = dst_slot
            pos += len(bucket)
        enc = tuple(sorted((mapping[u], mapping[v]) for u, v in g.edges))
        if best is None or enc < best:
            best = enc
    return (n, best)


def enumerate_fused_paths(k: int, r: int, variant: str = "labelled") -> FusedPathFamily:
    """Families of digraphs built from r directed k-vertex paths.

    variants:
      labelled      -- every fusion pattern, keeping the path labellings
      unlabelled    -- quotient by digraph isomorphism
      connected     -- unlabelled, connected members only (alias: connectedOnly)
      familyF       -- the exact decomposition family for the star/upsilon
                       identity (k <= 3; see enumerate_family_f)
    """
    if variant == "connectedOnly":
        variant = "connected"
    if variant == "familyF":
        return enumerate_family_f(k, r)
    if k < 2 or r < 1:
        raise InvalidInput("need k >= 2 and r >= 1")
    if k * r > MAX_FUSION_VERTICES:
        raise Infeasible(f"k*r = {k * r} exceeds the fusion guard ({MAX_FUSION_VERTICES})")
    if variant == "labelled":
        members, labellings = [], []
        for q, lab in _labelled_fusions(k, r):
            members.append(q)
            labellings.append(lab)
        return FusedPathFamily(k, r, variant, members, labellings)
    if variant in ("unlabelled", "connected"):
        seen = {}
        for q, _ in _labelled_fusions(k, r):
            if variant == "connected" and not q.is_connected():
                continue
            key = canonical_form(q)
            if key not in seen:
                seen[key] = q
        return FusedPathFamily(k, r, variant, list(seen.values()))
    raise InvalidInput(f"unknown variant {variant!r}")


def enumerate_family_f(k: int, r: int) -> FusedPathFamily:
    """The family whose embedding counts sum exactly to the distinct-mode
    upsilon parameter.

    Members are quotients of the generic configuration (root image w; per
    ray i a sink image u_i and, for k = 3, an interior image m_i) by every
    consistent coincidence pattern: enumerate set partitions of the
    variables, discard patterns equating m_i with u_i or two sinks,
    discard cyclic quotients, and keep the induced strict constraints.
    Implemented for k in {2, 3}.
    """
    if k not in (2, 3):
        raise Infeasible("the exact decomposition family is implemented for k <= 3")
    if r < 1:
        raise InvalidInput("need r >= 1")
    from .constants import iter_set_partitions

    variables: list[tuple] = [("w",)]
    if k == 3:
        variables += [("m", i) for i in range(r)]
    variables += [("u", i) for i in range(r)]
    strict = [(("m", i), ("u", i)) for i in range(r)] if k == 3 else []
    weak = [(("w",), ("u", i)) for i in range(r)]

    members: list[Digraph] = []
    labellings: list[dict[int, tuple]] = []
    for part in iter_set_partitions(variables):
        grp: dict[tuple, int] = {}
        for gi, block in enumerate(part):
            for x in block:
                grp[x] = gi
        if len({grp[("u", i)] for i in range(r)}) < r:
            continue
        if any(grp[a] == grp[b] for a, b in strict):
            continue
        edges = set()
        for a, b in strict:
            edges.add((grp[a], grp[b]))
        for a, b in weak:
            if grp[a] != grp[b]:
                edges.add((grp[a], grp[b]))
        try:
            q = Digraph(len(part), sorted(edges))
        except InvalidInput:
            continue  # the pattern forces a cycle
        members.append(q)
        labellings.append({gi: tuple(sorted(block)) for gi, block in enumerate(part)})
    return FusedPathFamily(k, r, "familyF", members, labellings)
