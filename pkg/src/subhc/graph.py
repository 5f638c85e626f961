"""Weighted graphs, hierarchy trees, and the clustering cost function.

The cost of a hierarchy is implemented in three algebraically equivalent
forms (per-edge, per-split, and as a weighted sum of global cuts); they are
computed along genuinely different code paths so each can serve as an oracle
for the others.  Vertex subsets are represented as int bitmasks throughout.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable

from .errors import DomainError

Weight = int | float | Fraction


def as_mask(s, n: int) -> int:
    """Normalize a vertex subset (mask, iterable, or single id) to a bitmask."""
    if isinstance(s, int):
        if s < 0 or s >= (1 << n):
            raise DomainError(f"mask {s} out of range for n={n}")
        return s
    mask = 0
    for v in s:
        if not 0 <= v < n:
            raise DomainError(f"vertex id {v} out of range for n={n}")
        mask |= 1 << v
    return mask


def mask_to_ids(mask: int) -> list[int]:
    ids = []
    v = 0
    while mask:
        if mask & 1:
            ids.append(v)
        mask >>= 1
        v += 1
    return ids


class Graph:
    """Immutable weighted undirected graph on vertices 0..n-1.

    Parallel input edges are merged by weight addition at construction; self
    loops are rejected.  Weights stay in whatever numeric type they were given
    (int and Fraction weights make every derived quantity exact).
    """

    __slots__ = ("n", "edges", "_adj", "_wdeg")

    def __init__(self, n: int, edges: Iterable[tuple] = ()):
        if n < 0:
            raise DomainError("vertex count must be non-negative")
        self.n = n
        merged: dict[tuple[int, int], Weight] = {}
        for e in edges:
            if len(e) == 2:
                u, v = e
                w: Weight = 1
            else:
                u, v, w = e
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u},{v}) has endpoint outside 0..{n - 1}")
            if u == v:
                raise DomainError(f"self loop at vertex {u}")
            if w <= 0:
                raise DomainError(f"edge ({u},{v}) has non-positive weight {w}")
            if u > v:
                u, v = v, u
            if (u, v) in merged:
                merged[(u, v)] = merged[(u, v)] + w
            else:
                merged[(u, v)] = w
        self.edges: tuple[tuple[int, int, Weight], ...] = tuple(
            (u, v, w) for (u, v), w in sorted(merged.items())
        )
        self._adj = None
        self._wdeg = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self, v: int) -> list[tuple[int, Weight]]:
        """Neighbors of v as (neighbor, weight), ascending by neighbor id."""
        if self._adj is None:
            adj: list[list[tuple[int, Weight]]] = [[] for _ in range(self.n)]
            for u, w, wt in self.edges:
                adj[u].append((w, wt))
                adj[w].append((u, wt))
            for lst in adj:
                lst.sort()
            self._adj = adj
        if not 0 <= v < self.n:
            raise DomainError(f"vertex id {v} out of range")
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency(v))

    def weighted_degree(self, v: int) -> Weight:
        if self._wdeg is None:
            wdeg: list[Weight] = [0] * self.n
            for u, w, wt in self.edges:
                wdeg[u] = wdeg[u] + wt
                wdeg[w] = wdeg[w] + wt
            self._wdeg = wdeg
        if not 0 <= v < self.n:
            raise DomainError(f"vertex id {v} out of range")
        return self._wdeg[v]

    def total_weight(self) -> Weight:
        t: Weight = 0
        for _, _, w in self.edges:
            t = t + w
        return t

    def induced(self, mask) -> tuple["Graph", list[int]]:
        """Subgraph induced by a vertex subset, relabeled 0..k-1.

        Returns the subgraph and the list mapping new ids to original ids.
        """
        mask = as_mask(mask, self.n)
        ids = mask_to_ids(mask)
        pos = {v: i for i, v in enumerate(ids)}
        sub = [
            (pos[u], pos[v], w)
            for u, v, w in self.edges
            if (mask >> u) & 1 and (mask >> v) & 1
        ]
        return Graph(len(ids), sub), ids

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph) and self.n == other.n and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def cut_weight(g: Graph, s) -> Weight:
    """Total weight of edges with exactly one endpoint in s."""
    mask = as_mask(s, g.n)
    total: Weight = 0
    for u, v, w in g.edges:
        if ((mask >> u) & 1) != ((mask >> v) & 1):
            total = total + w
    return total


def cross_weight(g: Graph, s, t) -> Weight:
    """Total weight of edges with one endpoint in s and the other in t.

    s and t must be disjoint.  Equals the half-sum identity
    (w(s) + w(t) - w(s|t)) / 2, which tests exercise separately.
    """
    ms = as_mask(s, g.n)
    mt = as_mask(t, g.n)
    if ms & mt:
        raise DomainError("cross_weight requires disjoint vertex sets")
    total: Weight = 0
    for u, v, w in g.edges:
        bu, bv = (ms >> u) & 1, (ms >> v) & 1
        cu, cv = (mt >> u) & 1, (mt >> v) & 1
        if (bu and cv) or (bv and cu):
            total = total + w
    return total


# ---------------------------------------------------------------------------
# Hierarchy trees


class HCNode:
    __slots__ = ("mask", "size", "left", "right", "vertex")

    def __init__(self, mask, size, left=None, right=None, vertex=-1):
        self.mask = mask
        self.size = size
        self.left = left
        self.right = right
        self.vertex = vertex

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class HCTree:
    """Full binary hierarchy over leaves 0..n-1.

    Every internal node splits its vertex set into two nonempty children;
    masks and subtree sizes are cached at construction.  Non-binary input is
    rejected.
    """

    __slots__ = ("n", "root")

    def __init__(self, n: int, root: HCNode):
        self.n = n
        self.root = root

    @classmethod
    def from_nested(cls, spec) -> "HCTree":
        """Build from nested pairs of leaf ids, e.g. ((0, 1), (2, 3))."""

        def build(node) -> HCNode:
            if isinstance(node, int):
                return HCNode(1 << node, 1, vertex=node)
            if isinstance(node, (tuple, list)):
                if len(node) != 2:
                    raise DomainError(
                        f"internal node must have exactly two children, got {len(node)}"
                    )
                left = build(node[0])
                right = build(node[1])
                if left.mask & right.mask:
                    raise DomainError("children overlap")
                return HCNode(
                    left.mask | right.mask, left.size + right.size, left, right
                )
            raise DomainError(f"bad tree node {node!r}")

        root = build(spec)
        n = root.size
        if root.mask != (1 << n) - 1:
            raise DomainError("leaves must be exactly 0..n-1, each once")
        return cls(n, root)

    @classmethod
    def parse(cls, text: str) -> "HCTree":
        """Parse the nested-parentheses form, e.g. "((0,1),(2,3))"."""
        pos = 0
        s = "".join(text.split())

        def node():
            nonlocal pos
            if pos >= len(s):
                raise DomainError("unexpected end of tree string")
            if s[pos] == "(":
                pos += 1
                left = node()
                if pos >= len(s) or s[pos] != ",":
                    raise DomainError(f"expected ',' at position {pos}")
                pos += 1
                right = node()
                if pos >= len(s) or s[pos] != ")":
                    raise DomainError(f"expected ')' at position {pos}")
                pos += 1
                return (left, right)
            start = pos
            while pos < len(s) and s[pos].isdigit():
                pos += 1
            if start == pos:
                raise DomainError(f"expected leaf id at position {pos}")
            return int(s[start:pos])

        spec = node()
        if pos != len(s):
            raise DomainError(f"trailing characters at position {pos}")
        return cls.from_nested(spec)

    def to_string(self) -> str:
        def fmt(node: HCNode) -> str:
            if node.is_leaf:
                return str(node.vertex)
            return f"({fmt(node.left)},{fmt(node.right)})"

        return fmt(self.root)

    def internal_nodes(self) -> list[HCNode]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                out.append(node)
                stack.append(node.left)
                stack.append(node.right)
        return out

    def depth(self) -> int:
        def d(node: HCNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(d(node.left), d(node.right))

        return d(self.root)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HCTree)
            and self.n == other.n
            and self.to_string() == other.to_string()
        )

    def __hash__(self):
        return hash(self.to_string())

    def __repr__(self) -> str:
        return f"HCTree({self.to_string()})"


def tree_from_masks(n: int, split: "callable") -> HCTree:
    """Build a tree by recursively splitting bitmasks with split(mask) -> submask."""

    def build(mask: int) -> HCNode:
        size = bin(mask).count("1")
        if size == 1:
            return HCNode(mask, 1, vertex=mask.bit_length() - 1)
        left_mask = split(mask)
        if left_mask == 0 or left_mask == mask or (left_mask & ~mask):
            raise DomainError("split produced an improper bipartition")
        left = build(left_mask)
        right = build(mask ^ left_mask)
        return HCNode(mask, size, left, right)

    return HCTree(n, build((1 << n) - 1))


def random_hc_tree(n: int, rng: random.Random) -> HCTree:
    """Uniformly shaped-ish random full binary tree over 0..n-1."""
    if n < 1:
        raise DomainError("need at least one leaf")

    def build(ids: list[int]) -> HCNode:
        if len(ids) == 1:
            return HCNode(1 << ids[0], 1, vertex=ids[0])
        k = rng.randint(1, len(ids) - 1)
        left = build(ids[:k])
        right = build(ids[k:])
        return HCNode(left.mask | right.mask, left.size + right.size, left, right)

    ids = list(range(n))
    rng.shuffle(ids)
    return HCTree(n, build(ids))


def _check_leaves(g: Graph, t: HCTree) -> None:
    if t.n != g.n or t.root.mask != (1 << g.n) - 1:
        raise DomainError("tree leaves do not match graph vertices")


def cost_edge_form(g: Graph, t: HCTree) -> Weight:
    """Clustering cost as sum over edges of weight times LCA subtree size.

    The LCA of an edge is found by descending from the root while both
    endpoints stay in one child.
    """
    _check_leaves(g, t)
    total: Weight = 0
    for u, v, w in g.edges:
        node = t.root
        while True:
            lm = node.left.mask
            if (lm >> u) & 1 and (lm >> v) & 1:
                node = node.left
            elif not ((lm >> u) & 1) and not ((lm >> v) & 1):
                node = node.right
            else:
                break
        total = total + w * node.size
    return total


def cost_split_form(g: Graph, t: HCTree) -> Weight:
    """Clustering cost as sum over splits of |S| times the split's cross weight."""
    _check_leaves(g, t)
    total: Weight = 0
    for node in t.internal_nodes():
        total = total + node.size * cross_weight(g, node.left.mask, node.right.mask)
    return total


def cost_cut_form(g: Graph, t: HCTree) -> Weight:
    """Clustering cost as a weighted combination of global cut values.

    cost = (sum over splits of |S_r| w(S_l) + |S_l| w(S_r)
            + sum over vertices of w({v})) / 2.
    """
    _check_leaves(g, t)
    acc: Weight = 0
    for node in t.internal_nodes():
        acc = acc + node.right.size * cut_weight(g, node.left.mask)
        acc = acc + node.left.size * cut_weight(g, node.right.mask)
    for v in range(g.n):
        acc = acc + cut_weight(g, 1 << v)
    if isinstance(acc, int) and acc % 2 == 0:
        return acc // 2
    return acc / 2


def hc_cost_lower_bound(n: int, m: int) -> Fraction:
    """Universal lower bound 4 m^2 / (3 n) on the cost of any hierarchy."""
    if n < 1:
        raise DomainError("need at least one vertex")
    if m < 0:
        raise DomainError("edge count must be non-negative")
    return Fraction(4 * m * m, 3 * n)


# ---------------------------------------------------------------------------
# Edge-list file format: "u v" or "u v w" per line, '#' comments.


def parse_edge_list(lines: Iterable[str], n: int | None = None) -> Graph:
    edges = []
    max_id = -1
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DomainError(f"line {lineno}: expected 'u v' or 'u v w', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w: Weight = 1
            if len(parts) == 3:
                w = int(parts[2]) if parts[2].isdigit() else float(parts[2])
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from exc
        max_id = max(max_id, u, v)
        edges.append((u, v, w))
    if n is None:
        n = max_id + 1
    return Graph(n, edges)


def load_graph(path: str, n: int | None = None) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh, n=n)


def save_graph(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n} m={g.m}\n")
        for u, v, w in g.edges:
            if w == 1:
                fh.write(f"{u} {v}\n")
            else:
                fh.write(f"{u} {v} {w}\n")
