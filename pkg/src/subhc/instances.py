"""Graph generators: random models and structured adversarial families.

All generators are deterministic per seed; where a family is built from a
planted structure, the uniform vertex permutation is applied last.  The
exponent-parameterized entry points round to feasible integers and are backed
by low-level constructors taking (clique size, clique count, ...) directly.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .graph import Graph


def _permute(n: int, edges, rng) -> tuple[Graph, np.ndarray]:
    perm = rng.permutation(n)
    return Graph(n, [(int(perm[u]), int(perm[v]), w) for u, v, w in edges]), perm


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    if not 0 <= p <= 1:
        raise DomainError("p must be in [0, 1]")
    rng = np.random.default_rng(seed)
    if n < 2 or p == 0:
        return Graph(n, [])
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph(n, [(int(u), int(v), 1) for u, v in zip(iu[keep], iv[keep])])


def gen_gnm(n: int, m: int, seed: int) -> Graph:
    max_m = n * (n - 1) // 2
    if not 0 <= m <= max_m:
        raise DomainError(f"m must be in [0, {max_m}]")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    picks = rng.choice(max_m, size=m, replace=False)
    return Graph(n, [(int(iu[i]), int(iv[i]), 1) for i in picks])


def gen_complete(n: int) -> Graph:
    return Graph(n, [(u, v, 1) for u in range(n) for v in range(u + 1, n)])


# ---------------------------------------------------------------------------
# Planted clique families


def clique_union_params(n: int, gamma: float) -> tuple[int, int]:
    """Round n^gamma (clique size) and n^(1-gamma) (count) to a feasible pair."""
    s = max(2, round(n**gamma))
    r = max(1, round(n ** (1 - gamma)))
    if s * r > n:
        r = n // s
    if r < 1:
        raise DomainError(f"clique size {s} exceeds n={n}")
    return s, r


def gen_clique_union_exact(n: int, s: int, r: int, seed: int) -> Graph:
    """r vertex-disjoint s-cliques plus isolated leftovers, vertices permuted."""
    if s * r > n:
        raise DomainError(f"{r} cliques of size {s} need {s * r} > {n} vertices")
    edges = []
    for c in range(r):
        base = c * s
        for i in range(s):
            for j in range(i + 1, s):
                edges.append((base + i, base + j, 1))
    rng = np.random.default_rng(seed)
    g, _ = _permute(n, edges, rng)
    return g


def gen_clique_union(n: int, gamma: float, seed: int) -> Graph:
    s, r = clique_union_params(n, gamma)
    return gen_clique_union_exact(n, s, r, seed)


def hidden_matching_params(n: int, gamma: float) -> tuple[int, int, int]:
    """Feasible (s, r, t) for the degree-preserving hidden-matching family.

    t tracks n^(max(0, 3*gamma - 1)) with a small n^(1/sqrt(ln n)) boost,
    rounded and clamped so 2t <= s and the clique count is even.
    """
    s, r = clique_union_params(n, gamma)
    if r % 2:
        r -= 1
    if r < 2:
        raise DomainError("need at least two cliques to match")
    t = round(n ** (max(0.0, 3 * gamma - 1) + 1 / math.sqrt(math.log(max(3, n)))))
    t = max(1, min(t, s // 2))
    return s, r, t


def gen_hidden_matching_exact(n: int, s: int, r: int, t: int, seed: int) -> Graph:
    """Cliques paired by a hidden perfect matching, degrees all exactly s-1.

    Each matched clique pair gains a random bipartite matching of size 2t;
    inside each touched clique the 2t matched vertices are paired up and t
    clique edges are deleted, preserving every degree.
    """
    if r % 2:
        raise DomainError("clique count must be even")
    if 2 * t > s:
        raise DomainError(f"need 2t <= s, got t={t}, s={s}")
    if s * r > n:
        raise DomainError(f"{r} cliques of size {s} need {s * r} > {n} vertices")
    rng = np.random.default_rng(seed)

    present: set[tuple[int, int]] = set()

    def add(a: int, b: int):
        present.add((a, b) if a < b else (b, a))

    def remove(a: int, b: int):
        present.discard((a, b) if a < b else (b, a))

    groups = [list(range(c * s, (c + 1) * s)) for c in range(r)]
    for grp in groups:
        for i in range(s):
            for j in range(i + 1, s):
                add(grp[i], grp[j])

    order = rng.permutation(r)
    pairs = [(int(order[2 * i]), int(order[2 * i + 1])) for i in range(r // 2)]
    for ci, cj in pairs:
        side_i = [groups[ci][x] for x in rng.choice(s, size=2 * t, replace=False)]
        side_j = [groups[cj][x] for x in rng.choice(s, size=2 * t, replace=False)]
        shuffled = list(rng.permutation(2 * t))
        for a, pick in zip(side_i, shuffled):
            add(a, side_j[pick])
        for side in (side_i, side_j):
            paired = list(rng.permutation(2 * t))
            for x in range(t):
                remove(side[paired[2 * x]], side[paired[2 * x + 1]])

    g, _ = _permute(n, [(u, v, 1) for u, v in present], rng)
    return g


def gen_hidden_matching(n: int, gamma: float, seed: int) -> Graph:
    s, r, t = hidden_matching_params(n, gamma)
    return gen_hidden_matching_exact(n, s, r, t, seed)


# ---------------------------------------------------------------------------
# Two-part biclique family with an exact edge-disjoint tiling


def mpc_biclique_params(n: int, eps: float) -> tuple[int, int, int]:
    """(small biclique size s2, blocks per side b, large clique count r1).

    The large bicliques have size s1 = b * s2 and count r1; the small part
    then has exactly r1 * b bicliques of size s2 on the same number of used
    vertices, and the large part tiles into b subgraphs isomorphic to it.
    """
    s2 = 2 * max(1, round(n ** max(0.0, 1 / 3 - eps) / 2))
    b = max(2, round(n ** (1 / 3)))
    s1 = b * s2
    if s1 > n:
        raise DomainError(f"large biclique size {s1} exceeds n={n}")
    r1 = max(1, round(n ** (1 / 3 + eps)))
    r1 = min(r1, n // s1)
    return s2, b, r1


def gen_mpc_bicliques_exact(
    n: int, s2: int, b: int, r1: int, seed: int
) -> tuple[Graph, list[Graph]]:
    """2n-vertex two-part instance plus the edge-disjoint tiling of part one.

    Part one (first n ids before permutation): r1 bipartite cliques with b
    blocks of s2/2 vertices per side.  Part two: r1*b bipartite cliques of
    size s2.  Tile l pairs left block i with right block (i+l) mod b inside
    every large clique; the b tiles are edge-disjoint, cover part one exactly,
    and each is isomorphic to part two.
    """
    if s2 % 2 or s2 < 2:
        raise DomainError("small biclique size must be even and >= 2")
    s1 = b * s2
    if r1 * s1 > n:
        raise DomainError(f"part one needs {r1 * s1} > {n} vertices")
    half_blk = s2 // 2
    r2 = r1 * b

    tiles_edges: list[list[tuple[int, int, int]]] = [[] for _ in range(b)]
    for c in range(r1):
        base = c * s1
        left = [base + i for i in range(s1 // 2)]
        right = [base + s1 // 2 + i for i in range(s1 // 2)]
        for bi in range(b):
            lblk = left[bi * half_blk : (bi + 1) * half_blk]
            for tile in range(b):
                rblk = right[((bi + tile) % b) * half_blk : (((bi + tile) % b) + 1) * half_blk]
                tiles_edges[tile].extend((a, z, 1) for a in lblk for z in rblk)

    part2_edges = []
    for c in range(r2):
        base = n + c * s2
        for i in range(half_blk):
            for j in range(half_blk):
                part2_edges.append((base + i, base + half_blk + j, 1))

    all_edges = [e for tile in tiles_edges for e in tile] + part2_edges
    rng = np.random.default_rng(seed)
    perm = rng.permutation(2 * n)
    g = Graph(2 * n, [(int(perm[u]), int(perm[v]), w) for u, v, w in all_edges])
    tiles = [
        Graph(2 * n, [(int(perm[u]), int(perm[v]), w) for u, v, w in tile])
        for tile in tiles_edges
    ]
    return g, tiles


def gen_mpc_bicliques(n: int, eps: float, seed: int) -> tuple[Graph, list[Graph]]:
    s2, b, r1 = mpc_biclique_params(n, eps)
    return gen_mpc_bicliques_exact(n, s2, b, r1, seed)


# ---------------------------------------------------------------------------


def balanced_binary_tree_masks(ids: list[int]):
    """Nested-pair form of a balanced binary tree over the given leaf ids."""
    if len(ids) == 1:
        return ids[0]
    half = len(ids) // 2
    return (balanced_binary_tree_masks(ids[:half]), balanced_binary_tree_masks(ids[half:]))
