"""Shared test oracles: brute-force enumerators kept independent of the library paths."""

import random

import numpy as np
import pytest

from subhc.graph import Graph


def enumerate_cut_weights(g: Graph) -> np.ndarray:
    """Cut weight of every mask 0..2^n-1, by direct per-edge crossing checks."""
    n = g.n
    masks = np.arange(1 << n, dtype=np.int64)
    total = np.zeros(1 << n)
    for u, v, w in g.edges:
        cross = ((masks >> u) & 1) != ((masks >> v) & 1)
        total += float(w) * cross
    return total


def proper_cut_masks(n: int) -> np.ndarray:
    """One mask per unordered cut: nonempty masks not containing vertex n-1."""
    return np.arange(1, 1 << (n - 1), dtype=np.int64)


def side_sizes(masks: np.ndarray, n: int) -> np.ndarray:
    sizes = np.zeros(len(masks), dtype=np.int64)
    for v in range(n):
        sizes += ((masks >> v) & 1).astype(np.int64)
    return np.minimum(sizes, n - sizes)


def random_int_graph(rng: random.Random, n: int, p: float = 0.5, wmax: int = 1) -> Graph:
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                w = 1 if wmax == 1 else rng.randint(1, wmax)
                edges.append((u, v, w))
    return Graph(n, edges)


def all_full_binary_trees(ids: tuple):
    """Every full binary tree shape over an ordered leaf set (test-side oracle)."""
    if len(ids) == 1:
        yield ids[0]
        return
    # choose the leaf subset of the left child (containing ids[0] to kill mirror dups)
    rest = ids[1:]
    for pick in range(1 << len(rest)):
        left = (ids[0],) + tuple(r for j, r in enumerate(rest) if (pick >> j) & 1)
        right = tuple(r for j, r in enumerate(rest) if not (pick >> j) & 1)
        if not right:
            continue
        for lt in all_full_binary_trees(left):
            for rt in all_full_binary_trees(right):
                yield (lt, rt)


def brute_force_tree_cost(g: Graph, spec) -> object:
    """Cost of a nested-tuple tree evaluated straight from the definition."""

    def leaves(node):
        if isinstance(node, int):
            return {node}
        return leaves(node[0]) | leaves(node[1])

    def walk(node):
        if isinstance(node, int):
            return 0
        lset, rset = leaves(node[0]), leaves(node[1])
        cross = 0
        for u, v, w in g.edges:
            if (u in lset and v in rset) or (u in rset and v in lset):
                cross = cross + w
        return len(lset | rset) * cross + walk(node[0]) + walk(node[1])

    return walk(spec)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
