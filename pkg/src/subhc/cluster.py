"""Hierarchical clustering solvers.

recursive_hc splits the vertex set top-down with a pluggable cut oracle; the
default oracle is a balance-constrained Fiedler sweep.  exact_hc is a
subset-DP ground-truth solver for small instances.  hc_via_sparsifier wires
the query-model sparsifier in front of the recursive solver and reports
resource usage.
"""

from __future__ import annotations

import math

import numpy as np

from .access import QueryOracle, ResourceLedger
from .errors import DomainError, OracleContractError
from .graph import (
    Graph,
    HCNode,
    HCTree,
    cost_edge_form,
    mask_to_ids,
)
from .prf import derive_seed, uniform01
from .sparsify import SparsifyPlan, eps_delta_sparsify, pick_delta_for_hc

# Pipeline-grade sampling constants: the clustering objective only needs the
# aggregate cost band, which tolerates a much lighter sample count than the
# per-cut guarantee; calibrated so dense instances stay comfortably sublinear.
PIPELINE_C1 = 0.25
PIPELINE_C2 = 0.5
PIPELINE_EXPANDER_DEGREE = 2


class CutOracle:
    """Optional wrapper tagging a cut strategy with its approximation factor.

    Any bare callable Graph -> mask works wherever an oracle is accepted; this
    wrapper only carries the informational phi tag along.
    """

    def __init__(self, fn, phi: float | None = None, name: str = ""):
        self.fn = fn
        self.phi = phi
        self.name = name or getattr(fn, "__name__", "oracle")

    def __call__(self, g: Graph) -> int:
        return self.fn(g)


def _fiedler_vector(g: Graph) -> np.ndarray:
    """Second eigenvector direction of the normalized Laplacian.

    Power iteration on 2I - L_norm with the trivial eigenvector projected
    out; deterministic start vector derived from vertex ids; iteration cap
    500, tolerance 1e-8.
    """
    n = g.n
    a = np.zeros((n, n))
    for u, v, w in g.edges:
        fw = float(w)
        a[u, v] += fw
        a[v, u] += fw
    deg = a.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.maximum(deg, 1e-300)), 0.0)
    top = np.sqrt(np.maximum(deg, 0.0))
    norm = np.linalg.norm(top)
    if norm > 0:
        top = top / norm

    x = np.array([uniform01(0xF1ED, v) - 0.5 for v in range(n)])
    x -= top * (top @ x)
    nx = np.linalg.norm(x)
    x = x / nx if nx > 0 else np.ones(n) / math.sqrt(n)

    for _ in range(500):
        # y = (2I - L_norm) x = x + D^{-1/2} A D^{-1/2} x
        y = x + inv_sqrt * (a @ (inv_sqrt * x))
        y -= top * (top @ y)
        ny = np.linalg.norm(y)
        if ny == 0:
            break
        y /= ny
        if np.linalg.norm(y - x) < 1e-8:
            x = y
            break
        x = y
    return inv_sqrt * x  # back to the vertex domain


def _components(g: Graph) -> list[int]:
    comp = [-1] * g.n
    c = 0
    for s in range(g.n):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = c
        while stack:
            v = stack.pop()
            for u, _ in g.adjacency(v):
                if comp[u] < 0:
                    comp[u] = c
                    stack.append(u)
        c += 1
    return comp


def spectral_bisect(g: Graph) -> int:
    """Balanced bipartition of g's vertices, returned as a bitmask of one side.

    Disconnected inputs are split along component boundaries, grouping
    components as close to half the vertices as possible.  Connected inputs
    are split by a Fiedler-order sweep restricted to positions in
    [|S|/3, 2|S|/3], taking the cut minimizing w(A,B)/(|A||B|); ties prefer
    the lexicographically smallest mask.
    """
    n = g.n
    if n < 2:
        raise DomainError("cannot bisect fewer than two vertices")
    if n == 2:
        return 1

    comp = _components(g)
    n_comp = max(comp) + 1
    if n_comp > 1:
        sizes = [0] * n_comp
        for v in range(n):
            sizes[comp[v]] += 1
        order = sorted(range(n_comp), key=lambda c: (-sizes[c], c))
        chosen: set[int] = set()
        acc = 0
        for c in order:
            if acc + sizes[c] <= n // 2 or acc == 0:
                chosen.add(c)
                acc += sizes[c]
            if acc >= n // 2:
                break
        mask = 0
        for v in range(n):
            if comp[v] in chosen:
                mask |= 1 << v
        return mask

    order = np.argsort(_fiedler_vector(g), kind="stable")
    lo = max(1, math.ceil(n / 3))
    hi = min(n - 1, math.floor(2 * n / 3))
    if lo > hi:
        lo = hi = n // 2

    prefix_masks = []
    mask = 0
    for k in range(hi):
        mask |= 1 << int(order[k])
        prefix_masks.append(mask)

    best = None
    for k in range(lo, hi + 1):
        side = prefix_masks[k - 1]
        cutw = 0.0
        for u, v, w in g.edges:
            if ((side >> u) & 1) != ((side >> v) & 1):
                cutw += float(w)
        ratio = cutw / (k * (n - k))
        cand_mask = min(side, ((1 << n) - 1) ^ side)
        key = (ratio, cand_mask)
        if best is None or key < best[0]:
            best = (key, cand_mask)
    return best[1]


def recursive_hc(g: Graph, oracle=spectral_bisect) -> HCTree:
    """Top-down clustering: recursively split with the cut oracle.

    The oracle receives each induced subgraph (relabeled 0..k-1) and must
    return a proper bipartition mask; anything else is a contract violation.
    """
    if g.n < 1:
        raise DomainError("need at least one vertex")

    def build(mask: int) -> HCNode:
        ids = mask_to_ids(mask)
        k = len(ids)
        if k == 1:
            return HCNode(mask, 1, vertex=ids[0])
        if k == 2:
            left = HCNode(1 << ids[0], 1, vertex=ids[0])
            right = HCNode(1 << ids[1], 1, vertex=ids[1])
            return HCNode(mask, 2, left, right)
        sub, sub_ids = g.induced(mask)
        split = oracle(sub)
        if not isinstance(split, int) or split <= 0 or split >= (1 << k) - 1 or split & ~((1 << k) - 1):
            raise OracleContractError(
                f"cut oracle returned improper split {split!r} on {k} vertices"
            )
        left_mask = 0
        for i in range(k):
            if (split >> i) & 1:
                left_mask |= 1 << sub_ids[i]
        left = build(left_mask)
        right = build(mask ^ left_mask)
        return HCNode(mask, k, left, right)

    return HCTree(g.n, build((1 << g.n) - 1))


# ---------------------------------------------------------------------------
# Exact solver (subset DP)

EXACT_HC_MAX_N = 14


def _all_cut_weights(g: Graph) -> list:
    """cut weight of every vertex subset, indexed by bitmask (exact arithmetic)."""
    n = g.n
    cutw = [0] * (1 << n)
    nbr_masks = [0] * n
    nbr_w: list[dict[int, object]] = [dict(g.adjacency(v)) for v in range(n)]
    for v in range(n):
        for u, _ in g.adjacency(v):
            nbr_masks[v] |= 1 << u
    wdeg = [g.weighted_degree(v) for v in range(n)]
    for mask in range(1, 1 << n):
        v = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << v)
        inside = nbr_masks[v] & rest
        w_in = 0
        m = inside
        while m:
            u = (m & -m).bit_length() - 1
            w_in = w_in + nbr_w[v][u]
            m ^= 1 << u
        cutw[mask] = cutw[rest] + wdeg[v] - 2 * w_in
    return cutw


def exact_hc(g: Graph) -> tuple[HCTree, object]:
    """Provably optimal hierarchy by dynamic programming over vertex subsets.

    Exponential: refuses n > 14.  Ties are broken toward the lexicographically
    smallest left-side bitmask.
    """
    n = g.n
    if n > EXACT_HC_MAX_N:
        raise DomainError(f"exact solver is limited to n <= {EXACT_HC_MAX_N}")
    if n < 1:
        raise DomainError("need at least one vertex")
    cutw = _all_cut_weights(g)
    full = (1 << n) - 1
    size = [bin(m).count("1") for m in range(1 << n)]
    opt: list = [0] * (1 << n)
    choice = [0] * (1 << n)

    masks_by_size: list[list[int]] = [[] for _ in range(n + 1)]
    for m in range(1, 1 << n):
        masks_by_size[size[m]].append(m)

    for s in range(2, n + 1):
        for mask in masks_by_size[s]:
            anchor = mask & -mask
            best_cost = None
            best_sub = None
            sub = (mask - 1) & mask
            # enumerate submasks containing the anchor bit (half the bipartitions)
            while sub:
                if sub & anchor:
                    rest = mask ^ sub
                    if rest:
                        cross = cutw[sub] + cutw[rest] - cutw[mask]
                        if isinstance(cross, int):
                            cross //= 2
                        else:
                            cross = cross / 2
                        cost = s * cross + opt[sub] + opt[rest]
                        if (
                            best_cost is None
                            or cost < best_cost
                            or (cost == best_cost and min(sub, rest) < best_sub)
                        ):
                            best_cost = cost
                            best_sub = min(sub, rest)
                sub = (sub - 1) & mask
            opt[mask] = best_cost
            choice[mask] = best_sub

    def build(mask: int) -> HCNode:
        if size[mask] == 1:
            return HCNode(mask, 1, vertex=mask.bit_length() - 1)
        left = build(choice[mask])
        right = build(mask ^ choice[mask])
        return HCNode(mask, size[mask], left, right)

    tree = HCTree(n, build(full)) if n > 1 else HCTree(1, HCNode(1, 1, vertex=0))
    return tree, opt[full]


# ---------------------------------------------------------------------------
# Query-model pipeline


def hc_via_sparsifier(
    source,
    eps: float,
    oracle=spectral_bisect,
    seed: int = 0,
    m_known: int | None = None,
    workers: int = 1,
) -> tuple[HCTree, dict]:
    """Cluster through the relaxed sparsifier, with resource accounting.

    ``source`` may be a Graph (an oracle is wrapped around it and the original
    cost is evaluated for the report) or a QueryOracle (cost_original is then
    unavailable).  Sparse inputs are read in full; dense inputs are sparsified
    with the additive budget tied to the cost lower bound.
    """
    if isinstance(source, Graph):
        ledger = ResourceLedger()
        q_oracle = QueryOracle(source, ledger=ledger)
        backing: Graph | None = source
    else:
        q_oracle = source
        ledger = q_oracle.ledger
        backing = None

    n = q_oracle.n
    if m_known is not None:
        m = m_known
    else:
        m = int(q_oracle.degree_batch().sum()) // 2

    choice = pick_delta_for_hc(n, m, eps)
    if choice.read_all:
        g_tilde = Graph(n, q_oracle.dump_edges())
        q = 0
    else:
        plan = SparsifyPlan(
            eps=eps,
            delta=choice.delta,
            c1=PIPELINE_C1,
            c2=PIPELINE_C2,
            expander_degree=PIPELINE_EXPANDER_DEGREE,
            seed=derive_seed(seed, 0x4C),
        )
        g_tilde = eps_delta_sparsify(q_oracle, plan, workers=workers)
        q = plan.sample_count(n)

    tree = recursive_hc(g_tilde, oracle) if n >= 1 else None
    cost_sparse = cost_edge_form(g_tilde, tree)
    report = {
        "n": n,
        "m": m,
        "eps": eps,
        "delta": 0.0 if choice.read_all else choice.delta,
        "read_all": choice.read_all,
        "q": q,
        "queries": ledger.query_count,
        "sparsifier_edges": g_tilde.m,
        "cost_sparsifier": float(cost_sparse),
        "cost_original": None,
        "ratio": None,
    }
    if backing is not None:
        cost_orig = cost_edge_form(backing, tree)
        report["cost_original"] = float(cost_orig)
        if cost_orig > 0:
            report["ratio"] = float(cost_sparse) / float(cost_orig)
    return tree, report
