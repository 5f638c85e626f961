"""Relaxed cut sparsification through the query oracle.

The construction overlays a low-degree union of random Hamiltonian cycles
(with edge weight delta) on the input graph, which pins every edge's
sampling score to a simple function of the two endpoint "effective degrees"
d(u) + delta*d_x(u).  Edges of the composite graph are then importance-sampled
by rejection: pick a uniform vertex, flip a coin biased by the input-versus
-overlay share of its effective degree, and take a uniform incident edge on
the chosen side.  Repeating q times and crediting w_e/(q p_e) per hit yields,
with high probability, a graph whose every cut matches the input up to a
(1 +- eps) factor plus an additive band proportional to delta times the small
side of the cut.

All sampling randomness is a pure function of (seed, sample index), so output
is bit-identical for any batching or worker count.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .graph import Graph
from .prf import derive_seed, fold_base, key_hash, key_hash_vec, uniform01_vec

Q_CAP = 1 << 40  # keeps q * max(1/p_e) far from float overflow


@dataclass(frozen=True)
class SparsifyPlan:
    """All knobs of the relaxed sparsifier.

    eps_prime and sample_count are derived per instance size; the constants
    c1, c2 and the overlay degree are calibration knobs (the interesting
    regimes only pin them up to constants).
    """

    eps: float
    delta: float
    c1: float = 1.0
    c2: float = 2.0
    expander_degree: int = 16
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.eps <= 0.5:
            raise DomainError(f"eps must be in (0, 1/2], got {self.eps}")
        if not 0 < self.delta <= 1:
            raise DomainError(f"delta must be in (0, 1], got {self.delta}")
        if self.expander_degree < 2 or self.expander_degree % 2:
            raise DomainError("expander degree must be even and >= 2")
        if self.c1 <= 0 or self.c2 <= 0:
            raise DomainError("constants c1, c2 must be positive")

    def eps_prime(self, n: int) -> float:
        return self.eps * math.sqrt(self.delta / (self.c1 * math.log(max(2, n))))

    def sample_count(self, n: int) -> int:
        q = math.ceil(self.c2 * n * math.log(max(2, n)) / self.eps_prime(n) ** 2)
        return min(max(q, n), Q_CAP)


@dataclass(frozen=True)
class EdgeSample:
    u: int
    v: int
    source: str  # "input" | "expander"
    probability: float
    increment: float


class ExpanderGraph:
    """Union of d/2 random Hamiltonian cycles: exactly d-regular, connected.

    Parallel cycle edges are kept with multiplicity so every vertex has
    exactly d incident slots.
    """

    __slots__ = ("n", "d", "cycles", "edges", "incident")

    def __init__(self, n: int, d: int, cycles: tuple):
        self.n = n
        self.d = d
        self.cycles = cycles
        edges = []
        incident = np.empty((n, d), dtype=np.int64)
        for c, perm in enumerate(cycles):
            for i in range(n):
                a, b = int(perm[i]), int(perm[(i + 1) % n])
                edges.append((a, b) if a < b else (b, a))
                incident[a, 2 * c] = b
                incident[b, 2 * c + 1] = a
        self.edges = tuple(sorted(edges))
        self.incident = incident

    def degree(self, v: int) -> int:
        return self.d

    def multiplicity(self) -> Counter:
        return Counter(self.edges)


def build_expander(n: int, d: int, seed: int) -> ExpanderGraph:
    if n < 3:
        raise DomainError("overlay construction needs n >= 3")
    if d < 2 or d % 2:
        raise DomainError("overlay degree must be even and >= 2")
    rng = np.random.default_rng(seed)
    cycles = tuple(rng.permutation(n) for _ in range(d // 2))
    return ExpanderGraph(n, d, cycles)


# ---------------------------------------------------------------------------
# Sampling distributions


def effective_degrees(degrees, delta, d: int):
    """Per-vertex d(v) + delta * d, the denominator of every sampling score."""
    if isinstance(delta, Fraction):
        return [Fraction(int(x)) + delta * d for x in degrees]
    return np.asarray(degrees, dtype=np.float64) + float(delta) * d


def edge_sampling_distribution(g: Graph, x: ExpanderGraph, delta):
    """Explicit support of the composite sampling distribution.

    Returns (u, v, source, w, p) rows, one per edge copy (overlay copies stay
    separate).  With a Fraction delta and integer degrees the probabilities
    are exact and sum to 1 exactly.
    """
    if g.n != x.n:
        raise DomainError("graph and overlay sizes differ")
    n = g.n
    degs = [g.degree(v) for v in range(n)]
    if isinstance(delta, Fraction):
        eff = [Fraction(degs[v]) + delta * x.d for v in range(n)]

        def score(u, v):
            return Fraction(1, n) * (1 / eff[u] + 1 / eff[v])

    else:
        eff = [degs[v] + delta * x.d for v in range(n)]

        def score(u, v):
            return (1.0 / eff[u] + 1.0 / eff[v]) / n

    rows = []
    for u, v, w in g.edges:
        rows.append((u, v, "input", w, w * score(u, v)))
    for u, v in x.edges:
        rows.append((u, v, "expander", delta, delta * score(u, v)))
    return rows


class ExplicitEdgeSampler:
    """Inverse-CDF sampler over an explicit edge list with probabilities."""

    def __init__(self, n: int, rows):
        self.n = n
        self.rows = list(rows)
        total = sum(float(p) for *_, p in self.rows)
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"sampling probabilities sum to {total}, expected 1")
        if any(float(p) <= 0 for *_, p in self.rows):
            raise DomainError("zero-probability entries are not sampleable")
        self._cdf = np.cumsum([float(p) for *_, p in self.rows])
        self._cdf[-1] = 1.0

    def sample_counts(self, seed: int, lo: int, hi: int) -> Counter:
        idx = np.arange(lo, hi, dtype=np.uint64)
        u01 = uniform01_vec(fold_base(seed, 1), idx)
        picks = np.searchsorted(self._cdf, u01, side="right")
        counts: Counter = Counter()
        for pick, cnt in zip(*np.unique(picks, return_counts=True)):
            u, v, source, _, _ = self.rows[int(pick)]
            counts[(u, v, source)] += int(cnt)
        return counts

    def increment(self, key, q: int) -> float:
        # Parallel copies of one overlay pair share (w, p), so summing their
        # per-copy increments equals count * the shared increment.
        u, v, source = key
        w = p = None
        for ru, rv, rsource, rw, rp in self.rows:
            if (ru, rv, rsource) == (u, v, source):
                w, p = rw, rp
                break
        return float(w) / (q * float(p))


class RejectionSampler:
    """Samples composite edges through the oracle without enumerating them.

    Vertex degrees are prefetched once (charged n queries); afterwards each
    input-edge sample costs exactly one neighbor query and overlay samples
    cost none.
    """

    def __init__(self, oracle, expander: ExpanderGraph, delta: float, degrees=None):
        self.oracle = oracle
        self.x = expander
        self.delta = float(delta)
        self.n = oracle.n
        self.degrees = (
            np.asarray(degrees, dtype=np.int64)
            if degrees is not None
            else oracle.degree_batch()
        )
        self.eff = self.degrees + self.delta * expander.d
        self.bias = np.where(self.eff > 0, self.degrees / self.eff, 0.0)
        self._inv_eff = 1.0 / self.eff

    def pair_probability(self, u: int, v: int, source: str) -> float:
        w = 1.0 if source == "input" else self.delta
        return (w / self.n) * (self._inv_eff[u] + self._inv_eff[v])

    def sample_counts(self, seed: int, lo: int, hi: int) -> Counter:
        idx = np.arange(lo, hi, dtype=np.uint64)
        us = (key_hash_vec(fold_base(seed, 1), idx) % np.uint64(self.n)).astype(np.int64)
        coin = uniform01_vec(fold_base(seed, 2), idx)
        heads = coin < self.bias[us]
        slots = key_hash_vec(fold_base(seed, 3), idx)

        counts: Counter = Counter()
        hu = us[heads]
        if len(hu):
            hslot = (slots[heads] % self.degrees[hu].astype(np.uint64)).astype(np.int64)
            hv = self.oracle.neighbor_batch(hu, hslot + 1)
            a = np.minimum(hu, hv)
            b = np.maximum(hu, hv)
            pairs, cnts = np.unique(np.stack([a, b], axis=1), axis=0, return_counts=True)
            for (pa, pb), c in zip(pairs, cnts):
                counts[(int(pa), int(pb), "input")] += int(c)
        tu = us[~heads]
        if len(tu):
            tslot = (slots[~heads] % np.uint64(self.x.d)).astype(np.int64)
            tv = self.x.incident[tu, tslot]
            a = np.minimum(tu, tv)
            b = np.maximum(tu, tv)
            pairs, cnts = np.unique(np.stack([a, b], axis=1), axis=0, return_counts=True)
            for (pa, pb), c in zip(pairs, cnts):
                counts[(int(pa), int(pb), "expander")] += int(c)
        return counts

    def increment(self, key, q: int) -> float:
        u, v, source = key
        w = 1.0 if source == "input" else self.delta
        return w / (q * self.pair_probability(u, v, source))


def rejection_sample_edge(sampler: RejectionSampler, seed: int, index: int) -> EdgeSample:
    """Draw the single sample assigned to (seed, index).

    Matches the batched path bit for bit; exposed for frequency tests and
    instrumentation.
    """
    n = sampler.n
    u = key_hash(seed, 1, index) % n
    coin = (key_hash(seed, 2, index) >> 11) * 2.0**-53
    slot_bits = key_hash(seed, 3, index)
    if coin < sampler.bias[u]:
        slot = slot_bits % int(sampler.degrees[u])
        v, _ = sampler.oracle.neighbor_query(u, slot + 1)
        source = "input"
    else:
        slot = slot_bits % sampler.x.d
        v = int(sampler.x.incident[u, slot])
        source = "expander"
    a, b = (u, v) if u < v else (v, u)
    p = sampler.pair_probability(a, b, source)
    return EdgeSample(a, b, source, p, 0.0 if p == 0 else (1.0 if source == "input" else sampler.delta) / p)


def sparsify_core(sampler, q: int, seed: int, workers: int = 1) -> Graph:
    """Run q importance-sampling draws and merge hits into a weighted graph.

    Samples are pre-assigned to workers by index, and per-pair weights are
    count * increment with the multiplication done once, so the output is
    bit-identical for any worker count.
    """
    if q < 1:
        raise DomainError("sample count must be >= 1")
    workers = max(1, int(workers))
    bounds = [q * i // workers for i in range(workers + 1)]
    total: Counter = Counter()
    if workers == 1:
        total = sampler.sample_counts(seed, 0, q)
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(sampler.sample_counts, seed, bounds[i], bounds[i + 1])
                for i in range(workers)
            ]
            for f in futs:
                total.update(f.result())
    edges = [
        (u, v, cnt * sampler.increment((u, v, source), q))
        for (u, v, source), cnt in sorted(total.items())
    ]
    return Graph(sampler.n, edges)


# ---------------------------------------------------------------------------
# The full query-model constructions


def eps_delta_sparsify(oracle, plan: SparsifyPlan, workers: int = 1) -> Graph:
    """Build the relaxed sparsifier of the graph behind an unweighted oracle.

    Query cost: one batch of n degree queries plus at most one neighbor query
    per sample, so ledger growth is bounded by 3 q + n.
    """
    n = oracle.n
    if n < 3:
        raise DomainError("sparsification needs n >= 3")
    x = build_expander(n, plan.expander_degree, derive_seed(plan.seed, 0xE0))
    sampler = RejectionSampler(oracle, x, plan.delta)
    q = plan.sample_count(n)
    return sparsify_core(sampler, q, derive_seed(plan.seed, 0x5A), workers=workers)


@dataclass(frozen=True)
class DeltaChoice:
    delta: float
    read_all: bool


def pick_delta_for_hc(n: int, m: int, eps: float) -> DeltaChoice:
    """Additive-error budget for clustering: eps * (cost lower bound) / n^2.

    Sparse inputs (m <= n^(4/3), where the budget would be tiny anyway) are
    flagged for the read-everything branch instead.
    """
    if n < 1:
        raise DomainError("need at least one vertex")
    delta = eps * 4 * m * m / (3 * n**3)
    read_all = m <= n ** (4.0 / 3.0) or delta == 0
    return DeltaChoice(min(1.0, delta), read_all)


class _ClassOracle:
    """Unweighted oracle view of one weight class of a weight-sorted oracle.

    Neighbor slots are offsets into the base adjacency ranges found by binary
    search, so every query here is charged to the base ledger.
    """

    def __init__(self, base, lo: np.ndarray, hi: np.ndarray):
        self.base = base
        self.n = base.n
        self._lo = lo
        self._deg = np.maximum(hi - lo + 1, 0).astype(np.int64)

    def degree_batch(self) -> np.ndarray:
        # Degrees are already known from the binary searches; the base oracle
        # was charged there, so no extra charge.
        return self._deg.copy()

    def neighbor_batch(self, vs: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return self.base.neighbor_batch(vs, self._lo[vs] + idx - 1)

    def neighbor_query(self, v: int, i: int):
        return self.base.neighbor_query(v, int(self._lo[v]) + i - 1)


def weighted_sparsify(
    oracle,
    eps: float,
    seed: int,
    c1: float = 1.0,
    c2: float = 2.0,
    expander_degree: int = 16,
    workers: int = 1,
) -> Graph:
    """Sparsify a weighted graph via geometric weight classes.

    Edges are split into classes [(1+eps)^(i-1), (1+eps)^i).  A class that is
    sparse (fewer than n^(4/3) edges) is read in full at exact weights; a
    dense class is sparsified as an unweighted graph with a class-specific
    additive budget and scaled by the class floor (1+eps)^(i-1).  Requires the
    weight-sorted oracle variant and weights >= 1.
    """
    from .access import weight_class_bounds

    if not 0 < eps <= 1 / 3:
        raise DomainError(f"eps must be in (0, 1/3], got {eps}")
    if not getattr(oracle, "weight_sorted", False):
        raise DomainError("weighted sparsification requires a weight-sorted oracle")
    n = oracle.n
    degrees = oracle.degree_batch()

    w_max = 1.0
    for v in range(n):
        if degrees[v] == 0:
            continue
        _, w_first = oracle.neighbor_query(v, 1)
        if w_first < 1:
            raise DomainError(f"edge weight {w_first} < 1 at vertex {v}")
        _, w_last = oracle.neighbor_query(v, int(degrees[v]))
        w_max = max(w_max, float(w_last))

    n_classes = max(1, math.floor(math.log(w_max) / math.log(1 + eps)) + 1)
    parts: list[Graph] = []
    for i in range(1, n_classes + 1):
        lo = np.zeros(n, dtype=np.int64)
        hi = np.zeros(n, dtype=np.int64)
        for v in range(n):
            if degrees[v] == 0:
                lo[v], hi[v] = 1, 0
            else:
                lo[v], hi[v] = weight_class_bounds(oracle, v, i, eps)
        m_i = int(np.maximum(hi - lo + 1, 0).sum()) // 2
        if m_i == 0:
            continue
        alpha = m_i / n ** (4.0 / 3.0)
        if alpha <= 1:
            # Sparse class: read it in full at exact weights.
            edges = []
            for v in range(n):
                for slot in range(int(lo[v]), int(hi[v]) + 1):
                    u, w = oracle.neighbor_query(v, slot)
                    if v < u:
                        edges.append((v, u, w))
            parts.append(Graph(n, edges))
        else:
            delta_i = eps * min(alpha * alpha / n ** (1.0 / 3.0), 1.0)
            plan = SparsifyPlan(
                eps=eps,
                delta=delta_i,
                c1=c1,
                c2=c2,
                expander_degree=expander_degree,
                seed=derive_seed(seed, i),
            )
            view = _ClassOracle(oracle, lo, hi)
            x = build_expander(n, plan.expander_degree, derive_seed(plan.seed, 0xE0))
            sampler = RejectionSampler(view, x, plan.delta, degrees=view.degree_batch())
            part = sparsify_core(
                sampler, plan.sample_count(n), derive_seed(plan.seed, 0x5A), workers=workers
            )
            scale = (1 + eps) ** (i - 1)
            parts.append(Graph(n, [(u, v, w * scale) for u, v, w in part.edges]))

    merged: list = []
    for part in parts:
        merged.extend(part.edges)
    return Graph(n, merged)


def class_additive_budget(n: int, eps: float, class_sizes: dict[int, int]) -> float:
    """Sum over dense classes of (class scale) * (class additive budget)."""
    total = 0.0
    for i, m_i in class_sizes.items():
        alpha = m_i / n ** (4.0 / 3.0)
        if alpha > 1:
            total += (1 + eps) ** (i - 1) * eps * min(alpha * alpha / n ** (1.0 / 3.0), 1.0)
    return total
