"""Additive per-vertex sketches with support sampling, and sparsifier recovery.

Each vertex carries, per weight class, a bank of small integer sketch cells
over its signed edge-incidence vector (entry +1 at pair (u,v) for the smaller
endpoint, -1 for the larger).  The bank is indexed by a geometric
edge-subsampling level and a copy number; each (level, copy) slot is a
support sampler made of (count, index-sum, checksum) cells at geometric
sub-levels.  Everything is linear over the integers: sketches of disjoint
edge sets sum cell-wise to the sketch of the union, and a delete is the exact
inverse of an insert.

Recovery peels spanning forests per subsampling level with supernode
merging (extracted forests are subtracted from the remaining bank through
linearity), assigning weight 2^j to edges first caught at level j.  Edges of
low connectivity are therefore returned exactly, while well-connected mass is
represented by reweighted subsamples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RecoveryFailure
from .graph import Graph
from .prf import fold_base, key_hash, key_hash_vec

CHECK_PRIME = (1 << 61) - 1
_SKETCH_VERSION = 1

# key-domain tags so the different hash roles never collide
_TAG_GRAPH_LEVEL = 3
_TAG_SUBLEVEL = 5
_TAG_CHECK = 7

EMPTY = "empty"
FAIL = "fail"


@dataclass(frozen=True)
class SketchConfig:
    """Shape and seeding of every sketch in one run (shared by all parties)."""

    n: int
    eps: float
    master_seed: int
    c_samplers: float = 4.0
    fail_target_exp: int = 3  # per-sampler failure budget 1/n^fail_target_exp

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("sketching needs n >= 2")
        if self.eps <= 0:
            raise DomainError("eps must be positive")

    @property
    def domain(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def sampler_levels(self) -> int:
        return max(2, math.ceil(math.log2(max(2, self.domain))) + 1)

    @property
    def graph_levels(self) -> int:
        return max(2, math.ceil(math.log2(max(2, self.domain))) + 1)

    @property
    def copies(self) -> int:
        return max(2, math.ceil(self.c_samplers * self.eps**-2 * math.log(max(2, self.n))))

    @property
    def words_per_class(self) -> int:
        return self.graph_levels * self.copies * self.sampler_levels * 3

    def config_hash(self) -> int:
        return key_hash(
            _SKETCH_VERSION,
            self.n,
            self.graph_levels,
            self.copies,
            self.sampler_levels,
            self.master_seed,
            int(self.eps * (1 << 32)),
        )

    # -- pair index helpers ------------------------------------------------

    def pair_index(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return u * self.n - u * (u + 1) // 2 + (v - u - 1)

    def pair_offsets(self) -> np.ndarray:
        u = np.arange(self.n, dtype=np.int64)
        return u * self.n - u * (u + 1) // 2

    def decode_pair(self, idx: int, offsets: np.ndarray) -> tuple[int, int]:
        u = int(np.searchsorted(offsets, idx, side="right")) - 1
        v = idx - int(offsets[u]) + u + 1
        return u, v

    # -- hashing -----------------------------------------------------------

    def graph_level(self, cls: int, idx: int) -> int:
        h = key_hash(self.master_seed, _TAG_GRAPH_LEVEL, cls & 0xFFFF, idx)
        tz = (h & -h).bit_length() - 1 if h else 63
        return min(tz, self.graph_levels - 1)

    def sublevel_matrix(self, cls: int, idx: int, n_levels: int) -> np.ndarray:
        """Sub-level cell index for each (graph level, copy) slot, shape (n_levels, copies)."""
        base = fold_base(self.master_seed, _TAG_SUBLEVEL, cls & 0xFFFF, idx)
        flat = np.arange(n_levels * self.copies, dtype=np.uint64)
        h = key_hash_vec(base, flat)
        tz = np.zeros(len(flat), dtype=np.int64)
        x = h.copy()
        nonzero = x != 0
        # vectorized trailing-zero count
        for shift in (32, 16, 8, 4, 2, 1):
            mask = nonzero & ((x & ((np.uint64(1) << np.uint64(shift)) - np.uint64(1))) == 0)
            tz[mask] += shift
            x[mask] >>= np.uint64(shift)
        tz[~nonzero] = 63
        tz = np.minimum(tz, self.sampler_levels - 1)
        return tz.reshape(n_levels, self.copies)

    def check_value(self, cls: int, idx: int) -> int:
        return key_hash(self.master_seed, _TAG_CHECK, cls & 0xFFFF, idx) % CHECK_PRIME


def weight_class(w) -> int:
    if w <= 0:
        raise DomainError(f"edge weight must be positive, got {w}")
    return math.floor(math.log2(w))


def class_weight(cls: int) -> float:
    return float(2.0**cls)


@dataclass
class VertexSketch:
    """Sketch bank of one vertex: {weight class -> int64 array}.

    Array shape is (graph_levels, copies, sampler_levels, 3) with cell triple
    (count, index-sum, checksum mod CHECK_PRIME).
    """

    vertex: int
    config: SketchConfig
    classes: dict[int, np.ndarray] = field(default_factory=dict)

    def _bank(self, cls: int) -> np.ndarray:
        arr = self.classes.get(cls)
        if arr is None:
            cfg = self.config
            arr = np.zeros(
                (cfg.graph_levels, cfg.copies, cfg.sampler_levels, 3), dtype=np.int64
            )
            self.classes[cls] = arr
        return arr

    def apply(self, other_vertex: int, w, delta: int) -> None:
        """Apply an edge update touching this vertex (delta = +1 insert, -1 delete)."""
        cfg = self.config
        u, v = self.vertex, other_vertex
        sign = 1 if u < v else -1
        coeff = delta * sign
        cls = weight_class(w)
        idx = cfg.pair_index(u, v)
        top = min(cfg.graph_level(cls, idx), cfg.graph_levels - 1)
        n_levels = top + 1
        sub = cfg.sublevel_matrix(cls, idx, n_levels)
        chk = cfg.check_value(cls, idx)
        arr = self._bank(cls)
        levels = np.repeat(np.arange(n_levels, dtype=np.int64), cfg.copies)
        copies = np.tile(np.arange(cfg.copies, dtype=np.int64), n_levels)
        cells = sub.reshape(-1)
        arr[levels, copies, cells, 0] += coeff
        arr[levels, copies, cells, 1] += coeff * idx
        arr[levels, copies, cells, 2] = (
            arr[levels, copies, cells, 2] + coeff * chk
        ) % CHECK_PRIME

    def add(self, other: "VertexSketch") -> "VertexSketch":
        if self.config.config_hash() != other.config.config_hash():
            raise DomainError("cannot add sketches built under different configs")
        out = VertexSketch(self.vertex, self.config)
        for cls in set(self.classes) | set(other.classes):
            a = self.classes.get(cls)
            b = other.classes.get(cls)
            if a is None:
                out.classes[cls] = b.copy()
            elif b is None:
                out.classes[cls] = a.copy()
            else:
                merged = a + b
                merged[..., 2] %= CHECK_PRIME
                out.classes[cls] = merged
        return out

    def word_count(self) -> int:
        return 4 + sum(1 + arr.size for arr in self.classes.values())

    def to_words(self) -> np.ndarray:
        """Little-endian int64 word array: version, config hash, vertex, classes."""
        parts = [
            np.array(
                [
                    _SKETCH_VERSION,
                    self.config.config_hash() >> 1,
                    self.vertex,
                    len(self.classes),
                ],
                dtype=np.int64,
            )
        ]
        for cls in sorted(self.classes):
            parts.append(np.array([cls], dtype=np.int64))
            parts.append(self.classes[cls].reshape(-1))
        words = np.concatenate(parts)
        return words.astype("<i8")

    @classmethod
    def from_words(cls, words: np.ndarray, config: SketchConfig) -> "VertexSketch":
        words = np.asarray(words, dtype=np.int64)
        if int(words[0]) != _SKETCH_VERSION:
            raise DomainError(f"unsupported sketch version {int(words[0])}")
        if int(words[1]) != config.config_hash() >> 1:
            raise DomainError("sketch was built under a different config")
        out = VertexSketch(int(words[2]), config)
        n_classes = int(words[3])
        pos = 4
        shape = (config.graph_levels, config.copies, config.sampler_levels, 3)
        size = config.words_per_class
        for _ in range(n_classes):
            ckey = int(words[pos])
            pos += 1
            out.classes[ckey] = words[pos : pos + size].reshape(shape).copy()
            pos += size
        return out


def sketch_update(sketches: list[VertexSketch], u: int, v: int, w, delta: int) -> None:
    """Apply one edge update to both endpoint sketches."""
    sketches[u].apply(v, w, delta)
    sketches[v].apply(u, w, delta)


def empty_sketches(cfg: SketchConfig) -> list[VertexSketch]:
    return [VertexSketch(v, cfg) for v in range(cfg.n)]


def sketch_graph(g: Graph, cfg: SketchConfig) -> list[VertexSketch]:
    sketches = empty_sketches(cfg)
    for u, v, w in g.edges:
        sketch_update(sketches, u, v, w, +1)
    return sketches


# ---------------------------------------------------------------------------
# Extraction


def l0_extract(cells: np.ndarray, cfg: SketchConfig, cls: int):
    """Extract a support element from one sampler (a (sampler_levels, 3) slice).

    Returns EMPTY for a zero vector, FAIL when no sub-level isolates a single
    element (caller should retry another copy), else (pair index, sign).
    """
    if not cells.any():
        return EMPTY
    for lvl in range(cells.shape[0]):
        c = int(cells[lvl, 0])
        if c == 1 or c == -1:
            idx = int(cells[lvl, 1]) * c
            if 0 <= idx < cfg.domain:
                expect = (c * cfg.check_value(cls, idx)) % CHECK_PRIME
                if int(cells[lvl, 2]) % CHECK_PRIME == expect:
                    return idx, c
    return FAIL


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def recover_sparsifier(sketches: list[VertexSketch], cfg: SketchConfig) -> Graph:
    """Rebuild an approximate-cut graph from per-vertex sketches.

    Consumes only the sketch contents.  Raises RecoveryFailure if forest
    peeling stalls with provably unread mass at the final level.
    """
    if len(sketches) != cfg.n:
        raise DomainError("need one sketch per vertex")
    offsets = cfg.pair_offsets()
    out_edges: list[tuple[int, int, float]] = []
    all_classes = sorted(set().union(*(s.classes.keys() for s in sketches)) if sketches else ())

    for cls in all_classes:
        work = []
        for s in sketches:
            arr = s.classes.get(cls)
            work.append(arr.copy() if arr is not None else None)
        caught: dict[int, int] = {}

        for j in range(cfg.graph_levels):
            copy_ptr = 0
            while copy_ptr < cfg.copies:
                forest = _peel_forest(work, cfg, cls, j, copy_ptr)
                copy_ptr = forest.next_copy
                if forest.edges:
                    for idx in forest.edges:
                        if idx in caught:
                            continue
                        caught[idx] = j
                        _subtract_edge(work, cfg, cls, idx, from_level=j)
                elif not _residual_nonzero(work, j):
                    break  # level fully peeled
                # else: residual mass but a barren copy; retry with the next one
            else:
                # Copy pool exhausted; leftover mass at the final level is a stall.
                if j == cfg.graph_levels - 1 and _residual_nonzero(work, j):
                    raise RecoveryFailure(
                        f"forest peeling stalled at level {j} (class {cls})"
                    )

        scale = class_weight(cls)
        for idx, j in sorted(caught.items()):
            u, v = cfg.decode_pair(idx, offsets)
            out_edges.append((u, v, scale * float(2**j)))

    return Graph(cfg.n, out_edges)


class _ForestResult:
    __slots__ = ("edges", "next_copy")

    def __init__(self, edges, next_copy):
        self.edges = edges
        self.next_copy = next_copy


def _peel_forest(work, cfg: SketchConfig, cls: int, j: int, copy_start: int) -> _ForestResult:
    """One spanning-forest pass at subsample level j, consuming copies from copy_start."""
    n = cfg.n
    dsu = _DSU(n)
    acc: dict[int, np.ndarray] = {}
    for v in range(n):
        arr = work[v]
        acc[v] = arr[j] if arr is not None else None
    offsets = cfg.pair_offsets()
    forest_edges: list[int] = []
    copy_ptr = copy_start
    while copy_ptr < cfg.copies:
        roots = {dsu.find(v) for v in range(n)}
        if len(roots) == 1:
            break
        grew = False
        for root in sorted(roots):
            bank = acc[root]
            if bank is None:
                continue
            got = l0_extract(bank[copy_ptr], cfg, cls)
            if got in (EMPTY, FAIL):
                continue
            idx, _sign = got
            u, v = cfg.decode_pair(idx, offsets)
            ru, rv = dsu.find(u), dsu.find(v)
            if ru == rv:
                continue
            dsu.union(ru, rv)
            new_root = dsu.find(ru)
            a, b = acc[ru], acc[rv]
            if a is None:
                acc[new_root] = b
            elif b is None:
                acc[new_root] = a
            else:
                merged = a + b
                merged[..., 2] %= CHECK_PRIME
                acc[new_root] = merged
            forest_edges.append(idx)
            grew = True
        copy_ptr += 1
        if not grew:
            break
    return _ForestResult(forest_edges, copy_ptr)


def _subtract_edge(work, cfg: SketchConfig, cls: int, idx: int, from_level: int) -> None:
    """Remove a recovered edge from every remaining copy at levels >= from_level."""
    top = min(cfg.graph_level(cls, idx), cfg.graph_levels - 1)
    if top < from_level:
        return
    offsets = cfg.pair_offsets()
    u, v = cfg.decode_pair(idx, offsets)
    chk = cfg.check_value(cls, idx)
    sub = cfg.sublevel_matrix(cls, idx, top + 1)
    for vertex, sign in ((u, 1), (v, -1)):
        arr = work[vertex]
        if arr is None:
            continue
        for j in range(from_level, top + 1):
            cells = sub[j]
            copies = np.arange(cfg.copies, dtype=np.int64)
            arr[j, copies, cells, 0] -= sign
            arr[j, copies, cells, 1] -= sign * idx
            arr[j, copies, cells, 2] = (arr[j, copies, cells, 2] - sign * chk) % CHECK_PRIME


def _residual_nonzero(work, j: int) -> bool:
    return any(arr is not None and arr[j].any() for arr in work)
