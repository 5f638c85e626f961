"""Query-model oracle and dynamic-stream event source.

Sublinear algorithms touch the input only through :class:`QueryOracle`
(degree and i-th-neighbor queries, each charged to a ledger) or through a
one-shot stream of :class:`StreamEvent`.  The backing graph is held in a
name-mangled attribute so client code has no direct path to the edge list.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import DomainError, StreamFormatError
from .graph import Graph, Weight


@dataclass
class ResourceLedger:
    """Monotone resource counters; never reset mid-run."""

    query_count: int = 0
    stream_words: int = 0
    peak_stream_words: int = 0
    rounds: int = 0
    sent_words: dict = field(default_factory=dict)
    received_words: dict = field(default_factory=dict)

    def charge_queries(self, k: int = 1) -> None:
        self.query_count += k

    def charge_stream_words(self, words: int) -> None:
        self.stream_words += words
        self.peak_stream_words = max(self.peak_stream_words, self.stream_words)


class QueryOracle:
    """Degree/neighbor query access to a hidden graph, with exact accounting.

    In the weight-sorted variant, each adjacency list is ordered by
    non-decreasing edge weight (ties broken by ascending neighbor id) and
    neighbor queries also return the connecting weight.  Queries are counted
    atomically, so concurrent readers are safe.
    """

    def __init__(self, graph: Graph, weight_sorted: bool = False, ledger: ResourceLedger | None = None):
        self.__graph = graph
        self.n = graph.n
        self.weight_sorted = weight_sorted
        self.ledger = ledger if ledger is not None else ResourceLedger()
        self._lock = threading.Lock()
        # Flat adjacency arrays for cheap slot lookups.
        order = []
        offsets = [0]
        for v in range(graph.n):
            inc = graph.adjacency(v)
            if weight_sorted:
                inc = sorted(inc, key=lambda nw: (nw[1], nw[0]))
            order.extend(inc)
            offsets.append(len(order))
        self._nbr = np.array([u for u, _ in order], dtype=np.int64)
        self._wts = [w for _, w in order]
        self._off = np.array(offsets, dtype=np.int64)

    @property
    def m(self) -> int:
        return (len(self._nbr)) // 2

    def _charge(self, k: int = 1) -> None:
        with self._lock:
            self.ledger.charge_queries(k)

    def degree_query(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise DomainError(f"vertex id {v} out of range")
        self._charge()
        return int(self._off[v + 1] - self._off[v])

    def neighbor_query(self, v: int, i: int) -> tuple[int, Weight]:
        """The i-th neighbor (1-based) of v and the connecting weight."""
        if not 0 <= v < self.n:
            raise DomainError(f"vertex id {v} out of range")
        deg = int(self._off[v + 1] - self._off[v])
        if not 1 <= i <= deg:
            raise DomainError(f"neighbor index {i} out of range 1..{deg} at vertex {v}")
        self._charge()
        slot = int(self._off[v]) + i - 1
        return int(self._nbr[slot]), self._wts[slot]

    def degree_batch(self) -> np.ndarray:
        """All vertex degrees in one prefetch, charged as n queries."""
        self._charge(self.n)
        return (self._off[1:] - self._off[:-1]).copy()

    def neighbor_batch(self, vs: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Vectorized neighbor queries (1-based idx), charged one per entry."""
        if len(vs) == 0:
            return np.zeros(0, dtype=np.int64)
        if np.any(idx < 1) or np.any(idx > self._off[vs + 1] - self._off[vs]):
            raise DomainError("neighbor index out of range in batch query")
        self._charge(len(vs))
        return self._nbr[self._off[vs] + idx - 1]

    def dump_edges(self) -> list[tuple[int, int, Weight]]:
        """Bulk read of the whole graph for the read-everything branch.

        Charged as exactly one query per edge: each edge is surfaced once.
        """
        self._charge(self.m)
        return list(self.__graph.edges)


def weight_class_bounds(o: QueryOracle, v: int, i: int, eps: float) -> tuple[int, int]:
    """1-based index range of v's neighbors with weight in [(1+eps)^(i-1), (1+eps)^i).

    Uses binary search over the weight-sorted adjacency, O(log n) neighbor
    queries per boundary.  An empty class yields lo > hi.
    """
    if not o.weight_sorted:
        raise DomainError("weight_class_bounds requires a weight-sorted oracle")
    if i < 1:
        raise DomainError("weight class index must be >= 1")
    deg = o.degree_query(v)

    def first_at_least(threshold) -> int:
        # Smallest 1-based index whose weight is >= threshold; deg+1 if none.
        lo, hi = 1, deg + 1
        while lo < hi:
            mid = (lo + hi) // 2
            _, w = o.neighbor_query(v, mid)
            if w >= threshold:
                hi = mid
            else:
                lo = mid + 1
        return lo

    lo = first_at_least((1 + eps) ** (i - 1)) if i > 1 else 1
    hi = first_at_least((1 + eps) ** i) - 1
    return lo, hi


# ---------------------------------------------------------------------------
# Dynamic streams


@dataclass(frozen=True)
class StreamEvent:
    op: str  # "+" or "-"
    u: int
    v: int
    w: Weight = 1

    def key(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


def parse_stream(lines: Iterable[str]) -> list[StreamEvent]:
    """Parse "+ u v [w]" / "- u v" lines; '#' starts a comment."""
    events = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] not in ("+", "-"):
            raise StreamFormatError(lineno, f"expected '+' or '-', got {parts[0]!r}")
        if len(parts) not in (3, 4):
            raise StreamFormatError(lineno, f"expected 'op u v [w]', got {raw!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
            w: Weight = 1
            if len(parts) == 4:
                w = int(parts[3]) if parts[3].isdigit() else float(parts[3])
        except ValueError as exc:
            raise StreamFormatError(lineno, str(exc)) from exc
        if u == v:
            raise StreamFormatError(lineno, "self loop")
        events.append(StreamEvent(parts[0], u, v, w))
    return events


def stream_from_file(path: str) -> list[StreamEvent]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_stream(fh)


def validate_stream(events: Iterable[StreamEvent], n: int) -> Iterator[StreamEvent]:
    """Yield events in order, checking ids and that deletes hit present edges.

    Delete lines carry no weight, so delete events are rewritten to carry the
    weight remembered from the matching insert (sketch updates need the exact
    inverse).
    """
    present: dict[tuple[int, int], Weight] = {}
    for lineno, ev in enumerate(events, start=1):
        if not (0 <= ev.u < n and 0 <= ev.v < n):
            raise StreamFormatError(lineno, f"endpoint outside 0..{n - 1}")
        key = ev.key()
        if ev.op == "+":
            if key in present:
                raise StreamFormatError(lineno, f"insert of already-present edge {key}")
            present[key] = ev.w
            yield ev
        else:
            if key not in present:
                raise StreamFormatError(lineno, f"delete of absent edge {key}")
            w = present.pop(key)
            yield StreamEvent("-", ev.u, ev.v, w)


def replay_stream(events: Iterable[StreamEvent], n: int) -> Graph:
    """Materialize the net graph of a stream (the naive replay oracle)."""
    present: dict[tuple[int, int], Weight] = {}
    for ev in validate_stream(events, n):
        if ev.op == "+":
            present[ev.key()] = ev.w
        else:
            del present[ev.key()]
    return Graph(n, [(u, v, w) for (u, v), w in present.items()])


def events_from_graph(g: Graph, rng=None) -> list[StreamEvent]:
    """Insert-only stream for a graph, optionally shuffled."""
    evs = [StreamEvent("+", u, v, w) for u, v, w in g.edges]
    if rng is not None:
        rng.shuffle(evs)
    return evs

