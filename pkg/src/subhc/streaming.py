"""Single-pass dynamic-stream pipeline: sketch, recover, cluster.

Events are consumed once through a forward-only iterator; the only state kept
is the per-vertex sketch bank, whose size is charged to the stream-memory
ledger.  Recovery and clustering happen after the pass and are not charged
(they are post-processing on the retained state).
"""

from __future__ import annotations

from typing import Iterable

from .access import ResourceLedger, StreamEvent, validate_stream
from .cluster import recursive_hc, spectral_bisect
from .graph import Graph, HCTree, cost_edge_form
from .sketch import SketchConfig, empty_sketches, recover_sparsifier, sketch_update


def stream_sparsify(
    events: Iterable[StreamEvent],
    n: int,
    cfg: SketchConfig,
    ledger: ResourceLedger | None = None,
) -> Graph:
    """Process a dynamic stream once and recover the approximate-cut graph."""
    if cfg.n != n:
        raise ValueError("sketch config built for a different vertex count")
    ledger = ledger if ledger is not None else ResourceLedger()
    sketches = empty_sketches(cfg)
    charged_classes: set[tuple[int, int]] = set()
    ledger.charge_stream_words(4 * n)  # per-vertex headers
    event_iter = iter(validate_stream(events, n))
    for ev in event_iter:
        delta = 1 if ev.op == "+" else -1
        sketch_update(sketches, ev.u, ev.v, ev.w, delta)
        for vertex in (ev.u, ev.v):
            for cls in sketches[vertex].classes:
                if (vertex, cls) not in charged_classes:
                    charged_classes.add((vertex, cls))
                    ledger.charge_stream_words(1 + cfg.words_per_class)
    return recover_sparsifier(sketches, cfg)


def stream_hc(
    events: Iterable[StreamEvent],
    n: int,
    eps: float,
    oracle=spectral_bisect,
    seed: int = 0,
    c_samplers: float = 4.0,
) -> tuple[HCTree, dict]:
    """Full streaming pipeline; the report carries peak sketch memory."""
    cfg = SketchConfig(n=n, eps=eps, master_seed=seed, c_samplers=c_samplers)
    ledger = ResourceLedger()
    g_tilde = stream_sparsify(events, n, cfg, ledger=ledger)
    tree = recursive_hc(g_tilde, oracle)
    report = {
        "n": n,
        "eps": eps,
        "sparsifier_edges": g_tilde.m,
        "cost_sparsifier": float(cost_edge_form(g_tilde, tree)),
        "peak_memory_words": ledger.peak_stream_words,
        "copies_per_level": cfg.copies,
        "levels": cfg.graph_levels,
    }
    return tree, report
