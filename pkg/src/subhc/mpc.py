"""Synchronous-round MPC simulator with exact word accounting.

Machines hold edge partitions; messages created in round r are deliverable
only in round r+1, per-round sent/received words are checked against each
machine's budget, and transcripts are independent of machine execution order
(deliveries are sorted by source, destination).  Machine 0 is the
coordinator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cluster import recursive_hc, spectral_bisect
from .errors import DomainError, ProtocolViolation
from .graph import Graph, HCTree, cost_edge_form
from .prf import derive_seed, uniform01
from .sketch import SketchConfig, VertexSketch, empty_sketches, recover_sparsifier

EDGE_WORDS = 3  # (u, v, weight) message payload per edge


@dataclass
class Machine:
    id: int
    n: int
    edges: list = field(default_factory=list)
    budget_words: int | None = None
    sent_words: int = 0
    received_words: int = 0
    seed: int = 0


@dataclass
class _Message:
    src: int
    dst: int
    words: int
    payload: object


class _Simulator:
    """Round barrier and budget bookkeeping."""

    def __init__(self, machines: list[Machine]):
        self.machines = machines
        self.round_index = 0
        self.outbox: list[_Message] = []
        self.history: list[dict] = []

    def send(self, src: int, dst: int, words: int, payload) -> None:
        m = self.machines[src]
        m.sent_words += words
        self._round_sent[src] += words
        if m.budget_words is not None and self._round_sent[src] > m.budget_words:
            raise ProtocolViolation(src, self.round_index, "sent", self._round_sent[src], m.budget_words)
        self.outbox.append(_Message(src, dst, words, payload))

    def begin_round(self):
        self.round_index += 1
        self._round_sent = [0] * len(self.machines)
        self._round_recv = [0] * len(self.machines)

    def deliver(self) -> dict[int, list[_Message]]:
        """Close the round: messages become readable, budgets are checked."""
        inbox: dict[int, list[_Message]] = {m.id: [] for m in self.machines}
        for msg in sorted(self.outbox, key=lambda s: (s.src, s.dst)):
            dst = self.machines[msg.dst]
            dst.received_words += msg.words
            self._round_recv[msg.dst] += msg.words
            if dst.budget_words is not None and self._round_recv[msg.dst] > dst.budget_words:
                raise ProtocolViolation(msg.dst, self.round_index, "received", self._round_recv[msg.dst], dst.budget_words)
            inbox[msg.dst].append(msg)
        self.history.append(
            {
                "round": self.round_index,
                "sent": list(self._round_sent),
                "received": list(self._round_recv),
            }
        )
        self.outbox = []
        return inbox


def mpc_partition(g: Graph, k: int, seed: int, mode: str = "uniform") -> list[Machine]:
    """Assign every edge to exactly one of k machines."""
    if k < 1:
        raise DomainError("need at least one machine")
    machines = [Machine(i, g.n, seed=derive_seed(seed, i)) for i in range(k)]
    for j, e in enumerate(g.edges):
        if mode == "round_robin":
            owner = j % k
        elif mode == "uniform":
            owner = key_owner(seed, e[0], e[1], k)
        else:
            raise DomainError(f"unknown partition mode {mode!r}")
        machines[owner].edges.append(e)
    return machines


def key_owner(seed: int, u: int, v: int, k: int) -> int:
    return int(uniform01(seed, 0xA110C, u, v) * k) % k


def dense_branch_params(n: int, m: int, eps: float, sample_constant: float = 4.0) -> tuple[float, float]:
    """Edge-keep probability (clamped to 1) and additive budget m^2/n^3."""
    beta = m / n ** (4.0 / 3.0)
    p = min(1.0, sample_constant * math.log(max(2, n)) / (eps * eps * beta))
    return p, m * m / n**3


def dense_subsample(g: Graph, eps: float, shared_seed: int, sample_constant: float = 4.0) -> tuple[Graph, float, float]:
    """The dense-branch sampled graph alone (no overlay), for distribution tests.

    Matches the per-edge keep decisions machines make in mpc_1round exactly.
    """
    p, delta = dense_branch_params(g.n, g.m, eps, sample_constant)
    kept = [
        (u, v, w / p)
        for u, v, w in g.edges
        if uniform01(shared_seed, 0xED6E, u, v) < p
    ]
    return Graph(g.n, kept), p, delta


def _local_sketches(machine: Machine, cfg: SketchConfig) -> dict[int, VertexSketch]:
    """Partial sketches of the machine's local edges, only for touched vertices."""
    partial: dict[int, VertexSketch] = {}
    for u, v, w in machine.edges:
        for a, b in ((u, v), (v, u)):
            if a not in partial:
                partial[a] = VertexSketch(a, cfg)
            partial[a].apply(b, w, +1)
    return partial


def mpc_2round(
    machines: list[Machine],
    cfg: SketchConfig,
    oracle=spectral_bisect,
) -> tuple[HCTree, dict]:
    """Two rounds: aggregate partial sketches at responsible machines, then
    ship complete sketches to the coordinator, which recovers and clusters.
    """
    k = len(machines)
    n = machines[0].n
    sim = _Simulator(machines)
    block = math.ceil(n / k)

    def responsible(v: int) -> int:
        return min(v // block, k - 1)

    # Round 1: local partial sketches go to each vertex's responsible machine.
    sim.begin_round()
    staged: list[tuple[int, dict[int, VertexSketch]]] = []
    for m in machines:
        staged.append((m.id, _local_sketches(m, cfg)))
    for mid, partial in staged:
        for v in sorted(partial):
            words = partial[v].word_count()
            sim.send(mid, responsible(v), words, partial[v])
    inbox = sim.deliver()

    # Round 2: responsible machines add partials and forward to coordinator.
    sim.begin_round()
    for m in machines:
        summed: dict[int, VertexSketch] = {}
        for msg in inbox[m.id]:
            sk: VertexSketch = msg.payload
            if sk.vertex in summed:
                summed[sk.vertex] = summed[sk.vertex].add(sk)
            else:
                summed[sk.vertex] = sk
        for v in sorted(summed):
            sim.send(m.id, 0, summed[v].word_count(), summed[v])
    inbox = sim.deliver()

    # Coordinator: assemble all n sketches (absent ones are empty) and solve.
    final = empty_sketches(cfg)
    for msg in inbox[0]:
        sk: VertexSketch = msg.payload
        final[sk.vertex] = final[sk.vertex].add(sk)
    g_tilde = recover_sparsifier(final, cfg)
    tree = recursive_hc(g_tilde, oracle) if n >= 1 else None
    report = _report(sim, machines, g_tilde, tree, rounds=2)
    return tree, report


def mpc_1round(
    machines: list[Machine],
    eps: float,
    shared_seed: int,
    oracle=spectral_bisect,
    m_known: int | None = None,
    branch: str = "auto",
    sample_constant: float = 4.0,
    expander_degree: int = 2,
    c_samplers: float = 4.0,
) -> tuple[HCTree, dict]:
    """One round: dense inputs are edge-subsampled to the coordinator and
    composed with a small additive overlay; sparse inputs ship local sketches.

    The edge count must be known to all machines (flag argument).  Branch
    thresholds are asymptotic; at small n the automatic choice can be
    overridden with branch="dense" or "sparse".
    """
    from .sparsify import build_expander

    k = len(machines)
    n = machines[0].n
    m = m_known if m_known is not None else sum(len(mc.edges) for mc in machines)
    if branch == "auto":
        branch = "dense" if m >= n ** (5.0 / 3.0) else "sparse"
    if branch not in ("dense", "sparse"):
        raise DomainError(f"unknown branch {branch!r}")

    sim = _Simulator(machines)
    sim.begin_round()

    if branch == "dense":
        if m < 1:
            raise DomainError("dense branch needs at least one edge")
        if k > max(1, m / n ** (4.0 / 3.0)):
            import warnings

            warnings.warn(f"dense branch expects k <= m/n^(4/3); got k={k}")
        p, delta = dense_branch_params(n, m, eps, sample_constant)
        for mc in machines:
            kept = [
                (u, v, w)
                for u, v, w in sorted(mc.edges)
                if uniform01(shared_seed, 0xED6E, u, v) < p
            ]
            if kept:
                sim.send(mc.id, 0, EDGE_WORDS * len(kept), ("edges", kept))
        inbox = sim.deliver()

        sampled: list = []
        for msg in inbox[0]:
            _, kept = msg.payload
            sampled.extend((u, v, w / p) for u, v, w in kept)
        h = Graph(n, sampled)
        x = build_expander(n, expander_degree, derive_seed(shared_seed, 0xE0))
        overlay = [(u, v, eps * delta) for u, v in x.edges]
        g_tilde = Graph(n, list(h.edges) + overlay)
        extra = {"branch": "dense", "p": p, "delta": delta, "sampled_edges": h.m}
    else:
        if k > n ** (1.0 / 3.0):
            import warnings

            warnings.warn(f"sparse branch expects k <= n^(1/3); got k={k}")
        cfg = SketchConfig(n=n, eps=eps, master_seed=shared_seed, c_samplers=c_samplers)
        for mc in machines:
            partial = _local_sketches(mc, cfg)
            for v in sorted(partial):
                sim.send(mc.id, 0, partial[v].word_count(), partial[v])
        inbox = sim.deliver()
        final = empty_sketches(cfg)
        for msg in inbox[0]:
            sk: VertexSketch = msg.payload
            final[sk.vertex] = final[sk.vertex].add(sk)
        g_tilde = recover_sparsifier(final, cfg)
        extra = {"branch": "sparse"}

    tree = recursive_hc(g_tilde, oracle)
    report = _report(sim, machines, g_tilde, tree, rounds=1)
    report.update(extra)
    return tree, report


def _report(sim: _Simulator, machines: list[Machine], g_tilde: Graph, tree, rounds: int) -> dict:
    per_machine = [
        {
            "machine": m.id,
            "sent_words": m.sent_words,
            "received_words": m.received_words,
            "budget_words": m.budget_words,
        }
        for m in machines
    ]
    return {
        "n": machines[0].n,
        "k": len(machines),
        "rounds": rounds,
        "rounds_elapsed": sim.round_index,
        "sparsifier_edges": g_tilde.m,
        "cost_sparsifier": float(cost_edge_form(g_tilde, tree)) if tree else 0.0,
        "machines": per_machine,
        "round_words": sim.history,
    }
