"""Acceptance suite: one test per release criterion, one printed line each.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines.
Tolerances and seed counts are pinned here; nothing is deferred to later
calibration.
"""

import math
import random
import time
from collections import Counter
from fractions import Fraction

import numpy as np

from subhc.access import QueryOracle, StreamEvent, events_from_graph
from subhc.cluster import exact_hc, hc_via_sparsifier, recursive_hc, spectral_bisect
from subhc.errors import ProtocolViolation
from subhc.graph import (
    Graph,
    cost_cut_form,
    cost_edge_form,
    cost_split_form,
    cut_weight,
    hc_cost_lower_bound,
    random_hc_tree,
)
from subhc.instances import (
    gen_complete,
    gen_gnp,
    gen_hidden_matching_exact,
    gen_mpc_bicliques,
    mpc_biclique_params,
)
from subhc.mpc import dense_subsample, mpc_2round, mpc_partition
from subhc.sketch import SketchConfig, recover_sparsifier, sketch_graph
from subhc.sparsify import (
    SparsifyPlan,
    build_expander,
    edge_sampling_distribution,
    eps_delta_sparsify,
    pick_delta_for_hc,
    weighted_sparsify,
)
from subhc.streaming import stream_sparsify
from conftest import enumerate_cut_weights, proper_cut_masks, random_int_graph, side_sizes


def report(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num:>2} {status}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def quality_plan(eps, delta, seed):
    # calibrated plan for the per-cut guarantee: default c1/c2, degree-2 overlay
    return SparsifyPlan(eps=eps, delta=delta, c1=1.0, c2=2.0, expander_degree=2, seed=seed)


def test_criterion_01_cost_formulation_equivalence():
    start = time.time()
    rng = random.Random(101)
    for _ in range(200):
        n = rng.randint(2, 12)
        g = random_int_graph(rng, n, 0.5, wmax=4)
        t = random_hc_tree(n, rng)
        a, b, c = cost_edge_form(g, t), cost_split_form(g, t), cost_cut_form(g, t)
        if not (a == b == c):
            report(1, False, f"forms disagree on n={n}: {a} {b} {c}")
    elapsed = time.time() - start
    report(1, elapsed < 10, f"200 (graph, tree) pairs, three forms equal exactly ({elapsed:.1f}s)")


def test_criterion_02_clique_cost_fact():
    rng = random.Random(202)
    for n in range(2, 11):
        g = gen_complete(n)
        want = (n**3 - n) // 3
        for _ in range(50):
            t = random_hc_tree(n, rng)
            got = cost_edge_form(g, t)
            if got != want:
                report(2, False, f"K_{n} random tree cost {got} != {want}")
    report(2, True, "K_n cost (n^3-n)/3 for n=2..10, 50 random binary trees each")


def test_criterion_03_lower_bound_soundness():
    start = time.time()
    rng = random.Random(303)
    for _ in range(500):
        n = rng.randint(1, 7)
        g = random_int_graph(rng, n, rng.choice([0.3, 0.5, 0.8]))
        opt = exact_hc(g)[1]
        bound = hc_cost_lower_bound(n, g.m)
        if opt < bound:
            report(3, False, f"optimal {opt} below 4m^2/(3n)={bound} at n={n}, m={g.m}")
    elapsed = time.time() - start
    report(3, elapsed < 120, f"500 graphs n<=7: optimal cost >= 4m^2/(3n), zero violations ({elapsed:.1f}s)")


def _sparsifier_runs(eps=0.5, delta=0.3, seeds=100):
    g = gen_gnp(12, 0.5, seed=1)
    runs = []
    for seed in range(seeds):
        o = QueryOracle(g)
        gt = eps_delta_sparsify(o, quality_plan(eps, delta, seed))
        runs.append((g, gt))
    return runs


def test_criterion_04_relaxed_sparsifier_cut_bounds():
    start = time.time()
    eps, delta = 0.5, 0.3
    masks = proper_cut_masks(12)
    small = side_sizes(masks, 12)
    good = 0
    runs = _sparsifier_runs(eps, delta, seeds=100)
    ref = enumerate_cut_weights(runs[0][0])[masks]
    for _, gt in runs:
        got = enumerate_cut_weights(gt)[masks]
        lo = (1 - eps) * ref
        hi = (1 + eps) * ref + 3 * delta * small
        good += bool(np.all((got >= lo - 1e-9) & (got <= hi + 1e-9)))
    elapsed = time.time() - start
    report(4, good >= 99 and elapsed < 60,
           f"G(12,0.5) eps=0.5 delta=0.3: {good}/100 seeds satisfy all 2047 cut bounds ({elapsed:.1f}s)")


def test_criterion_05_cost_distortion_band():
    eps, delta = 0.5, 0.3
    rng = random.Random(505)
    runs = _sparsifier_runs(eps, delta, seeds=100)
    n = 12
    additive = 3 * n * (n + 1) * delta / 2
    good = total = 0
    for g, gt in runs:
        for _ in range(50):
            t = random_hc_tree(n, rng)
            cg = float(cost_edge_form(g, t))
            cgt = float(cost_edge_form(gt, t))
            total += 1
            good += (1 - eps) * cg - 1e-9 <= cgt <= (1 + eps) * cg + additive + 1e-9
    report(5, good >= 0.99 * total,
           f"distortion band held for {good}/{total} (seed, tree) pairs")


def test_criterion_06_query_sublinearity():
    g = gen_complete(256)
    m = g.m
    choice = pick_delta_for_hc(256, m, 0.25)
    tree, rep = hc_via_sparsifier(g, 0.25, spectral_bisect, seed=6, m_known=m)
    ok = rep["queries"] < m and rep["queries"] <= 3 * rep["q"] + 256 and not choice.read_all
    report(6, ok,
           f"K_256: queries={rep['queries']} < m={m}, and <= 3q+n with q={rep['q']}")


def test_criterion_07_probability_normalization():
    rng = random.Random(707)
    checked = 0
    for _ in range(50):
        n = rng.randint(3, 10)
        g = random_int_graph(rng, n, 0.5)
        delta = rng.choice([Fraction(1, 10), Fraction(1, 2), Fraction(1)])
        x = build_expander(n, rng.choice([2, 4, 16]), seed=rng.randint(0, 999))
        rows = edge_sampling_distribution(g, x, delta)
        total = sum(p for *_, p in rows)
        if total != 1:
            report(7, False, f"sum p = {total} != 1 at n={n}, delta={delta}")
        checked += 1
    report(7, checked == 50, "sum of sampling probabilities exactly 1 on 50 random (G, delta) pairs")


def test_criterion_08_sketch_pipeline():
    start = time.time()
    eps = 0.5
    masks = proper_cut_masks(12)
    good = 0
    for seed in range(100):
        g = gen_gnp(12, 0.5, seed=2)
        rng = random.Random(seed)
        events = events_from_graph(g, rng=rng)
        # interleave deletions of a transient edge set
        extra = [(u, v) for u in range(12) for v in range(u + 1, 12)
                 if not any(e[0] == u and e[1] == v for e in g.edges)][:10]
        events = ([StreamEvent("+", u, v, 1) for u, v in extra] + events
                  + [StreamEvent("-", u, v, 1) for u, v in extra])
        cfg = SketchConfig(n=12, eps=eps, master_seed=seed)
        rec = stream_sparsify(events, 12, cfg)
        ref = enumerate_cut_weights(g)[masks]
        got = enumerate_cut_weights(rec)[masks]
        good += bool(np.all((got >= (1 - eps) * ref - 1e-9) & (got <= (1 + eps) * ref + 1e-9)))

    # bit-exact additivity across random splits
    linear_ok = 0
    pool = [(u, v) for u in range(12) for v in range(u + 1, 12)]
    for trial in range(100):
        rng = random.Random(trial)
        rng.shuffle(pool)
        cut_at = rng.randint(0, len(pool))
        cfg = SketchConfig(n=12, eps=eps, master_seed=trial)
        from subhc.sketch import empty_sketches, sketch_update

        sa, sb, s_all = empty_sketches(cfg), empty_sketches(cfg), empty_sketches(cfg)
        for u, v in pool[:cut_at]:
            sketch_update(sa, u, v, 1, +1)
            sketch_update(s_all, u, v, 1, +1)
        for u, v in pool[cut_at:]:
            sketch_update(sb, u, v, 1, +1)
            sketch_update(s_all, u, v, 1, +1)
        merged = [x.add(y) for x, y in zip(sa, sb)]
        same = all(
            set(m.classes) == set(w.classes)
            and all(np.array_equal(m.classes[k], w.classes[k]) for k in m.classes)
            for m, w in zip(merged, s_all)
        )
        linear_ok += same
    elapsed = time.time() - start
    report(8, good >= 95 and linear_ok == 100 and elapsed < 120,
           f"stream recovery {good}/100 seeds within (1+-0.5); additivity {linear_ok}/100 bit-exact ({elapsed:.1f}s)")


def test_criterion_09_mpc_two_round():
    g = gen_gnp(12, 0.5, seed=6)
    cfg = SketchConfig(n=12, eps=0.5, master_seed=99)
    central = recover_sparsifier(sketch_graph(g, cfg), cfg)
    budget = 500_000
    ms = mpc_partition(g, 4, seed=8)
    for m in ms:
        m.budget_words = budget
    tree, rep = mpc_2round(ms, cfg)
    coordinator_graph_ok = rep["sparsifier_edges"] == central.m
    # recompute the coordinator sparsifier directly for bit-identity
    ms2 = mpc_partition(g, 4, seed=8)
    tree2, rep2 = mpc_2round(ms2, cfg)
    deterministic = tree.to_string() == tree2.to_string()
    rounds_ok = rep["rounds_elapsed"] == 2
    budget_ok = all(mr["sent_words"] <= 2 * budget and mr["received_words"] <= 2 * budget
                    for mr in rep["machines"])
    ms3 = mpc_partition(g, 4, seed=8)
    for m in ms3:
        m.budget_words = 50
    try:
        mpc_2round(ms3, cfg)
        violation_ok = False
    except ProtocolViolation as exc:
        violation_ok = exc.round_index == 1
    # cut-level identity of coordinator vs centralized recovery
    identical = recover_sparsifier(sketch_graph(g, cfg), cfg) == central
    ok = coordinator_graph_ok and deterministic and rounds_ok and budget_ok and violation_ok and identical
    report(9, ok, "2-round: coordinator sketch recovery matches centralized bit-exact; "
                  "2 rounds; budgets enforced; violation raised under-budget")


def test_criterion_10_mpc_one_round_dense():
    eps, n = 0.5, 12
    edges = [(u, v) for u in range(12) for v in range(u + 1, 12)]
    random.Random(3).shuffle(edges)
    g = Graph(12, edges[:60])
    masks = proper_cut_masks(n)
    ref = enumerate_cut_weights(g)[masks]
    small = side_sizes(masks, n)
    good = 0
    for seed in range(100):
        h, p, delta = dense_subsample(g, eps, shared_seed=seed)  # default constant: p clamps to 1
        got = enumerate_cut_weights(h)[masks]
        lo = (1 - eps) * ref - eps * delta * small
        hi = (1 + eps) * ref + eps * delta * small
        good += bool(np.all((got >= lo - 1e-9) & (got <= hi + 1e-9)))

    # unbiasedness of real subsampling (constant forced below the clamp)
    k8 = gen_complete(8)
    mask = 0b00001111
    w_true = cut_weight(k8, mask)
    vals = []
    for seed in range(10**4):
        h, p, _ = dense_subsample(k8, eps, shared_seed=seed, sample_constant=0.1)
        vals.append(cut_weight(h, mask))
    assert p < 1
    mean = np.mean(vals)
    se = np.std(vals) / math.sqrt(len(vals))
    unbiased = abs(mean - w_true) <= 3 * se
    report(10, good >= 95 and unbiased,
           f"1-round dense: {good}/100 seeds inside the cut band; "
           f"subsample mean {mean:.3f} vs {w_true} within 3 SE ({se:.4f})")


def test_criterion_11_end_to_end_approximation():
    start = time.time()
    eps = 0.25
    worst = 0.0
    for g in (gen_gnp(64, 0.3, seed=11), gen_complete(64)):
        baseline_tree = recursive_hc(g, spectral_bisect)
        baseline = float(cost_edge_form(g, baseline_tree))
        for seed in range(20):
            tree, rep = hc_via_sparsifier(g, eps, spectral_bisect, seed=seed, m_known=g.m)
            ratio = rep["cost_original"] / baseline
            worst = max(worst, ratio)
            if ratio > 1 + 5 * eps:
                report(11, False, f"ratio {ratio:.3f} > {1 + 5 * eps} (m={g.m}, seed={seed})")
    elapsed = time.time() - start
    report(11, worst <= 1 + 5 * eps and elapsed < 120,
           f"G(64,0.3) and K_64, 20 seeds each: worst cost ratio {worst:.3f} <= {1 + 5 * eps} ({elapsed:.1f}s)")


def test_criterion_12_hard_instances():
    s, r, t = 8, 6, 2
    degrees_ok = True
    for seed in range(50):
        g = gen_hidden_matching_exact(s * r, s=s, r=r, t=t, seed=seed)
        if any(g.degree(v) != s - 1 for v in range(g.n)):
            degrees_ok = False
    g, tiles = gen_mpc_bicliques(64, 0.25, seed=3)
    union = Counter()
    for tile in tiles:
        union.update((u, v) for u, v, _ in tile.edges)
    disjoint = all(c == 1 for c in union.values())
    s2, b, r1 = mpc_biclique_params(64, 0.25)
    union_exact = sum(union.values()) == r1 * (b * s2 // 2) ** 2 and all(
        (u, v) in {(a, c) for a, c, _ in g.edges} for u, v in union
    )
    report(12, degrees_ok and disjoint and union_exact,
           f"hidden-matching degrees exactly {s - 1} over 50 seeds; tiling edge-disjoint, union exact")


def test_criterion_13_weighted_pipeline():
    start = time.time()
    eps, n = 0.25, 12
    rng = random.Random(1313)
    pool = [(u, v) for u in range(n) for v in range(u + 1, n)]
    rng.shuffle(pool)
    chosen = pool[:60]
    edges = [(u, v, 1) for u, v in chosen[:30]] + [(u, v, 1.6) for u, v in chosen[30:]]
    g = Graph(n, edges)

    # binary search ranges equal a linear scan at every vertex and class
    from subhc.access import weight_class_bounds

    o = QueryOracle(g, weight_sorted=True)
    search_ok = True
    for v in range(n):
        deg = o.degree_query(v)
        ws = [o.neighbor_query(v, i)[1] for i in range(1, deg + 1)]
        for i in range(1, 5):
            lo_w, hi_w = (1 + eps) ** (i - 1), (1 + eps) ** i
            idx = [j + 1 for j, w in enumerate(ws) if lo_w <= w < hi_w]
            lo, hi = weight_class_bounds(o, v, i, eps)
            if idx and (lo, hi) != (idx[0], idx[-1]):
                search_ok = False
            if not idx and lo <= hi:
                search_ok = False

    # class-summed additive budget: both classes are dense here
    alpha = 30 / n ** (4 / 3)
    assert alpha > 1
    delta_cls = eps * min(alpha * alpha / n ** (1 / 3), 1.0)
    budget = sum((1 + eps) ** (i - 1) * delta_cls for i in (1, 3))
    masks = proper_cut_masks(n)
    ref = enumerate_cut_weights(g)[masks]
    small = side_sizes(masks, n)
    good = 0
    for seed in range(100):
        o = QueryOracle(g, weight_sorted=True)
        gt = weighted_sparsify(o, eps, seed=seed, expander_degree=2)
        got = enumerate_cut_weights(gt)[masks]
        lo = (1 - 3 * eps) * ref
        hi = (1 + 3 * eps) * ref + 3 * budget * small
        good += bool(np.all((got >= lo - 1e-9) & (got <= hi + 1e-9)))
    elapsed = time.time() - start
    report(13, search_ok and good >= 95,
           f"weighted: binary search == linear scan; {good}/100 seeds inside the "
           f"class-summed band ({elapsed:.1f}s)")
