"""Command-line surface: cost / gen / sparsify / hc / stream / mpc / bench.

All randomness flows from --seed (env SUBHC_SEED is the fallback default).
Usage and input errors exit 1; protocol and contract violations exit 2.
Reports are JSON validating against report.schema.json; bench can also emit a
flat CSV and render figures next to it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .access import QueryOracle, stream_from_file
from .cluster import hc_via_sparsifier, recursive_hc, spectral_bisect
from .errors import (
    DomainError,
    OracleContractError,
    ProtocolViolation,
    RecoveryFailure,
    StreamFormatError,
)
from .graph import (
    HCTree,
    cost_cut_form,
    cost_edge_form,
    cost_split_form,
    load_graph,
    save_graph,
)
from .mpc import mpc_1round, mpc_2round, mpc_partition
from .sketch import SketchConfig
from .sparsify import SparsifyPlan, eps_delta_sparsify
from .streaming import stream_hc
from . import instances


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _default_seed() -> int:
    return int(os.environ.get("SUBHC_SEED", "0"))


def _write_report(report: dict, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="subhc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_seed(sp):
        sp.add_argument("--seed", type=int, default=_default_seed())

    sp = sub.add_parser("cost", help="evaluate the clustering cost of a tree on a graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--tree", required=True, help='nested parens over leaf ids, e.g. "((0,1),(2,3))"')
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--form", choices=["edge", "split", "cut"], default="edge")

    sp = sub.add_parser("gen", help="generate a graph instance")
    sp.add_argument("--model", required=True,
                    choices=["gnp", "gnm", "complete", "cliques", "hidden-matching", "mpc-bicliques"])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--eps", type=float, default=0.25)
    sp.add_argument("--s", type=int, default=None, help="clique size (overrides --gamma)")
    sp.add_argument("--r", type=int, default=None, help="clique count (with --s)")
    sp.add_argument("--t", type=int, default=None, help="half the matching size per clique pair")
    sp.add_argument("--out", required=True)
    sp.add_argument("--tiling-out", default=None)
    add_seed(sp)

    sp = sub.add_parser("sparsify", help="build a relaxed cut sparsifier via the query oracle")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--c1", type=float, default=1.0)
    sp.add_argument("--c2", type=float, default=2.0)
    sp.add_argument("--expander-degree", type=int, default=16)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", required=True)
    add_seed(sp)

    sp = sub.add_parser("hc", help="hierarchical clustering (directly or through the sparsifier)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--eps", type=float, default=None,
                    help="when set, cluster through the sparsifier pipeline")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--report", default=None)
    add_seed(sp)

    sp = sub.add_parser("stream", help="single-pass dynamic-stream pipeline")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--report", default=None)
    add_seed(sp)

    sp = sub.add_parser("mpc", help="simulate the 1- or 2-round protocol")
    sp.add_argument("--rounds", type=int, choices=[1, 2], required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--branch", choices=["auto", "dense", "sparse"], default="auto")
    sp.add_argument("--partition", choices=["uniform", "round_robin"], default="uniform")
    sp.add_argument("--report", default=None)
    add_seed(sp)

    sp = sub.add_parser("bench", help="benchmark harness")
    sp.add_argument("--suite", choices=["approx"], default="approx")
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--zetas", default="1.1,1.3333,1.5,1.8")
    sp.add_argument("--seeds", type=int, default=20)
    sp.add_argument("--eps", type=float, default=0.25)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--report", default=None)
    sp.add_argument("--csv", default=None)
    sp.add_argument("--figures", default=None)
    add_seed(sp)

    return p


def _cmd_cost(args) -> int:
    g = load_graph(args.graph, n=args.n)
    t = HCTree.parse(args.tree)
    form = {"edge": cost_edge_form, "split": cost_split_form, "cut": cost_cut_form}[args.form]
    print(form(g, t))
    return 0


def _cmd_gen(args) -> int:
    if args.model == "gnp":
        g = instances.gen_gnp(args.n, args.p, args.seed)
    elif args.model == "gnm":
        if args.m is None:
            raise DomainError("gnm requires --m")
        g = instances.gen_gnm(args.n, args.m, args.seed)
    elif args.model == "complete":
        g = instances.gen_complete(args.n)
    elif args.model == "cliques":
        if args.s is not None:
            g = instances.gen_clique_union_exact(args.n, args.s, args.r or args.n // args.s, args.seed)
        else:
            g = instances.gen_clique_union(args.n, args.gamma, args.seed)
    elif args.model == "hidden-matching":
        if args.s is not None:
            g = instances.gen_hidden_matching_exact(
                args.n, args.s, args.r, args.t, args.seed
            )
        else:
            g = instances.gen_hidden_matching(args.n, args.gamma, args.seed)
    else:
        g, tiles = instances.gen_mpc_bicliques(args.n, args.eps, args.seed)
        if args.tiling_out:
            with open(args.tiling_out, "w", encoding="utf-8") as fh:
                json.dump([[list(e) for e in tile.edges] for tile in tiles], fh)
    save_graph(g, args.out)
    print(f"wrote {args.out}: n={g.n} m={g.m}")
    return 0


def _cmd_sparsify(args) -> int:
    g = load_graph(args.graph, n=args.n)
    plan = SparsifyPlan(
        eps=args.eps,
        delta=args.delta,
        c1=args.c1,
        c2=args.c2,
        expander_degree=args.expander_degree,
        seed=args.seed,
    )
    oracle = QueryOracle(g)
    g_tilde = eps_delta_sparsify(oracle, plan, workers=args.threads)
    save_graph(g_tilde, args.out)
    print(
        f"wrote {args.out}: edges={g_tilde.m} q={plan.sample_count(g.n)} "
        f"queries={oracle.ledger.query_count}"
    )
    return 0


def _cmd_hc(args) -> int:
    g = load_graph(args.graph, n=args.n)
    if args.eps is None:
        tree = recursive_hc(g, spectral_bisect)
        cost = cost_edge_form(g, tree)
        report = {
            "n": g.n,
            "m": g.m,
            "eps": 0.0,
            "delta": 0.0,
            "read_all": True,
            "q": 0,
            "queries": 0,
            "sparsifier_edges": g.m,
            "cost_sparsifier": float(cost),
            "cost_original": float(cost),
            "ratio": 1.0 if cost > 0 else None,
        }
    else:
        tree, report = hc_via_sparsifier(
            g, args.eps, spectral_bisect, seed=args.seed, m_known=g.m, workers=args.threads
        )
        cost = report["cost_original"]
    report["tree"] = tree.to_string()
    _write_report(report, args.report)
    print(f"cost {cost}")
    return 0


def _cmd_stream(args) -> int:
    events = stream_from_file(args.input)
    tree, report = stream_hc(events, args.n, args.eps, spectral_bisect, seed=args.seed)
    report["tree"] = tree.to_string()
    _write_report(report, args.report)
    print(f"cost {report['cost_sparsifier']} peak_memory_words {report['peak_memory_words']}")
    return 0


def _cmd_mpc(args) -> int:
    g = load_graph(args.input, n=args.n)
    machines = mpc_partition(g, args.k, args.seed, mode=args.partition)
    for m in machines:
        m.budget_words = args.budget
    if args.rounds == 2:
        cfg = SketchConfig(n=g.n, eps=args.eps, master_seed=args.seed)
        tree, report = mpc_2round(machines, cfg, spectral_bisect)
    else:
        tree, report = mpc_1round(
            machines,
            args.eps,
            args.seed,
            spectral_bisect,
            m_known=g.m,
            branch=args.branch,
        )
    report["tree"] = tree.to_string()
    _write_report(report, args.report)
    print(f"rounds {report['rounds_elapsed']} cost {report['cost_sparsifier']}")
    return 0


def bench_approx(
    n: int, zetas: list[float], seeds: int, eps: float, base_seed: int, threads: int = 1
) -> dict:
    """Density sweep: run the sparsifier pipeline across m = n^zeta regimes.

    Reports per-seed rows (queries, sparsifier size, and the cost ratio
    against the full-graph run with the same oracle); asserts nothing.
    """
    from .prf import derive_seed

    rows = []
    max_m = n * (n - 1) // 2
    for zeta in zetas:
        m = min(max_m, round(n**zeta))
        g = instances.gen_gnm(n, m, derive_seed(base_seed, int(zeta * 1000)))
        baseline_tree = recursive_hc(g, spectral_bisect)
        cost_baseline = float(cost_edge_form(g, baseline_tree))
        for s in range(seeds):
            tree, rep = hc_via_sparsifier(
                g, eps, spectral_bisect, seed=derive_seed(base_seed, int(zeta * 1000), s),
                m_known=m, workers=threads,
            )
            cost_pipeline = rep["cost_original"]
            rows.append(
                {
                    "zeta": zeta,
                    "seed": s,
                    "n": n,
                    "m": m,
                    "read_all": rep["read_all"],
                    "q": rep["q"],
                    "queries": rep["queries"],
                    "sparsifier_edges": rep["sparsifier_edges"],
                    "cost_pipeline": cost_pipeline,
                    "cost_baseline": cost_baseline,
                    "ratio": (cost_pipeline / cost_baseline) if cost_baseline > 0 else None,
                }
            )
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    return {
        "suite": "approx",
        "n": n,
        "eps": eps,
        "seeds": seeds,
        "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
        "rows": rows,
    }


def _cmd_bench(args) -> int:
    zetas = [float(z) for z in args.zetas.split(",") if z]
    report = bench_approx(args.n, zetas, args.seeds, args.eps, args.seed, threads=args.threads)
    _write_report(report, args.report)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(report["rows"][0].keys()))
            writer.writeheader()
            writer.writerows(report["rows"])
    if args.figures:
        from .figures import render_bench_figures

        paths = render_bench_figures(report["rows"], args.figures)
        for path in paths:
            print(f"wrote {path}")
    print(f"mean_ratio {report['mean_ratio']}")
    return 0


_COMMANDS = {
    "cost": _cmd_cost,
    "gen": _cmd_gen,
    "sparsify": _cmd_sparsify,
    "hc": _cmd_hc,
    "stream": _cmd_stream,
    "mpc": _cmd_mpc,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, StreamFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ProtocolViolation, OracleContractError, RecoveryFailure) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
