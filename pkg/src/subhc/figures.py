"""Figure rendering for benchmark reports.

Rendered to files only (Agg backend); the CLI writes these next to the JSON
and CSV outputs when asked.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def render_bench_figures(rows: list[dict], out_dir: str, stem: str = "bench_approx") -> list[str]:
    """Render queries-vs-density and ratio-vs-density panels from bench rows.

    Returns the list of written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    by_zeta: dict[float, list[dict]] = {}
    for row in rows:
        by_zeta.setdefault(row["zeta"], []).append(row)
    zetas = sorted(by_zeta)
    mean_queries = [sum(r["queries"] for r in by_zeta[z]) / len(by_zeta[z]) for z in zetas]
    ms = [by_zeta[z][0]["m"] for z in zetas]
    ratios = [
        sum(r["ratio"] for r in by_zeta[z]) / len(by_zeta[z])
        for z in zetas
        if all(r["ratio"] is not None for r in by_zeta[z])
    ]

    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.4))
    ax = axes[0]
    ax.plot(zetas, mean_queries, "o-", label="queries")
    ax.plot(zetas, ms, "s--", color="gray", label="m (edges)")
    ax.set_yscale("log")
    ax.set_xlabel(r"density exponent $\zeta$  ($m = n^{\zeta}$)")
    ax.set_ylabel("oracle queries")
    ax.legend(frameon=False, fontsize=8)

    ax = axes[1]
    if len(ratios) == len(zetas):
        ax.plot(zetas, ratios, "o-")
    ax.axhline(1.0, color="gray", lw=0.8)
    ax.set_xlabel(r"density exponent $\zeta$")
    ax.set_ylabel("cost ratio vs full-graph run")

    fig.tight_layout()
    path = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
