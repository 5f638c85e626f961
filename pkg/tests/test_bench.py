import time

from subhc.cli import bench_approx


def test_density_sweep_regimes():
    # n=512 sweep: read-everything at low density, sublinear queries at high
    start = time.time()
    report = bench_approx(512, [1.1, 1.5, 1.8], seeds=1, eps=0.25, base_seed=7)
    rows = {row["zeta"]: row for row in report["rows"]}

    sparse = rows[1.1]
    assert sparse["read_all"]
    assert sparse["queries"] == sparse["m"]  # bulk read charges one query per edge

    mid, dense = rows[1.5], rows[1.8]
    assert not mid["read_all"] and not dense["read_all"]
    assert mid["queries"] >= dense["queries"]  # lighter sampling as density grows
    assert dense["queries"] < dense["m"]  # sublinearity in the dense regime
    assert report["mean_ratio"] is not None
    assert time.time() - start < 180


def test_bench_rows_reproducible():
    a = bench_approx(48, [1.2, 1.6], seeds=2, eps=0.5, base_seed=3)
    b = bench_approx(48, [1.2, 1.6], seeds=2, eps=0.5, base_seed=3)
    assert a == b
