import random

import pytest

from ssrsim.analytic import (
    LoopNestModel, break_even, hypercube, n_base, n_ssr, peak_utilization,
    table1, utilization,
)


def test_n_ssr_1d_two_movers():
    # d=1, s=2, I=[1], L=[N]: setup 12 plus one instruction per iteration
    for n in (1, 10, 2048):
        m = LoopNestModel(s=2, L=(n,), I=(1,))
        assert n_ssr(m) == 12 + n


def test_n_ssr_minimal():
    m = LoopNestModel(s=1, L=(1,), I=(0,))
    assert n_ssr(m) == 4 + 1 + 2 + 1 * 1 - 1  # == 7


def test_n_ssr_monotone_in_bounds():
    rng = random.Random(3)
    for _ in range(200):
        d = rng.randint(1, 4)
        L = [rng.randint(1, 6) for _ in range(d)]
        I = [rng.randint(0, 4) for _ in range(d)]
        m = LoopNestModel(s=rng.randint(1, 2), L=tuple(L), I=tuple(I))
        k = rng.randrange(d)
        L2 = list(L)
        L2[k] += 1
        m2 = LoopNestModel(s=m.s, L=tuple(L2), I=tuple(I))
        assert n_ssr(m2) >= n_ssr(m)


def test_n_base_1d_two_movers():
    m = LoopNestModel(s=2, L=(100,), I=(1,))
    assert n_base(m) == 1 + 3 * 100


def test_n_base_zero_movers_pure_loop_overhead():
    # s=0 removes the per-iteration data-movement term entirely
    m = LoopNestModel(s=0, L=(8,), I=(2,))
    assert n_base(m) == 1 + 2 * 8


def test_n_base_linear_in_s():
    base = [n_base(LoopNestModel(s=s, L=(16,), I=(1,))) for s in range(4)]
    diffs = [b - a for a, b in zip(base, base[1:])]
    assert len(set(diffs)) == 1  # constant increments: linear in s


def test_break_even_uniform_hypercube_thresholds():
    # smallest winning side per depth: 6, 3, 2, 2 -> iteration totals
    # just past 5, 4, 1, 1
    assert not break_even(1, [5])
    assert break_even(1, [6])
    assert not break_even(2, [2, 2])
    assert break_even(2, [3, 3])
    assert not break_even(3, [1, 1, 1])
    assert break_even(3, [2, 2, 2])
    assert not break_even(4, [1, 1, 1, 1])
    assert break_even(4, [2, 2, 2, 2])


def test_break_even_matches_count_comparison():
    rng = random.Random(42)
    for _ in range(500):
        d = rng.randint(1, 4)
        L = tuple(rng.randint(1, 16) for _ in range(d))
        I = tuple(rng.randint(0, 8) for _ in range(d))
        s = rng.randint(1, 2)
        m = LoopNestModel(s=s, L=L, I=I)
        assert (n_ssr(m) <= n_base(m)) == break_even(d, list(L))


def test_utilization_dot_product_limit_form():
    # single-stream 1-D reduction: N / (7 + N)
    assert n_ssr(hypercube(1, 100)) == 107
    assert utilization(1, 100) == pytest.approx(100 / 107)
    assert round(100 * utilization(1, 100)) == 93
    assert utilization(1, 1000) == pytest.approx(1000 / 1007)
    assert round(10 * 100 * utilization(1, 1000)) / 10 == 99.3


def test_utilization_bounds_and_growth():
    for d in (1, 2, 3, 4):
        last = 0.0
        for l in range(1, 40):
            u = utilization(d, l)
            assert 0 < u <= 1
            assert u >= last
            last = u
        assert utilization(d, 4000 if d == 1 else 64) > 0.9


def test_deeper_nests_need_longer_loops():
    # at equal total iteration counts, depth costs configuration overhead
    assert utilization(2, 4) < utilization(1, 16)   # 16 iterations each
    assert utilization(4, 2) < utilization(2, 4)    # 16 iterations each
    assert utilization(2, 8) < utilization(1, 64)   # 64 iterations each


def test_peak_utilization_classes():
    assert peak_utilization("single_issue_no_ssr") == pytest.approx(1 / 3)
    assert peak_utilization("single_issue_ssr") == 1.0
    assert peak_utilization("dual_issue") == 0.5
    assert peak_utilization("vector") == 1.0


def test_hot_loop_table_rows():
    rows = table1()
    got = [(r.kernel, r.arith, r.unroll, r.n_base, r.eta_base,
            r.n_ssr, r.eta_ssr, r.speedup) for r in rows]
    assert got == [
        ("standard", "int32", 1, 6, 17, 3, 33, 2.0),
        ("hwl", "int32", 1, 5, 20, 1, 100, 5.0),
        ("postincr", "int32", 2, 6, 33, 2, 100, 3.0),
        ("standard", "fp32", 1, 6, 17, 3, 33, 2.0),
        ("hwl", "fp32", 3, 11, 27, 3, 100, 3.7),
        ("postincr", "fp32", 3, 9, 33, 3, 100, 3.0),
    ]
