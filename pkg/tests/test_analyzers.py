import itertools
import math

import numpy as np
import pytest

from randsets.analyzers import (ap_block_events, aps_csv, block_counts, block_counts_csv, block_edges, find_aps,
                                floor_pow, gap_sequence, gaps_csv, intersect_bounded_gap, lacunarity_stats,
                                max_block_index)
from randsets.errors import ConfigError
from randsets.realization import Realization
from randsets.sets import BoundedGapSet


def R(xs, N=None):
    return Realization.from_indices(xs, N)


def brute_aps(xs, l):
    s = set(xs)
    top = max(xs, default=0)
    return sorted((i, d) for i in xs for d in range(1, top + 1)
                  if i + (l - 1) * d <= top and all(i + j * d in s for j in range(l)))


def test_block_count_examples():
    assert block_counts(R([3, 5, 20], 32), 2, 1, 4).counts.tolist() == [1, 1, 0, 1]
    assert block_counts(R([], 32), 2, 1, 4).counts.tolist() == [0, 0, 0, 0]
    full = block_counts(R(range(1, 33)), 2, 1, 4)
    assert full.counts.tolist() == [2, 4, 8, 16]
    assert full.block_lengths.tolist() == [2, 4, 8, 16]


def test_block_window_beyond_range_rejected():
    with pytest.raises(ConfigError):
        block_counts(R([3], 20), 2, 1, 4)


def test_block_counts_against_linear_count():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a = float(rng.choice([1.5, 2.0, 3.0, math.e]))
        N = int(rng.integers(20, 300))
        xs = np.flatnonzero(rng.random(N) < rng.random()) + 1
        r = R(xs, N)
        last = max_block_index(a, N, 0)
        if last < 0:
            continue
        bc = block_counts(r, a, 0, last)
        for n, c, L in zip(bc.ns, bc.counts, bc.block_lengths):
            lo, hi = math.floor(a**n), math.floor(a ** (n + 1))
            assert c == sum(lo < x <= hi for x in xs.tolist())
            assert L == hi - lo
            assert a ** (n + 1) - a**n - 1 <= L <= a ** (n + 1) - a**n + 1
        assert bc.counts.sum() == np.count_nonzero((xs > floor_pow(a, 0)) & (xs <= floor_pow(a, last + 1)))


def test_floor_pow_is_exact():
    assert floor_pow(2, 62) == 2**62
    assert floor_pow(1.5, 40) == math.floor(__import__("fractions").Fraction(1.5) ** 40)
    assert block_edges(2, 0, 3).tolist() == [1, 2, 4, 8, 16]


def test_gap_examples():
    g = gap_sequence(R([2, 5, 11, 30]))
    assert g.gaps.tolist() == [3, 6, 19]
    assert gap_sequence(R([1, 2])).gaps.tolist() == [1]
    assert gap_sequence(R([7])).gaps.tolist() == []
    assert gap_sequence(R([2, 4, 6])).pair_coincidences(2) == 2
    assert g.tail_min_gap(2) == 6


def test_gap_invariants_random():
    rng = np.random.default_rng(1)
    for _ in range(200):
        xs = np.unique(rng.integers(1, 1000, size=int(rng.integers(2, 50))))
        g = gap_sequence(R(xs))
        assert g.gaps.size == xs.size - 1 and np.all(g.gaps >= 1)
        assert g.gaps.sum() == xs[-1] - xs[0]
        for l in (1, 2, 5):
            assert g.pair_coincidences(l) == sum(x + l in set(xs.tolist()) for x in xs.tolist())


def test_lacunarity_examples():
    r = R([2, 5, 11, 30], 32)
    st = lacunarity_stats(r, block_counts(R([3, 5, 20], 32), 2, 1, 4))
    assert st.ratios.tolist() == pytest.approx([2.5, 2.2, 30 / 11])
    assert st.tail_inf(3) == pytest.approx(2.2)
    assert st.adjacent_block_products.tolist() == [1, 0, 0]
    k = 10**6
    assert lacunarity_stats(R([k, k + 1])).ratios[0] == pytest.approx(1 + 1e-6)


def test_find_aps_examples():
    rep = find_aps(R([1, 2, 3, 5, 7, 9]), 3)
    assert rep.count == 5
    assert sorted(rep.instances) == [(1, 1), (1, 2), (1, 4), (3, 2), (5, 2)]
    assert find_aps(R([1, 2, 4, 8, 16]), 3).count == 0
    assert find_aps(R(range(1, 11)), 3).count == sum(10 - 2 * d for d in range(1, 5)) == len(brute_aps(range(1, 11), 3))


def test_find_aps_exhaustive_small_subsets():
    # every subset of [1, 12] with at most 6 elements
    for size in range(0, 7):
        for xs in itertools.combinations(range(1, 13), size):
            rep = find_aps(R(xs, 12), 3)
            want = brute_aps(xs, 3)
            assert rep.count == len(want)
            assert sorted(rep.instances) == want


@pytest.mark.parametrize("l", [4, 5])
def test_find_aps_longer_lengths(l):
    rng = np.random.default_rng(l)
    for _ in range(200):
        xs = sorted(set(rng.integers(1, 60, size=20).tolist()))
        assert find_aps(R(xs), l).count == len(brute_aps(xs, l))


def test_find_aps_caps():
    rep = find_aps(R(range(1, 101)), 3, cap=10)
    assert rep.count == sum(100 - 2 * d for d in range(1, 50))
    assert len(rep.instances) == 10 and rep.truncated
    assert find_aps(R(range(1, 101)), 3, count_cap=7).count == 7
    with pytest.raises(ConfigError):
        find_aps(R([1, 2]), 2)


def test_ap_count_monotone_in_range():
    rng = np.random.default_rng(9)
    xs = np.flatnonzero(rng.random(400) < 0.2) + 1
    counts = [find_aps(R(xs[xs <= N], N), 3).count for N in (100, 200, 300, 400)]
    assert counts == sorted(counts)


def test_block_events_examples():
    assert ap_block_events(R(range(1, 13)), 3, 3) == [0, 1, 2, 3]
    assert ap_block_events(R([1, 2, 3], 9), 3, 2) == [0]
    assert ap_block_events(R([], 9), 3, 2) == []
    with pytest.raises(ConfigError):
        ap_block_events(R([1, 2, 3], 5), 3, 2)


def test_intersect_examples():
    ev = BoundedGapSet.evens()
    assert intersect_bounded_gap(R([2, 5, 11]), ev) == (True, 2)
    assert intersect_bounded_gap(R([1, 3, 5]), ev) == (False, None)
    assert intersect_bounded_gap(R([], 5), ev) == (False, None)


def test_csv_emitters():
    assert gaps_csv(gap_sequence(R([2, 5, 11, 30]))).splitlines()[:3] == ["k,n_k,gap,ratio", "1,2,3,2.5",
                                                                          "2,5,6,2.2"]
    text = block_counts_csv(block_counts(R([3, 5, 20], 32), 2, 1, 4))
    assert text.splitlines() == ["n,N_n,L_n,product_with_next", "1,1,2,1", "2,1,4,0", "3,0,8,0", "4,1,16,"]
    assert "\r" not in text
    assert aps_csv(find_aps(R([1, 2, 3]), 3)) == "i,d,l\n1,1,3\n"
    assert gaps_csv(gap_sequence(R([], 5))) == "k,n_k,gap,ratio\n"
