from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest

from qbplab.builders import build_disj_obdd, build_mws_qbp, obdd_from_function
from qbplab.functions import disj_eval, mws_eval
from qbplab.graph import restrict
from qbplab.rectlab import (
    ball_entropy_bound,
    best_ind_rectangle,
    brs_partition,
    deterministic_eval,
    difficult_distribution,
    enumerate_sum_distribution,
    hamming_ball_size,
    verify_partition,
    weighted_sum_distribution,
)


def test_hamming_ball_and_entropy_bound():
    assert hamming_ball_size(12, 1) == 13
    assert ball_entropy_bound(12, 1 / 12) == pytest.approx(31.3, abs=0.05)
    assert hamming_ball_size(4, 1) == 5
    with pytest.raises(ValueError):
        hamming_ball_size(3, 4)


def test_weighted_sum_example():
    dist = weighted_sum_distribution(5, [1, 2, 3, 4])
    assert dist.probs[1] == Fraction(3, 16)
    assert dist.probs == enumerate_sum_distribution(5, [1, 2, 3, 4])
    assert sum(dist.probs) == 1


def test_weighted_sum_float_matches_exact():
    exact = weighted_sum_distribution(13, list(range(1, 13)))
    approx = weighted_sum_distribution(13, list(range(1, 13)), exact=False)
    for a, b in zip(exact.probs, approx.probs):
        assert float(a) == pytest.approx(b, abs=1e-15)
    assert exact.max_deviation == pytest.approx(approx.max_deviation, abs=1e-15)


def test_weighted_sum_rejects_bad_input():
    with pytest.raises(ValueError):
        weighted_sum_distribution(6, [1, 2])
    with pytest.raises(ValueError):
        weighted_sum_distribution(5, [1, 6])
    with pytest.raises(ValueError):
        weighted_sum_distribution(5, [5])


def test_weighted_sum_large_float():
    dist = weighted_sum_distribution(10007, list(range(1, 10001)), exact=False)
    assert sum(dist.probs) == pytest.approx(1.0, abs=1e-9)
    assert dist.max_deviation < 1e-6


def test_difficult_distribution_n2():
    d = difficult_distribution(2)
    assert d.p == 3 and d.residue_counts == (2, 1, 1) and d.size == 6
    assert d.uniform_measure() == Fraction(3, 8)
    assert d.mass((0, 0), (1, 1)) == Fraction(1, 6)  # both sums are 0 mod 3
    assert d.mass((1, 0), (0, 1)) == 0


def test_difficult_distribution_size_matches_counts():
    for n in range(1, 7):
        d = difficult_distribution(n)
        assert d.size == sum(c * c for c in d.residue_counts)


@pytest.mark.parametrize("n, eps, expected", [(2, 0.0, 1), (4, 0.25, 5), (3, 1 / 3, 4)])
def test_best_ind_rectangle(n, eps, expected):
    best, (r, members) = best_ind_rectangle(n, eps)
    assert best == expected == len(members)
    radius = math.floor(eps * n + 1e-12)
    assert all(sum(u != v for u, v in zip(a, r)) <= radius for a in members)
    assert best <= ball_entropy_bound(n, eps) + 1e-9


def test_ind_methods_agree():
    for n in (1, 2, 3):
        for eps in (0, 1 / 3, 1 / 2):
            assert best_ind_rectangle(n, eps, "subsets")[0] == best_ind_rectangle(n, eps, "balls")[0]


def test_brs_disj2_partition():
    g = build_disj_obdd(2)
    for merge in (True, False):
        rects = brs_partition(g, 1, merge)
        check = verify_partition(g, rects)
        assert check.ok
        assert check.count <= 2 * 2 * len(g.nodes)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_brs_on_mws_obdds(n):
    g = obdd_from_function(2 * n, mws_eval)
    for ell in range(1, n):
        assert verify_partition(g, brs_partition(g, ell)).ok


def test_brs_on_restricted_obdd():
    g = restrict(obdd_from_function(6, mws_eval), {2: 1})
    assert verify_partition(g, brs_partition(g, 2)).ok


def test_brs_rejects_quantum_graphs():
    with pytest.raises(ValueError):
        brs_partition(build_mws_qbp(2), 1)


def test_deterministic_eval_matches_function():
    g = build_disj_obdd(3)
    for z in itertools.product((0, 1), repeat=6):
        assert deterministic_eval(g, z) == disj_eval(z)


def test_verify_partition_detects_overlap():
    g = build_disj_obdd(2)
    rects = brs_partition(g, 1)
    check = verify_partition(g, rects + rects[:1])
    assert not check.disjoint_cover and not check.ok
