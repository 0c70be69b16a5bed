from __future__ import annotations

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qbplab import qinfo as qi
from qbplab.builders import build_mws_qbp, obdd_from_function, random_branching_qrobp, random_regular_qrobp
from qbplab.graph import restrict, validate
from qbplab.io import load, save
from qbplab.protocols import and_input_distribution, decomposition_gap, output_distribution, random_protocol, realify_protocol
from qbplab.rectlab import brs_partition, enumerate_sum_distribution, verify_partition, weighted_sum_distribution
from qbplab.sim import all_inputs, final_state, final_state_info, run

seeds = st.integers(min_value=0, max_value=2**32 - 1)
FAST = settings(max_examples=40, deadline=None)


def random_graph(n, width, seed, branching):
    return random_branching_qrobp(n, width, seed) if branching else random_regular_qrobp(n, width, seed)


@FAST
@given(st.integers(2, 4), st.integers(2, 4), seeds, st.booleans())
def test_valid_graphs_preserve_norm(n, width, seed, branching):
    g = random_graph(max(n, 4) if branching else n, width, seed, branching)
    assert validate(g, 1e-9).ok
    for z in all_inputs(g.num_vars):
        out = run(g, z)
        assert abs(out.p0 + out.p1 + out.residual - 1) <= 1e-9
        assert abs(np.linalg.norm(final_state(g, z)) - 1) <= 1e-9


@FAST
@given(st.integers(2, 4), st.integers(2, 3), seeds)
def test_serialization_roundtrip(n, width, seed):
    g = random_regular_qrobp(n, width, seed)
    assert load(save(g)) == g


@FAST
@given(st.integers(2, 4), st.integers(2, 3), seeds, st.data())
def test_restriction_commutes_with_simulation(n, width, seed, data):
    g = random_regular_qrobp(n, width, seed)
    var = data.draw(st.integers(1, n))
    bit = data.draw(st.integers(0, 1))
    r = restrict(g, {var: bit})
    for z in all_inputs(n):
        if z[var - 1] == bit:
            a, b = run(g, z), run(r, z)
            assert abs(a.p0 - b.p0) <= 1e-12 and abs(a.p1 - b.p1) <= 1e-12


@FAST
@given(st.integers(2, 4), st.integers(2, 4), seeds, st.lists(st.floats(0.05, 0.95), min_size=4, max_size=4))
def test_final_state_information_bounded_by_log_size(n, width, seed, marg):
    g = random_regular_qrobp(n, width, seed)
    dist = [(float(np.prod([m if b else 1 - m for m, b in zip(marg, z)])), z) for z in all_inputs(n)]
    info = final_state_info(g, dist)
    assert -1e-9 <= info <= math.log2(len(g.nodes)) + 1e-8


@FAST
@given(st.integers(2, 6), seeds)
def test_entropy_range_and_realification(dim, seed):
    rng = np.random.default_rng(seed)
    rho = qi.random_density(dim, rng, rank=int(rng.integers(1, dim + 1)))
    s = qi.entropy(rho)
    assert -1e-12 <= s <= math.log2(dim) + 1e-12
    assert abs(qi.entropy(qi.realify_state(rho)) - s) <= 1e-9


@FAST
@given(st.integers(2, 8), seeds)
def test_weak_inverse_triangle(dim, seed):
    rng = np.random.default_rng(seed)
    u, v, w = (qi.random_pure(dim, rng, real=True).real for _ in range(3))
    assert qi.weak_triangle_gap(u, v, w) >= -1e-12


@FAST
@given(st.integers(2, 4), seeds)
def test_local_transition_bound(dim, seed):
    rng = np.random.default_rng(seed)
    r0, r1 = qi.random_density(dim, rng), qi.random_density(dim, rng)
    res = qi.local_transition(r0, r1, qi.purify(r0), qi.purify(r1))
    assert res.distance <= res.bound + 1e-8
    assert abs(res.overlap - res.fidelity) <= 1e-7


@FAST
@given(seeds)
def test_pure_trace_distance_relation(seed):
    rng = np.random.default_rng(seed)
    a, b = qi.random_pure(3, rng), qi.random_pure(3, rng)
    td = qi.trace_distance(qi.projector(a), qi.projector(b))
    assert abs(td**2 - 4 * (1 - qi.fidelity(a, b) ** 2)) <= 1e-9


@FAST
@given(st.sampled_from([3, 5, 7, 11, 13]), st.data())
def test_sum_dp_matches_enumeration(q, data):
    n = data.draw(st.integers(1, min(10, q - 1)))
    coeffs = data.draw(st.permutations(range(1, q)))[:n]
    assert weighted_sum_distribution(q, coeffs).probs == enumerate_sum_distribution(q, coeffs)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.data())
def test_brs_partition_of_random_functions(n, data):
    table = data.draw(st.lists(st.integers(0, 1), min_size=4**n, max_size=4**n))
    order = tuple(data.draw(st.permutations(range(1, 2 * n + 1))))
    f = lambda z: table[int("".join(map(str, z)), 2)]
    g = obdd_from_function(2 * n, f, order)
    ell = data.draw(st.integers(1, n - 1))
    for merge in (True, False):
        assert verify_partition(g, brs_partition(g, ell, merge)).ok


@FAST
@given(seeds, st.integers(2, 4))
def test_decomposition_gap_nonnegative(seed, k):
    assert decomposition_gap(random_protocol(seed % 100000, k=k), and_input_distribution()) >= -1e-8


@FAST
@given(seeds)
def test_realified_protocol_outputs(seed):
    p = random_protocol(seed % 100000)
    r = realify_protocol(p)
    for z in p.inputs():
        a, b = output_distribution(p, z), output_distribution(r, z)
        assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) <= 1e-9


def test_mws_builder_is_deterministic():
    assert save(build_mws_qbp(3)) == save(build_mws_qbp(3))
