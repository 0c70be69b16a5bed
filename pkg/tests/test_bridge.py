from __future__ import annotations

import itertools

import numpy as np
import pytest

from qbplab.bridge import (
    DecompositionError,
    all_backgrounds,
    bridge_check,
    decompose,
    insert_dummy_chains,
    pair_vars,
    restricted_function,
    state_by_id,
    state_deviation,
    subspace_orthogonality_check,
    zero_and_backgrounds,
)
from qbplab.builders import build_disj_obdd, build_mws_qbp, random_branching_qrobp, random_regular_qrobp
from qbplab.functions import mws_eval
from qbplab.graph import restrict, validate
from qbplab.protocols import error_probability
from qbplab.sim import final_state, sink_depth, verify_function


def _steps_to_sink(graph, v):
    steps = 0
    while not graph.node(v).is_sink:
        succ = graph.successors(v)
        if not succ:
            return None
        v, steps = succ[0], steps + 1
    return steps


def _reaches_exit(graph, v, exits, t):
    while v not in exits:
        if graph.node(v).is_sink or graph.node(v).kind != "unlabeled":
            return False
        v = graph.successors(v)[0]
    return exits[v] == t


def test_pair_vars():
    assert pair_vars(6, 2) == (2, 5)
    assert pair_vars(3, (1, 3)) == (1, 3)
    with pytest.raises(ValueError):
        pair_vars(3, 1)
    with pytest.raises(ValueError):
        pair_vars(4, 3)


def test_zero_and_backgrounds():
    bgs = zero_and_backgrounds(6, 1)
    assert len(bgs) == 9
    for bg in bgs:
        assert set(bg) == {2, 3, 5, 6}
        assert not (bg[2] and bg[5]) and not (bg[3] and bg[6])
    assert len(all_backgrounds(4, 1)) == 4


def test_decomposition_mws_n2():
    r = restrict(build_mws_qbp(2), {2: 0, 4: 0})
    dec = decompose(r, (1, 3))
    alpha = dec.entry_amplitudes
    assert sum(abs(a) ** 2 for a in alpha.values()) == pytest.approx(1.0, abs=1e-9)
    assert not (dec.middle_x & dec.middle_y)


def test_decompose_rejects_non_read_once():
    with pytest.raises((DecompositionError, ValueError)):
        decompose(build_disj_obdd(2), (1, 3))  # not regular: x_k = 0 skips y_k


def test_dummy_chains_mws_n2():
    g = build_mws_qbp(2)
    r = restrict(g, {2: 0, 4: 0})
    dummy = insert_dummy_chains(r, (1, 3))
    assert validate(dummy.graph, 1e-9).ok
    for c, d in itertools.product((0, 1), repeat=2):
        z = (c, 0, d, 0)
        a = state_by_id(dummy.graph, final_state(dummy.graph, z, require_regular=False))
        b = state_by_id(r, final_state(r, z, require_regular=False))
        assert state_deviation(a, b) <= 1e-9


@pytest.mark.parametrize(
    "graph, pair, background",
    [
        (build_mws_qbp(2), 1, {2: 0, 4: 0}),
        (build_mws_qbp(3), 2, {1: 0, 4: 1, 3: 0, 6: 0}),
        (random_branching_qrobp(4, 3, 1), (2, 3), {1: 1, 4: 0}),
        (random_regular_qrobp(3, 4, 7), (2, 3), {1: 0}),
    ],
)
def test_dummy_chains_lengthen_bottom_by_one(graph, pair, background):
    r = restrict(graph, background)
    dummy = insert_dummy_chains(r, pair_vars(graph.num_vars, pair))
    dec = dummy.decomposition
    # every exit chain reaches the sinks one step later than the exit node it replaces
    g2 = dummy.graph
    for t in set(dec.T_x) | set(dec.T_y):
        heads = {e.dst for e in g2.edges if e.src in dec.middle_x | dec.middle_y and e.dst not in dec.middle_x | dec.middle_y}
        starts = [h for h in heads if _steps_to_sink(g2, h) is not None and _reaches_exit(g2, h, dummy.exits, t)]
        assert starts or r.node(t).is_sink
        for h in starts:
            assert _steps_to_sink(g2, h) == _steps_to_sink(r, t) + 1
    top_extra = 1 if any(dec.d_source[v] == 0 for v in dec.entry_amplitudes) else 0
    assert sink_depth(dummy.graph) == sink_depth(r) + 1 + top_extra


def test_bridge_mws_n2_all_zero_and_backgrounds():
    g = build_mws_qbp(2)
    eps = verify_function(g, mws_eval).worst_error
    for i in (1, 2):
        for bg in zero_and_backgrounds(4, i):
            rep, ext = bridge_check(g, i, bg)
            assert rep.passed
            err, _ = error_probability(ext.protocol, restricted_function(mws_eval, 4, i, bg))
            assert err <= eps + 1e-9


def test_bridge_random_regular_example():
    g = random_regular_qrobp(3, 4, 7)
    rng = np.random.default_rng(0)
    bits = tuple(int(b) for b in rng.integers(0, 2, 1))
    rep, _ = bridge_check(g, (2, 3), {1: bits[0]})
    assert rep.passed and rep.protocol_deviation <= 1e-9


def test_bridge_two_sided_branching():
    g = random_branching_qrobp(4, 3, 1)
    rep, ext = bridge_check(g, (2, 3), {1: 1, 4: 0})
    assert rep.degenerate is None and rep.passed
    assert ext.protocol.k == 2
    for state in ext.alice_states.values():
        assert np.linalg.norm(state) == pytest.approx(1.0, abs=1e-9)
    orth = subspace_orthogonality_check(insert_dummy_chains(restrict(g, {1: 1, 4: 0}), (2, 3)))
    assert orth.passed


def test_restricted_function():
    f = restricted_function(mws_eval, 4, 1, {2: 0, 4: 0})
    for c, d in itertools.product((0, 1), repeat=2):
        assert f((c, d)) == mws_eval((c, 0, d, 0))
