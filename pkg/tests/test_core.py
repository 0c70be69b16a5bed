from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from qbplab.builders import build_disj_obdd, build_mws_qbp, random_regular_qrobp
from qbplab.functions import disj_eval, mws_eval
from qbplab.graph import (
    SINK,
    UNLABELED,
    VAR,
    Edge,
    InvalidGraphError,
    Node,
    QbpGraph,
    StructureError,
    classify,
    expand_unlabeled,
    relabel_sinks,
    require_valid,
    restrict,
    validate,
)
from qbplab.io import ParseError, load, save, to_dot
from qbplab.sim import all_inputs, final_state, final_state_info, run, verify_function

H = 1 / math.sqrt(2)


def hadamard_graph() -> QbpGraph:
    """x1 node sending |0> to (|a>+|b>)/sqrt2 and |1> to (|a>-|b>)/sqrt2, then sinks."""
    nodes = [Node(0, VAR, var=1), Node(1, SINK, label=0), Node(2, SINK, label=1)]
    edges = [Edge(0, 1, 0, H), Edge(0, 2, 0, H), Edge(0, 1, 1, H), Edge(0, 2, 1, -H)]
    return QbpGraph(1, nodes, edges, 0)


# -- graph model --------------------------------------------------------------------------------


def test_structure_errors():
    with pytest.raises(StructureError):
        QbpGraph(1, [Node(0, VAR, var=2)], [], 0)
    with pytest.raises(StructureError):
        QbpGraph(1, [Node(0, SINK, label=0)], [], 5)
    with pytest.raises(StructureError):
        QbpGraph(1, [Node(0, SINK, label=0), Node(1, SINK, label=1)], [Edge(0, 1, 0, 1)], 0)
    with pytest.raises(StructureError):
        QbpGraph(1, [Node(0, UNLABELED), Node(1, SINK, label=1)], [Edge(0, 1, 0, 1)], 0)
    with pytest.raises(StructureError):
        QbpGraph(1, [Node(0, VAR, var=1), Node(0, SINK, label=1)], [], 0)


def test_validate_hadamard_and_broken():
    assert validate(hadamard_graph()).ok
    nodes = [Node(0, VAR, var=1), Node(1, SINK, label=0), Node(2, SINK, label=1)]
    bad = QbpGraph(1, nodes, [Edge(0, 1, 0, 0.5), Edge(0, 2, 1, 1)], 0)
    rep = validate(bad)
    assert not rep.well_formed and rep.violations
    with pytest.raises(InvalidGraphError):
        require_valid(bad, allow_deterministic=False)


def test_unidirectional_violation():
    nodes = [Node(0, VAR, var=1), Node(1, VAR, var=2), Node(2, VAR, var=2), Node(3, SINK, label=0), Node(4, SINK, label=1)]
    edges = [Edge(0, 1, 0, 1), Edge(0, 3, 1, 1), Edge(1, 4, 0, 1), Edge(1, 3, 1, 1), Edge(2, 3, 0, 1), Edge(2, 4, 1, 1)]
    # node 3 has predecessors reading x1 and x2
    rep = validate(QbpGraph(2, nodes, edges, 0))
    assert not rep.unidirectional


def test_classify_mws_strict_n2():
    info = classify(build_mws_qbp(2, strict=True))
    assert info.read_once and info.regular_read_once and info.obdd_order is None


def test_classify_disj_is_obdd():
    info = classify(build_disj_obdd(3))
    assert info.read_once and info.obdd_order == (1, 4, 2, 5, 3, 6)
    assert not info.regular_read_once  # x_k = 0 skips y_k


def test_expand_unlabeled_dummy_variable():
    g = restrict(build_disj_obdd(2), {1: 1})
    e = expand_unlabeled(g)
    assert e.num_vars == g.num_vars + 1
    fixed = [n for n in e.nodes if n.kind == VAR and n.var == e.num_vars]
    assert fixed
    for n in fixed:
        assert [(d, a) for d, a in e.rows()[n.id][0]] == [(d, a) for d, a in e.rows()[n.id][1]]
    for z in all_inputs(4):
        for dummy in (0, 1):
            assert run(e, z + (dummy,)) == run(g, z)


def test_restrict_matches_full_simulation():
    g = build_mws_qbp(2, strict=True)
    r = restrict(g, {2: 0, 4: 0})
    for c, d in itertools.product((0, 1), repeat=2):
        full = run(g, (c, 0, d, 0))
        assert run(r, (c, 0, d, 0)) == full
        assert run(r, (c, 1, d, 1)) == full  # fixed bits are ignored


def test_relabel_sinks_flips_output():
    g = build_disj_obdd(2)
    f = relabel_sinks(g)
    for z in all_inputs(4):
        a, b = run(g, z), run(f, z)
        assert (a.p0, a.p1) == (b.p1, b.p0)


# -- serialization --------------------------------------------------------------------------------


def test_roundtrip_is_exact():
    for g in (build_mws_qbp(2), random_regular_qrobp(3, 3, 1), hadamard_graph()):
        data = save(g)
        assert load(data) == g
        assert save(load(data)) == data


def test_parse_errors():
    data = save(build_disj_obdd(2))
    with pytest.raises(ParseError):
        load(data[: len(data) // 2])
    with pytest.raises(ParseError, match="version"):
        load(b'{"version": 9, "num_vars": 1, "start": 0, "nodes": [], "edges": []}')
    with pytest.raises(ParseError, match="structure"):
        load(b'{"version": 1, "num_vars": 1, "start": 3, "nodes": [], "edges": []}')


def test_dot_export_lists_every_node():
    g = build_disj_obdd(2)
    dot = to_dot(g)
    assert dot.startswith("digraph")
    for n in g.nodes:
        assert f"{n.id}" in dot


# -- simulation -----------------------------------------------------------------------------------


def test_hadamard_run():
    out = run(hadamard_graph(), (0,))
    assert out.p0 == pytest.approx(0.5) and out.p1 == pytest.approx(0.5) and out.residual == pytest.approx(0)


def test_start_node_sink_halts_immediately():
    g = QbpGraph(0, [Node(0, SINK, label=1)], [], 0)
    out = run(g, ())
    assert (out.p0, out.p1, out.residual) == (0.0, 1.0, 0.0)


def test_mws_n2_example_input():
    out = run(build_mws_qbp(2), (1, 0, 1, 0))
    assert out.p0 == pytest.approx(1.0, abs=1e-12)
    assert mws_eval((1, 0, 1, 0)) == 0


def test_mws_n2_final_states_unit_norm():
    g = build_mws_qbp(2)
    for z in all_inputs(4):
        assert np.linalg.norm(final_state(g, z)) == pytest.approx(1.0, abs=1e-12)


def test_final_state_info_mws_n2_uniform():
    g = build_mws_qbp(2)
    zs = list(all_inputs(4))
    info = final_state_info(g, [(1 / 16, z) for z in zs])
    # dense oracle: entropy of the average final state
    rho = sum(np.outer(final_state(g, z), final_state(g, z).conj()) for z in zs) / 16
    ev = np.linalg.eigvalsh(rho)
    ev = ev[ev > 1e-14]
    assert info == pytest.approx(float(-(ev * np.log2(ev)).sum()), abs=1e-9)
    assert info == pytest.approx(3.625, abs=1e-9)
    assert info <= math.log2(len(g.nodes))


def test_verify_disj_and_fault_detection():
    g = build_disj_obdd(3)
    assert verify_function(g, disj_eval).passed
    rep = verify_function(relabel_sinks(g), disj_eval)
    assert not rep.passed and rep.worst_error == 1.0 and rep.worst_input == (0, 0, 0, 0, 0, 0)


def test_verify_parallel_matches_serial():
    g = build_mws_qbp(6)
    a = verify_function(g, mws_eval, jobs=1)
    b = verify_function(g, mws_eval, jobs=3)
    assert a == b and a.passed


def test_random_regular_example_is_valid_and_norm_preserving():
    g = random_regular_qrobp(3, 4, 7)
    assert validate(g, 1e-9).ok
    for z in all_inputs(3):
        out = run(g, z)
        assert out.p0 + out.p1 + out.residual == pytest.approx(1.0, abs=1e-12)
        assert out.residual == pytest.approx(0.0, abs=1e-12)
