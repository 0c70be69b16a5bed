"""Acceptance criteria 1-12 as callable checks with measured values and tolerances."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qinfo as qi
from .bridge import all_backgrounds, bridge_check, pair_vars, restricted_function, zero_and_backgrounds
from .builders import (
    STRICT_SIZE_CONSTANT,
    build_disj_obdd,
    build_mws_qbp,
    obdd_from_function,
    random_branching_qrobp,
    random_regular_qrobp,
)
from .experiments import fact_suite, loglog_slope, mws_scaling_rows, realification_suite, transition_suite
from .functions import disj_eval, mws_eval
from .graph import classify, restrict, validate
from .protocols import (
    and_information_check,
    and_input_distribution,
    and_library,
    build_xor_protocol,
    decomposition_gap,
    error_probability,
    information_cost,
    output_distribution,
    random_protocol,
    realify_protocol,
    subprotocol_information,
    xor_eval,
)
from .rectlab import (
    ball_entropy_bound,
    best_ind_rectangle,
    brs_partition,
    enumerate_sum_distribution,
    hamming_ball_size,
    verify_partition,
    weighted_sum_distribution,
)
from .functions import is_prime
from .sim import all_inputs, final_state, final_state_info, run, verify_function


@dataclass(frozen=True)
class CriterionResult:
    index: int
    title: str
    passed: bool
    measured: str
    tolerance: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.index:2d} {self.title}: {self.measured} (tol {self.tolerance}, {self.seconds:.1f}s)"


def _g(x: float) -> str:
    return repr(float(x))


# -- 1-3: constructions ---------------------------------------------------------------------------------


def criterion_1(jobs: int = 1, max_n: int = 8):
    worst, notes, ok = 0.0, [], True
    for n in range(2, max_n + 1):
        g = build_mws_qbp(n, strict=True)
        info = classify(g)
        rep = verify_function(g, mws_eval, tol=1e-9, jobs=jobs)
        ok &= validate(g, 1e-9).ok and info.regular_read_once and info.obdd_order is None and rep.passed
        worst = max(worst, rep.worst_error)
    return ok, f"worst_error={_g(worst)} n=2..{max_n}", "1e-9"


def criterion_2():
    rows = mws_scaling_rows()
    slope = loglog_slope(rows)
    ok = all(r["nodes"] <= r["bound"] for r in rows) and slope <= 3.2
    sizes = ",".join(f"{r['n']}:{r['nodes']}/{r['bound']}" for r in rows)
    return ok, f"C={STRICT_SIZE_CONSTANT} nodes/bound={sizes} slope={slope:.4f}", "slope<=3.2"


def criterion_3():
    ok, worst = True, 0.0
    for n in range(1, 9):
        g = build_disj_obdd(n)
        rep = verify_function(g, disj_eval)
        ok &= len(g.nodes) == 2 * n + 2 and rep.passed
        worst = max(worst, rep.worst_error)
    return ok, f"nodes=2n+2 worst_error={_g(worst)} n=1..8", "1e-9"


# -- 4-6, 9: protocols ----------------------------------------------------------------------------------


def criterion_4():
    p = build_xor_protocol()
    dist = and_input_distribution()
    eps, _ = error_probability(p, xor_eval)
    ic = information_cost(p, dist)
    sub = max(subprotocol_information(p, i, dist) for i in range(p.k))
    ok = eps <= 1e-9 and abs(ic) <= 1e-9 and sub <= 1e-9
    return ok, f"error={_g(eps)} ic={_g(ic)} max_sub_mi={_g(sub)}", "1e-9"


def criterion_5():
    start = time.perf_counter()
    lib = and_library()
    checks = [and_information_check(p) for _, p in lib]
    applicable = [c for c in checks if c.applicable]
    margin = min((c.ic - c.bound for c in applicable), default=math.inf)
    elapsed = time.perf_counter() - start
    ok = all(c.ok for c in checks) and elapsed <= 60 and len(lib) >= 221
    return ok, f"protocols={len(lib)} applicable={len(applicable)} min(ic-bound)={_g(margin)} time={elapsed:.1f}s", "1e-6"


def protocol_test_library():
    lib = [(name, p) for name, p in and_library()]
    lib.append(("xor", build_xor_protocol()))
    lib += [(f"random-k{k}:{s}", random_protocol(1000 + s, k=k)) for k in (3, 4) for s in range(25)]
    return lib


def criterion_6():
    dist = and_input_distribution()
    gaps = [decomposition_gap(p, dist) for _, p in protocol_test_library()]
    worst = min(gaps)
    return worst >= -1e-8, f"protocols={len(gaps)} min_gap={_g(worst)}", "-1e-8"


def phase_gate_protocol():
    """One block where Bob applies diag(1, i) to a |+> message before a Hadamard readout."""
    from .protocols import PartitionSpec, Subprotocol, assemble, per_value

    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    s = np.diag([1, 1j])
    alice = {a: (np.diag([1, -1]) if a else np.eye(2)) @ h for a in (0, 1)}
    bob = {b: h @ (s if b else np.eye(2)) for b in (0, 1)}
    sub = Subprotocol(PartitionSpec((1,), (2,)), np.array([1, 0], dtype=complex), per_value(alice), per_value(bob))
    m1 = np.diag([0.0, 1.0]).astype(complex)
    return assemble(2, [sub], [1.0], [(np.eye(2) - m1, m1)])


def criterion_9():
    ent = realification_suite(200)
    worst = 0.0
    lib = protocol_test_library()[::5] + [("phase", phase_gate_protocol())]
    for _, p in lib:
        r = realify_protocol(p)
        for z in itertools.product((0, 1), repeat=p.num_vars):
            worst = max(worst, float(np.max(np.abs(np.subtract(output_distribution(p, z), output_distribution(r, z))))))
    ok = ent.ok and worst <= 1e-9
    return ok, f"entropy_worst={_g(ent.worst)} protocols={len(lib)} output_worst={_g(worst)}", "1e-9"


# -- 7-8: quantum information facts ---------------------------------------------------------------------


def criterion_7():
    results = fact_suite(500, seed=7, tol=1e-8)
    bad = {r.name: r.violations for r in results if not r.ok}
    summary = " ".join(f"{r.name}:{r.violations}" for r in results)
    return not bad, f"violations {summary}", "1e-8"


def criterion_8():
    s = transition_suite(200, seed=8)
    measured = (
        f"overlap_mismatch={s.overlap_mismatches} worst={_g(s.worst_overlap_gap)} bound_violations={s.bound_violations} "
        f"grid_mismatch={s.grid_mismatches}/{s.grid_trials} worst_grid_gap={_g(s.worst_grid_gap)}"
    )
    return s.ok, measured, "1e-8 / grid 1e-3"


# -- 10-11: bridge and final-state information ----------------------------------------------------------------


def bridge_graph_set():
    """(name, graph, pairs, backgrounds per pair, reference function or None)."""
    out = []
    for n in (2, 3):
        g = build_mws_qbp(n, strict=True)
        pairs = list(range(1, n + 1))
        out.append((f"mws{n}", g, [(i, zero_and_backgrounds(2 * n, i)) for i in pairs], mws_eval))
    for seed in range(50):
        width = 2 + seed % 3
        if seed % 2 == 0:
            n = 2 + (seed // 2) % 3
            g = random_regular_qrobp(n, width, seed)
            name = f"ordered{n}w{width}s{seed}"
        else:
            n = 4
            g = random_branching_qrobp(n, width, seed)
            name = f"branching{n}w{width}s{seed}"
        pairs = list(itertools.combinations(range(1, n + 1), 2))
        out.append((name, g, [(pr, all_backgrounds(n, pr)) for pr in pairs], None))
    return out


def _majority_reference(g):
    table = {}
    for z in all_inputs(g.num_vars):
        out = run(g, z)
        table[z] = int(out.p1 >= out.p0)
    return lambda z: table[tuple(z)]


def criterion_10():
    worst_state = worst_orth = worst_excess = 0.0
    cases = two_sided = 0
    ok = True
    for name, g, plan, f in bridge_graph_set():
        ref = f or _majority_reference(g)
        eps = verify_function(g, ref, epsilon=1.0).worst_error
        for pair, backgrounds in plan:
            for bg in backgrounds:
                rep, ext = bridge_check(g, pair, bg)
                cases += 1
                two_sided += rep.degenerate is None
                worst_state = max(worst_state, rep.protocol_deviation, rep.dummy_deviation)
                worst_orth = max(worst_orth, rep.orthogonality)
                err, _ = error_probability(ext.protocol, restricted_function(ref, g.num_vars, pair, bg))
                worst_excess = max(worst_excess, err - eps)
                ok &= rep.passed and err <= eps + 1e-9
    measured = (
        f"cases={cases} two_sided={two_sided} state_dev={_g(worst_state)} "
        f"orth={_g(worst_orth)} error_excess={_g(worst_excess)}"
    )
    return ok, measured, "1e-9"


def _info_second_route(g, dist) -> float:
    """I(G(Z):Z) as a classical-quantum mutual information over the support nodes."""
    vecs = [(p, z, final_state(g, z)) for p, z in dist if p > 0]
    support = np.flatnonzero(np.any(np.abs(np.array([v for _, _, v in vecs])) > 0, axis=0))
    return qi.cq_mutual_info([(p, z, np.outer(v[support], v[support].conj())) for p, z, v in vecs])


def criterion_11():
    rng = np.random.default_rng(11)
    worst_excess = -math.inf
    worst_route = 0.0
    count = 0
    ok = True
    for name, g, _, _ in bridge_graph_set():
        n = g.num_vars
        inputs = list(all_inputs(n))
        marg = rng.uniform(0.1, 0.9, n)
        dists = {
            "uniform": [(1 / len(inputs), z) for z in inputs],
            "bernoulli": [(float(np.prod([m if b else 1 - m for m, b in zip(marg, z)])), z) for z in inputs],
        }
        for dist in dists.values():
            try:
                info = final_state_info(g, dist, tol=1e-8)
            except qi.BoundViolation:
                ok = False
                continue
            other = _info_second_route(g, dist)
            worst_route = max(worst_route, abs(info - other))
            worst_excess = max(worst_excess, info - math.log2(len(g.nodes)))
            ok &= abs(info - other) <= 1e-8
            count += 1
    return ok, f"cases={count} max(I-log2|G|)={_g(worst_excess)} route_gap={_g(worst_route)}", "1e-8"


# -- 12: rect-lab -------------------------------------------------------------------------------------


def criterion_12():
    ok = True
    pairs = 0
    for q in (p for p in range(2, 14) if is_prime(p)):
        for n in range(1, min(16, q - 1) + 1):
            coeffs = list(range(1, n + 1))
            ok &= weighted_sum_distribution(q, coeffs).probs == enumerate_sum_distribution(q, coeffs)
            pairs += 1
    graphs = [(f"disj{n}", build_disj_obdd(n)) for n in range(2, 7)]
    for n in range(2, 7):
        g = obdd_from_function(2 * n, mws_eval)
        graphs.append((f"mws{n}", g))
        graphs.append((f"mws{n}|x1=1", restrict(g, {1: 1})))
    rects = 0
    for _, g in graphs:
        half = g.num_vars // 2
        for ell in range(1, half):
            for merge in (True, False):
                r = brs_partition(g, ell, merge)
                rects += len(r)
                ok &= verify_partition(g, r).ok
    ind = 0
    for n in range(1, 5):
        for eps in (0, 1 / 8, 1 / 4, 1 / 3, 3 / 8, 1 / 2):
            best, _ = best_ind_rectangle(n, eps, "balls")
            if n <= 3:
                ok &= best == best_ind_rectangle(n, eps, "subsets")[0]
            ok &= best == hamming_ball_size(n, math.floor(eps * n + 1e-12)) and best <= ball_entropy_bound(n, eps) + 1e-9
            ind += 1
    return ok, f"sum_dists={pairs} partitions_on={len(graphs)} rectangles={rects} ind_cases={ind}", "exact"


CRITERIA: dict[int, tuple[str, Callable]] = {
    1: ("MWS exactness", criterion_1),
    2: ("MWS size scaling", criterion_2),
    3: ("DISJ OBDD", criterion_3),
    4: ("XOR protocol", criterion_4),
    5: ("AND information bound", criterion_5),
    6: ("IC concavity", criterion_6),
    7: ("Fact suites", criterion_7),
    8: ("Local transition", criterion_8),
    9: ("Realification", criterion_9),
    10: ("Bridge pipeline", criterion_10),
    11: ("Final-state information", criterion_11),
    12: ("Rectangle oracles", criterion_12),
}


def run_criterion(index: int, jobs: int = 1) -> CriterionResult:
    title, fn = CRITERIA[index]
    start = time.perf_counter()
    try:
        passed, measured, tol = fn(jobs=jobs) if index == 1 else fn()
    except Exception as exc:  # a crash counts as a failure with its message
        passed, measured, tol = False, f"error: {type(exc).__name__}: {exc}", "-"
    return CriterionResult(index, title, bool(passed), measured, tol, time.perf_counter() - start)


def run_acceptance_suite(only=None, jobs: int = 1) -> list[CriterionResult]:
    return [run_criterion(i, jobs) for i in sorted(only or CRITERIA)]


def results_csv(results: list[CriterionResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["criterion", "title", "passed", "measured", "tolerance"])
    for r in results:
        w.writerow([r.index, r.title, str(r.passed).lower(), r.measured, r.tolerance])
    return buf.getvalue()
