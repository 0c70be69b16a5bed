from __future__ import annotations

import numpy as np
import pytest

from qbplab import qinfo as qi
from qbplab.experiments import (
    and_frontier_rows,
    equidist_rows,
    fact_suite,
    grid_transition_overlap,
    ind_rect_row,
    loglog_slope,
    mws_scaling_rows,
    realification_suite,
    su2_grid,
    transition_suite,
)


def test_fact_suite_small():
    results = fact_suite(40, seed=1)
    assert len(results) == 11
    assert all(r.ok for r in results)


def test_su2_grid_is_unitary():
    grid = su2_grid(500)
    eye = np.einsum("gij,gkj->gik", grid, grid.conj())
    assert np.allclose(eye, np.eye(2), atol=1e-12)
    assert np.allclose(np.linalg.det(grid), 1, atol=1e-12)


def test_grid_never_beats_exact_optimum():
    rng = np.random.default_rng(2)
    grid = su2_grid(2000)
    for _ in range(10):
        r0, r1 = qi.random_density(2, rng), qi.random_density(2, rng)
        p0, p1 = qi.purify(r0), qi.purify(r1)
        exact = qi.local_transition(r0, r1, p0, p1).overlap
        assert grid_transition_overlap(p0, p1, 2, grid) <= exact + 1e-12


def test_transition_suite_exact_route():
    s = transition_suite(30, seed=3)
    assert s.overlap_mismatches == 0 and s.bound_violations == 0
    assert s.worst_overlap_gap <= 1e-8


def test_realification_suite():
    assert realification_suite(30).ok


def test_loglog_slope_of_exact_cubic():
    rows = [{"n": n, "nodes": 5 * n**3} for n in (4, 8, 16, 32)]
    assert loglog_slope(rows) == pytest.approx(3.0, abs=1e-12)


def test_mws_scaling_small():
    rows = mws_scaling_rows((4, 8))
    assert all(r["nodes"] <= r["bound"] for r in rows)


def test_equidist_rows_sum_to_one():
    rows = equidist_rows(7, 5)
    assert sum(r["probability"] for r in rows) == pytest.approx(1.0, abs=1e-15)
    assert all(abs(r["deviation"]) < 1 / 7 for r in rows)


def test_ind_rect_row():
    row = ind_rect_row(4, 0.25)
    assert row["maxA"] == row["ball"] == 5 and row["bound"] == pytest.approx(9.48, abs=0.01)


def test_and_frontier_rows():
    rows = and_frontier_rows(4)
    assert len(rows) == 1 + 24 + 4
    assert all(r["ok"] for r in rows)
