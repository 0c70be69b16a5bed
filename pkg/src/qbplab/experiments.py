"""Randomized identity suites and experiment row generators shared by the CLI and tests."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import qinfo as qi
from .builders import STRICT_SIZE_CONSTANT, build_mws_qbp, strict_size_bound
from .functions import smallest_prime_after
from .protocols import and_information_check, and_library
from .rectlab import ball_entropy_bound, best_ind_rectangle, hamming_ball_size, weighted_sum_distribution


@dataclass(frozen=True)
class SuiteResult:
    name: str
    trials: int
    violations: int
    worst: float  # largest violation margin seen (<= 0 means none)

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _tally(name: str, margins: list[float], tol: float) -> SuiteResult:
    """Each margin is 'amount by which the identity or inequality fails'."""
    bad = sum(1 for m in margins if m > tol)
    return SuiteResult(name, len(margins), bad, float(max(margins)) if margins else 0.0)


def _random_probs(k: int, rng) -> np.ndarray:
    p = rng.random(k) + 0.05
    return p / p.sum()


def _block_embed(rho: np.ndarray, offset: int, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    d = rho.shape[0]
    out[offset : offset + d, offset : offset + d] = rho
    return out


def fact_suite(trials: int = 500, seed: int = 0, tol: float = 1e-8) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    dim = lambda: int(rng.integers(2, 7))
    m: dict[str, list[float]] = {k: [] for k in (
        "pure-reduced-entropy", "orthogonal-mixture", "concavity", "cq-conditional-entropy", "conditional-product-info", "mi-monotonicity", "superadditivity",
        "pure-encoding-info", "pure-td-fidelity", "measurement-fidelity", "weak-triangle",
    )}
    for _ in range(trials):
        # reduced entropies of a pure bipartite state agree
        da, db = dim(), dim()
        psi = qi.random_pure(da * db, rng)
        rho = np.outer(psi, psi.conj())
        sa = qi.entropy(qi.partial_trace(rho, [da, db], [0]))
        sb = qi.entropy(qi.partial_trace(rho, [da, db], [1]))
        m["pure-reduced-entropy"].append(abs(sa - sb))

        # orthogonal supports: S(rho(X)) = H(X) + sum Pr S(rho(x))
        k = int(rng.integers(2, 4))
        sizes = [int(rng.integers(1, 3)) for _ in range(k)]
        total = sum(sizes)
        p = _random_probs(k, rng)
        parts, off = [], 0
        for s in sizes:
            parts.append(_block_embed(qi.random_density(s, rng), off, total))
            off += s
        mix = sum(pk * r for pk, r in zip(p, parts))
        rhs = qi.shannon_entropy(p) + sum(pk * qi.entropy(r) for pk, r in zip(p, parts))
        m["orthogonal-mixture"].append(abs(qi.entropy(mix) - rhs))

        # concavity
        d = dim()
        states = [qi.random_density(d, rng, rank=int(rng.integers(1, d + 1))) for _ in range(k)]
        mix = sum(pk * r for pk, r in zip(p, states))
        m["concavity"].append(sum(pk * qi.entropy(r) for pk, r in zip(p, states)) - qi.entropy(mix))

        # conditional entropy on a classical-quantum joint
        direct, avg = qi.conditional_entropy_cq(list(zip(p, states)))
        m["cq-conditional-entropy"].append(abs(direct - avg))

        # conditional mutual information of a classically indexed product layout
        da, db = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        blocks = [(pk, qi.random_density(da, rng), qi.random_density(db, rng)) for pk in p]
        direct, avg = qi.tripartite_conditional_info(blocks)
        m["conditional-product-info"].append(abs(direct - avg))

        # monotonicity I(A:B) <= I(A:BC)
        dims = [int(rng.integers(2, 4)) for _ in range(3)]
        rho3 = qi.random_density(int(np.prod(dims)), rng)
        m["mi-monotonicity"].append(qi.mutual_info(rho3, dims, [0], [1]) - qi.mutual_info(rho3, dims, [0], [1, 2]))

        # superadditivity for independent bits
        nb = int(rng.integers(2, 4))
        marg = rng.random(nb) * 0.8 + 0.1
        d = dim()
        enc = {x: qi.random_density(d, rng, rank=int(rng.integers(1, d + 1))) for x in itertools.product((0, 1), repeat=nb)}
        pr = {x: float(np.prod([marg[i] if b else 1 - marg[i] for i, b in enumerate(x)])) for x in enc}
        whole = qi.cq_mutual_info([(pr[x], x, enc[x]) for x in enc])
        parts_mi = sum(qi.cq_mutual_info([(pr[x], x[i], enc[x]) for x in enc]) for i in range(nb))
        m["superadditivity"].append(parts_mi - whole)

        # pure encodings: I(rho(X):X) = S(rho(X))
        d = dim()
        pure = [qi.random_pure(d, rng) for _ in range(k)]
        ens = [(pk, j, np.outer(v, v.conj())) for j, (pk, v) in enumerate(zip(p, pure))]
        mix = sum(pk * np.outer(v, v.conj()) for pk, v in zip(p, pure))
        m["pure-encoding-info"].append(abs(qi.cq_mutual_info(ens) - qi.entropy(mix)))

        # pure states: TD^2 = 4 (1 - F^2)
        u, v = qi.random_pure(d, rng), qi.random_pure(d, rng)
        td = qi.trace_distance(np.outer(u, u.conj()), np.outer(v, v.conj()))
        f = qi.fidelity(u, v)
        m["pure-td-fidelity"].append(abs(td**2 - 4 * (1 - f**2)))

        # a measurement with error eps each way forces F <= 2 sqrt(eps (1 - eps))
        m["measurement-fidelity"].append(_measurement_fidelity_margin(rng))

        # weak inverse triangle inequality for real unit vectors
        d = int(rng.integers(2, 9))
        vecs = [np.real(qi.random_pure(d, rng, real=True)) for _ in range(3)]
        m["weak-triangle"].append(-qi.weak_triangle_gap(*vecs))
    return [_tally(name, vals, tol) for name, vals in m.items()]


def _measurement_fidelity_margin(rng) -> float:
    d0, d1 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    d = d0 + d1
    eps = float(rng.uniform(0, 0.5))
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, _ = np.linalg.qr(g)
    in0 = lambda r: q[:, :d0] @ r @ q[:, :d0].conj().T
    in1 = lambda r: q[:, d0:] @ r @ q[:, d0:].conj().T
    rho0 = (1 - eps) * in0(qi.random_density(d0, rng)) + eps * in1(qi.random_density(d1, rng))
    rho1 = eps * in0(qi.random_density(d0, rng)) + (1 - eps) * in1(qi.random_density(d1, rng))
    proj0 = q[:, :d0] @ q[:, :d0].conj().T
    err0 = 1 - np.trace(proj0 @ rho0).real
    err1 = np.trace(proj0 @ rho1).real
    assert abs(err0 - eps) < 1e-9 and abs(err1 - eps) < 1e-9
    return qi.fidelity(rho0, rho1) - 2 * math.sqrt(eps * (1 - eps))


def su2_grid(points: int = 10**4) -> np.ndarray:
    """Quasi-uniform unit quaternions (super-Fibonacci spiral) as 2x2 special unitaries.

    Overlaps are insensitive to a global phase, so the points effectively cover
    SU(2)/{1,-1}; a product grid in Euler angles wastes most points near its poles.
    """
    phi, psi = math.sqrt(2), 1.533751168755204288118041
    s = np.arange(points) + 0.5
    r, big_r = np.sqrt(s / points), np.sqrt(1 - s / points)
    alpha, beta = 2 * math.pi * s / phi, 2 * math.pi * s / psi
    w, x, y, z = r * np.sin(alpha), r * np.cos(alpha), big_r * np.sin(beta), big_r * np.cos(beta)
    u = np.empty((points, 2, 2), dtype=complex)
    u[:, 0, 0] = w + 1j * z
    u[:, 0, 1] = y + 1j * x
    u[:, 1, 0] = -y + 1j * x
    u[:, 1, 1] = w - 1j * z
    return u


def grid_transition_overlap(psi0, psi1, dim_h: int, grid: np.ndarray) -> float:
    """max over grid unitaries U on a 2-dim K of |<psi1|(I (x) U)|psi0>|."""
    a0 = np.asarray(psi0).reshape(dim_h, 2)
    a1 = np.asarray(psi1).reshape(dim_h, 2)
    # (I (x) U) psi0 has coefficient matrix a0 U^T
    moved = np.einsum("hk,gjk->ghj", a0, grid)
    return float(np.max(np.abs(np.einsum("hj,ghj->g", a1.conj(), moved))))


@dataclass(frozen=True)
class TransitionSuite:
    trials: int
    overlap_mismatches: int
    worst_overlap_gap: float
    bound_violations: int
    grid_trials: int
    grid_mismatches: int
    worst_grid_gap: float

    @property
    def ok(self) -> bool:
        return self.overlap_mismatches == 0 and self.bound_violations == 0 and self.grid_mismatches == 0


def transition_suite(trials: int = 200, seed: int = 0, tol: float = 1e-8, grid_tol: float = 1e-3) -> TransitionSuite:
    rng = np.random.default_rng(seed)
    grid = su2_grid()
    mism = bad_bound = grid_n = grid_bad = 0
    worst = worst_grid = 0.0
    for trial in range(trials):
        d = 2 + trial % 3
        r0 = qi.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        r1 = qi.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        psi0 = qi.purify(r0)
        # rotate the second purification on K so the optimum is not trivial
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        w, _ = np.linalg.qr(g)
        psi1 = qi.apply_on_k(w, qi.purify(r1), d)
        try:
            res = qi.local_transition(r0, r1, psi0, psi1)
        except qi.BoundViolation:
            bad_bound += 1
            continue
        # independent route: trace norm of sqrt(rho0) sqrt(rho1)
        f_ref = float(np.sum(np.linalg.svd(qi.sqrtm_psd(r0) @ qi.sqrtm_psd(r1), compute_uv=False)))
        gap = abs(res.overlap - f_ref)
        worst = max(worst, gap)
        mism += gap > tol
        if d == 2:
            grid_n += 1
            gg = abs(grid_transition_overlap(psi0, psi1, 2, grid) - res.overlap)
            worst_grid = max(worst_grid, gg)
            grid_bad += gg > grid_tol
    return TransitionSuite(trials, int(mism), float(worst), bad_bound, grid_n, int(grid_bad), float(worst_grid))


def realification_suite(trials: int = 200, seed: int = 0, tol: float = 1e-9) -> SuiteResult:
    rng = np.random.default_rng(seed)
    margins = []
    for trial in range(trials):
        d = 2 + trial % 5
        rho = qi.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        margins.append(abs(qi.entropy(rho) - qi.entropy(qi.realify_state(rho))))
    return _tally("realified-entropy", margins, tol)


# -- experiment rows -----------------------------------------------------------------------------


def mws_scaling_rows(ns=(4, 8, 16, 32)):
    rows = []
    for n in ns:
        g = build_mws_qbp(n, strict=True)
        rows.append({"n": n, "p": smallest_prime_after(n), "nodes": len(g.nodes), "bound": strict_size_bound(n), "C": STRICT_SIZE_CONSTANT})
    return rows


def loglog_slope(rows) -> float:
    x = np.log([r["n"] for r in rows])
    y = np.log([r["nodes"] for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def equidist_rows(q: int, n: int, exact: bool = True):
    dist = weighted_sum_distribution(q, list(range(1, n + 1)), exact=exact)
    return [{"b": b, "probability": float(pr), "deviation": float(pr) - 1 / q} for b, pr in enumerate(dist.probs)]


def ind_rect_row(n: int, eps: float):
    best, _ = best_ind_rectangle(n, eps)
    return {"n": n, "eps": eps, "maxA": best, "ball": hamming_ball_size(n, math.floor(eps * n + 1e-12)), "bound": ball_entropy_bound(n, eps)}


def and_frontier_rows(n_random: int = 200):
    rows = []
    for name, p in and_library(n_random):
        c = and_information_check(p)
        rows.append({"protocol": name, "epsilon": c.epsilon, "delta": c.delta, "ic": c.ic, "bound": c.bound, "applicable": c.applicable, "ok": c.ok})
    return rows
