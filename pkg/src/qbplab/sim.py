"""Measurement-interleaved simulation of QBPs and exhaustive function verification."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .qinfo import BoundViolation, entropy
from .graph import DEFAULT_TOL, SINK, UNLABELED, QbpGraph, classify, distances, require_valid

Bits = tuple[int, ...]


class NotRegularError(ValueError):
    """The operation needs a regular read-once graph (or one with all sinks at one depth)."""


@dataclass(frozen=True)
class OutputDistribution:
    p0: float
    p1: float
    residual: float

    def prob(self, r: int) -> float:
        return self.p1 if r else self.p0


@dataclass(frozen=True)
class VerificationReport:
    mode: str
    epsilon: float
    worst_input: Bits
    worst_error: float
    passed: bool


def as_bits(assignment, num_vars: int) -> Bits:
    """Accept a bit string, a sequence of bits, or a mapping ``var -> bit``."""
    if isinstance(assignment, str):
        bits = tuple(int(ch) for ch in assignment.strip())
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bit strings may only contain 0 and 1")
    elif isinstance(assignment, Mapping):
        bits = tuple(int(assignment.get(v, 0)) for v in range(1, num_vars + 1))
    else:
        bits = tuple(int(b) for b in assignment)
    if len(bits) != num_vars:
        raise ValueError(f"expected {num_vars} bits, got {len(bits)}")
    return bits


def _compiled(graph: QbpGraph):
    """Per-node transition rows as (sink_label | None, var | None, row0, row1)."""
    cache = graph._cache
    if "compiled" not in cache:
        rows = graph.rows()
        table = {}
        for n in graph.nodes:
            if n.kind == SINK:
                table[n.id] = (n.label, None, (), ())
            elif n.kind == UNLABELED:
                row = tuple(rows[n.id][None])
                table[n.id] = (None, None, row, row)
            else:
                table[n.id] = (None, n.var, tuple(rows[n.id][0]), tuple(rows[n.id][1]))
        cache["compiled"] = table
    return cache["compiled"]


def step(state: Mapping[int, complex], graph: QbpGraph, bits: Bits):
    """One computation step: measure sink mass per label, then apply the transition.

    The state is kept unnormalized, so the surviving norm is the probability of
    not having halted yet.
    """
    table = _compiled(graph)
    halted = [0.0, 0.0]
    nxt: dict[int, complex] = {}
    for v, amp in state.items():
        label, var, row0, row1 = table[v]
        if label is not None:
            halted[label] += amp.real * amp.real + amp.imag * amp.imag
            continue
        row = row1 if (var is not None and bits[var - 1]) else row0
        for w, a in row:
            nxt[w] = nxt.get(w, 0j) + amp * a
    return nxt, (halted[0], halted[1])


def run(graph: QbpGraph, assignment, max_steps: int | None = None, check: bool = True) -> OutputDistribution:
    if check:
        require_valid(graph)
    bits = as_bits(assignment, graph.num_vars)
    steps = graph.num_vars + 2 if max_steps is None else max_steps
    if steps < 1:
        raise ValueError("max_steps must be at least 1")
    return _run_bits(graph, bits, steps)


def _run_bits(graph: QbpGraph, bits: Bits, steps: int) -> OutputDistribution:
    state: dict[int, complex] = {graph.start: 1 + 0j}
    p0 = p1 = 0.0
    for _ in range(steps):
        state, (h0, h1) = step(state, graph, bits)
        p0 += h0
        p1 += h1
        if not state:
            break
    else:
        _, (h0, h1) = step(state, graph, bits)
        p0 += h0
        p1 += h1
        state = {v: a for v, a in state.items() if graph.node(v).kind != SINK}
    residual = sum(abs(a) ** 2 for a in state.values())
    clamp = lambda x: min(1.0, max(0.0, x))
    return OutputDistribution(clamp(p0), clamp(p1), clamp(residual))


def sink_depth(graph: QbpGraph) -> int | None:
    """Common number of edges from the start to every reachable sink, if the graph is
    leveled, acyclic and every maximal path ends at a sink; otherwise ``None``."""
    if "sink_depth" in graph._cache:
        return graph._cache["sink_depth"]
    dist = distances(graph)
    depth = None
    if dist is not None and all(lo == hi for lo, hi in dist.values()):
        ends = [u for u in dist if not graph.successors(u)]
        if ends and all(graph.node(u).kind == SINK for u in ends):
            depths = {dist[u][0] for u in ends}
            if len(depths) == 1:
                depth = depths.pop()
    graph._cache["sink_depth"] = depth
    return depth


def node_positions(graph: QbpGraph) -> dict[int, int]:
    if "positions" not in graph._cache:
        graph._cache["positions"] = {n.id: k for k, n in enumerate(graph.nodes)}
    return graph._cache["positions"]


def propagate(graph: QbpGraph, bits: Bits, steps: int, start_state: Mapping[int, complex] | None = None):
    """Apply ``steps`` transitions without any measurement; returns a sparse state."""
    table = _compiled(graph)
    state = dict(start_state) if start_state is not None else {graph.start: 1 + 0j}
    for _ in range(steps):
        nxt: dict[int, complex] = {}
        for v, amp in state.items():
            label, var, row0, row1 = table[v]
            if label is not None:
                nxt[v] = nxt.get(v, 0j) + amp
                continue
            row = row1 if (var is not None and bits[var - 1]) else row0
            for w, a in row:
                nxt[w] = nxt.get(w, 0j) + amp * a
        state = nxt
    return state


def final_state(graph: QbpGraph, assignment, require_regular: bool = True) -> np.ndarray:
    """Pure state over all nodes (in ``graph.nodes`` order) just before the sink measurement.

    With ``require_regular`` the graph must be a regular read-once QBP. Otherwise
    any graph whose sinks all lie at one common depth is accepted; that covers
    restricted graphs that contain unlabeled nodes.
    """
    if require_regular:
        if "regular" not in graph._cache:
            graph._cache["regular"] = classify(graph).regular_read_once
        if not graph._cache["regular"]:
            raise NotRegularError("final_state needs a regular read-once graph")
    depth = sink_depth(graph)
    if depth is None:
        raise NotRegularError("sinks are not all at one depth from the start node")
    bits = as_bits(assignment, graph.num_vars)
    sparse = propagate(graph, bits, depth)
    pos = node_positions(graph)
    vec = np.zeros(len(graph.nodes), dtype=complex)
    for v, amp in sparse.items():
        vec[pos[v]] = amp
    return vec


def _input_distribution(dist, num_vars: int) -> list[tuple[float, Bits]]:
    items = dist.items() if isinstance(dist, Mapping) else dist
    out = []
    for key, value in items:
        # accept both {input: prob} and [(prob, input)]
        if isinstance(key, (int, float)) and not isinstance(value, (int, float)):
            prob, z = key, value
        else:
            z, prob = key, value
        out.append((float(prob), as_bits(z, num_vars)))
    total = sum(p for p, _ in out)
    if abs(total - 1) > 1e-9:
        raise ValueError(f"input probabilities sum to {total}, not 1")
    return out


def final_state_info(graph: QbpGraph, input_distribution, tol: float = DEFAULT_TOL) -> float:
    """I(G(Z):Z) = S(sum_z Pr(z) |G(z)><G(z)|), checked against log2 |G|.

    The entropy is taken from the weighted Gram matrix of the final states,
    which has the same nonzero spectrum as the mixture but is small whenever the
    input support is small.
    """
    dist = _input_distribution(input_distribution, graph.num_vars)
    vectors = [math.sqrt(p) * final_state(graph, z) for p, z in dist if p > 0]
    mat = np.array(vectors)
    support = np.flatnonzero(np.any(np.abs(mat) > 0, axis=0))
    mat = mat[:, support]
    if mat.shape[0] <= mat.shape[1]:
        rho = mat.conj() @ mat.T
    else:
        rho = mat.T @ mat.conj()
    value = entropy(rho, check=False)
    bound = math.log2(len(graph.nodes))
    if value > bound + tol:
        raise BoundViolation(f"I(G(Z):Z) = {value} exceeds log2|G| = {bound}")
    return value


def all_inputs(num_vars: int) -> Iterable[Bits]:
    for k in range(2**num_vars):
        yield tuple((k >> (num_vars - 1 - i)) & 1 for i in range(num_vars))


def _worst_in_range(graph: QbpGraph, reference, lo: int, hi: int, steps: int):
    n = graph.num_vars
    worst, worst_k = -1.0, lo
    for k in range(lo, hi):
        bits = tuple((k >> (n - 1 - i)) & 1 for i in range(n))
        out = _run_bits(graph, bits, steps)
        # mass on the wrong sink plus mass that never halted; equals 1 - Pr[correct]
        # for norm-preserving graphs without the rounding of the complement
        err = out.prob(1 - int(reference(bits))) + out.residual
        if err > worst:
            worst, worst_k = err, k
    return worst, worst_k


def verify_function(
    graph: QbpGraph,
    reference: Callable[[Bits], int],
    epsilon: float | None = None,
    tol: float = DEFAULT_TOL,
    jobs: int = 1,
    max_steps: int | None = None,
) -> VerificationReport:
    """Exhaustive check over all 2^n inputs.

    ``epsilon=None`` is exact mode (error at most ``tol``); otherwise two-sided
    error at most ``epsilon``. The error of an input is Pr[output = 1 - f(input)]
    plus the mass that never halts. Ties in the worst error go to the
    lexicographically smallest input, which keeps parallel runs deterministic.
    """
    require_valid(graph)
    n = graph.num_vars
    steps = n + 2 if max_steps is None else max_steps
    total = 2**n
    if jobs > 1 and total >= 4096:
        chunk = -(-total // (jobs * 4))
        bounds = [(lo, min(total, lo + chunk)) for lo in range(0, total, chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_worst_in_range, graph, reference, lo, hi, steps) for lo, hi in bounds]
            parts = [f.result() for f in futures]
    else:
        parts = [_worst_in_range(graph, reference, 0, total, steps)]
    worst, worst_k = max(parts, key=lambda item: (item[0], -item[1]))
    worst_bits = tuple((worst_k >> (n - 1 - i)) & 1 for i in range(n))
    limit = tol if epsilon is None else epsilon + tol
    mode = "exact" if epsilon is None else "two-sided"
    return VerificationReport(mode, 0.0 if epsilon is None else epsilon, worst_bits, max(worst, 0.0), worst <= limit)
