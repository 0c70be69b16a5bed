"""From a regular read-once QBP restricted to one variable pair to a 2-partition protocol.

With every variable except a pair (x, y) fixed, each source-to-sink path reads x
and y exactly once. The graph splits into an unlabeled top part, two middle
parts (x read first / y read first) and an unlabeled bottom part. Replacing the
top and bottom by dummy chains puts all middle-part entry nodes on one level and
all exit nodes on one level; the two middle parts then become the two blocks of
a one-way protocol in which the first reader talks to the second.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .graph import SINK, UNLABELED, VAR, Edge, Node, QbpGraph, distances, reachable, restrict, topological_order, validate
from .protocols import MultiPartitionProtocol, PartitionSpec, Subprotocol, check_protocol, final_vector
from .sim import final_state, node_positions, propagate

STATE_TOL = 1e-9


class DecompositionError(ValueError):
    pass


def pair_vars(num_vars: int, pair) -> tuple[int, int]:
    """A pair index i on 2n variables means (x_i, y_i) = (i, n+i); a tuple is taken as is."""
    if isinstance(pair, (tuple, list)):
        x, y = (int(v) for v in pair)
    else:
        if num_vars % 2:
            raise ValueError("pair indices need an even number of variables; pass a variable pair instead")
        i, half = int(pair), num_vars // 2
        if not 1 <= i <= half:
            raise ValueError(f"pair index {i} outside 1..{half}")
        x, y = i, half + i
    if x == y or not (1 <= x <= num_vars and 1 <= y <= num_vars):
        raise ValueError(f"invalid variable pair ({x}, {y})")
    return x, y


def zero_and_backgrounds(num_vars: int, pair) -> list[dict[int, int]]:
    """Assignments to every variable outside the pair with a_j AND b_j = 0 for all other pairs j."""
    x, y = pair_vars(num_vars, pair)
    half = num_vars // 2
    others = [j for j in range(1, half + 1) if j != x]
    out = []
    for choice in itertools.product(((0, 0), (1, 0), (0, 1)), repeat=len(others)):
        bg = {}
        for j, (a, b) in zip(others, choice):
            bg[j], bg[half + j] = a, b
        out.append(bg)
    return out


def all_backgrounds(num_vars: int, pair) -> list[dict[int, int]]:
    x, y = pair_vars(num_vars, pair)
    rest = [v for v in range(1, num_vars + 1) if v not in (x, y)]
    return [dict(zip(rest, bits)) for bits in itertools.product((0, 1), repeat=len(rest))]


@dataclass
class PartDecomposition:
    pair: tuple[int, int]
    S_x: list[int]
    S_y: list[int]
    T_x: list[int]
    T_y: list[int]
    top: set[int]
    middle_x: set[int]
    middle_y: set[int]
    bottom: set[int]
    entry_amplitudes: dict[int, complex]
    exit_amplitudes: dict[int, dict[int, complex]]
    d_source: dict[int, int]
    d_sinks: dict[int, int]
    degenerate: str | None = None
    notes: list[str] = field(default_factory=list)


def _forward(graph: QbpGraph, starts) -> set[int]:
    seen, stack = set(starts), list(starts)
    while stack:
        u = stack.pop()
        for w in graph.successors(u):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _backward(graph: QbpGraph, targets, within: set[int]) -> set[int]:
    preds: dict[int, list[int]] = {}
    for e in graph.edges:
        if e.src in within and e.dst in within:
            preds.setdefault(e.dst, []).append(e.src)
    seen, stack = set(targets), list(targets)
    while stack:
        u = stack.pop()
        for w in preds.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def decompose(graph: QbpGraph, pair) -> PartDecomposition:
    """Split a restricted graph into top, two middle parts and bottom, with cut checks."""
    x, y = pair_vars(graph.num_vars, pair)
    nodes = set(reachable(graph))
    order = topological_order(graph)
    dist = distances(graph)
    if order is None or dist is None:
        raise DecompositionError("graph has a cycle")
    if any(lo != hi for lo, hi in dist.values()):
        raise DecompositionError("node depths are not path independent; the origin is not regular")
    d_source = {v: dist[v][0] for v in nodes}
    sinks = [v for v in nodes if graph.node(v).is_sink]
    depths = {d_source[v] for v in sinks}
    if len(depths) != 1:
        raise DecompositionError("sinks lie at different depths")
    depth = depths.pop()
    d_sinks = {v: depth - d_source[v] for v in nodes}

    # which of x, y has been read before reaching each node
    before: dict[int, frozenset] = {graph.start: frozenset()}
    for u in order:
        if u not in nodes:
            continue
        node = graph.node(u)
        seen = before[u]
        if node.kind == VAR:
            if node.var not in (x, y):
                raise DecompositionError(f"variable {node.var} is still unfixed")
            if node.var in seen:
                raise DecompositionError(f"a path reads variable {node.var} twice")
            after = seen | {node.var}
        else:
            after = seen
        for w in graph.successors(u):
            if before.setdefault(w, after) != after:
                raise DecompositionError(f"paths into node {w} disagree on which variables were read")
    if any(before[s] != frozenset((x, y)) for s in sinks):
        raise DecompositionError("a path reaches a sink without reading both variables")

    var_of = lambda v: graph.node(v).var if graph.node(v).kind == VAR else None
    S_x = sorted(v for v in nodes if var_of(v) == x and not before[v])
    S_y = sorted(v for v in nodes if var_of(v) == y and not before[v])
    second_x = [v for v in nodes if var_of(v) == y and before[v] == frozenset((x,))]
    second_y = [v for v in nodes if var_of(v) == x and before[v] == frozenset((y,))]
    T_y = sorted({w for v in second_x for w in graph.successors(v)})
    T_x = sorted({w for v in second_y for w in graph.successors(v)})
    if set(T_x) & set(T_y):
        raise DecompositionError("exit sets of the two middle parts overlap")
    T = set(T_x) | set(T_y)
    if any(_forward(graph, graph.successors(t)) & T for t in T):
        raise DecompositionError("exit nodes do not form a cut")

    S = set(S_x) | set(S_y)
    top = nodes - _forward(graph, S)
    bottom = _forward(graph, T) - T
    middle_x = _forward(graph, S_x) & _backward(graph, T_y, nodes)
    middle_y = _forward(graph, S_y) & _backward(graph, T_x, nodes)
    if middle_x & middle_y:
        raise DecompositionError("the two middle parts share nodes")
    if any(graph.node(v).kind == VAR for v in top | bottom):
        raise DecompositionError("top or bottom part contains a labeled node")
    if top | middle_x | middle_y | bottom != nodes:
        raise DecompositionError("parts do not cover the reachable graph")

    # path sums from the source into S and from T to the sinks
    amp: dict[int, complex] = {graph.start: 1 + 0j}
    entry: dict[int, complex] = {}
    for u in order:
        if u not in nodes or u not in amp:
            continue
        if u in S:
            entry[u] = amp[u]
            continue
        for w, a in graph.rows()[u][None]:
            amp[w] = amp.get(w, 0j) + amp[u] * a
    entry = {v: entry.get(v, 0j) for v in sorted(S)}
    exit_amps = {}
    dummy_bits = (0,) * graph.num_vars
    for t in sorted(T):
        state = propagate(graph, dummy_bits, d_sinks[t], {t: 1 + 0j})
        exit_amps[t] = {w: a for w, a in state.items() if abs(a) > 0}

    degenerate = None
    if not S_y:
        degenerate = "x-first"
    elif not S_x:
        degenerate = "y-first"
    return PartDecomposition(
        (x, y), S_x, S_y, T_x, T_y, top, middle_x, middle_y, bottom, entry, exit_amps, d_source, d_sinks, degenerate
    )


# -- dummy chains ------------------------------------------------------------------------------


@dataclass
class DummyGraph:
    graph: QbpGraph
    decomposition: PartDecomposition
    heads: dict[int, int]  # chain head on level 1 -> entry node it leads to
    exits: dict[int, int]  # last chain node above the sinks -> exit node it replaces


def insert_dummy_chains(restricted: QbpGraph, pair) -> DummyGraph:
    """Replace the top part by a fresh source fanning into one dummy chain per entry
    node (weighted by its entry amplitude), and each exit node by a chain of length
    d_sinks + 1 whose last node feeds the sinks with the exit amplitudes."""
    dec = decompose(restricted, pair)
    middle = dec.middle_x | dec.middle_y
    T = set(dec.T_x) | set(dec.T_y)
    sinks = {v for v in dec.bottom | T if restricted.node(v).is_sink}
    next_id = max(n.id for n in restricted.nodes) + 1

    def fresh() -> int:
        nonlocal next_id
        next_id += 1
        return next_id - 1

    nodes = [restricted.node(v) for v in sorted(middle - T)] + [restricted.node(v) for v in sorted(sinks)]
    edges: list[Edge] = []
    source = fresh()
    nodes.append(Node(source, UNLABELED))
    heads = {}
    for v, alpha in dec.entry_amplitudes.items():
        length = max(dec.d_source[v] - 1, 0)
        chain = [fresh() for _ in range(length)]
        nodes += [Node(c, UNLABELED) for c in chain]
        path = [source] + chain + [v]
        edges.append(Edge(path[0], path[1], None, alpha))
        edges += [Edge(a, b, None, 1) for a, b in zip(path[1:-1], path[2:])]
        heads[path[1]] = v
    chain_start, exits = {}, {}
    for t in sorted(T):
        chain = [fresh() for _ in range(dec.d_sinks[t] + 1)]
        nodes += [Node(c, UNLABELED) for c in chain]
        edges += [Edge(a, b, None, 1) for a, b in zip(chain, chain[1:])]
        edges += [Edge(chain[-1], w, None, a) for w, a in dec.exit_amplitudes[t].items()]
        chain_start[t] = chain[0]
        exits[chain[-1]] = t
    for e in restricted.edges:
        if e.src in middle and e.src not in T:
            edges.append(Edge(e.src, chain_start.get(e.dst, e.dst), e.bit, e.amp))
    g2 = QbpGraph(restricted.num_vars, nodes, edges, source)
    return DummyGraph(g2, dec, heads, exits)


def state_by_id(graph: QbpGraph, vec: np.ndarray) -> dict[int, complex]:
    return {n.id: vec[k] for k, n in enumerate(graph.nodes) if abs(vec[k]) > 0}


def state_deviation(a: Mapping[int, complex], b: Mapping[int, complex]) -> float:
    keys = set(a) | set(b)
    return math.sqrt(sum(abs(a.get(k, 0) - b.get(k, 0)) ** 2 for k in keys))


def _full_assignment(num_vars: int, pair: tuple[int, int], background: Mapping[int, int], z) -> tuple[int, ...]:
    bits = dict(background)
    bits[pair[0]], bits[pair[1]] = int(z[0]), int(z[1])
    return tuple(bits[v] for v in range(1, num_vars + 1))


# -- protocol extraction ---------------------------------------------------------------------------


def _orth_complement(cols: np.ndarray) -> np.ndarray:
    n, k = cols.shape
    if k == 0:
        return np.eye(n, dtype=complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=True)
    rank = int(np.sum(s > 1e-10))
    return u[:, rank:]


def complete_unitary(domain: np.ndarray, image: np.ndarray, tol: float = STATE_TOL) -> np.ndarray:
    """Unitary U with U domain[:, k] = image[:, k], both given as orthonormal columns."""
    k = domain.shape[1]
    for name, m in (("domain", domain), ("image", image)):
        if not np.allclose(m.conj().T @ m, np.eye(k), atol=tol, rtol=0):
            raise DecompositionError(f"{name} vectors are not orthonormal")
    u = image @ domain.conj().T + _orth_complement(image) @ _orth_complement(domain).conj().T
    return u


@dataclass
class Extraction:
    protocol: MultiPartitionProtocol
    work_nodes: list[int]
    alice_states: dict  # (side, c) -> Alice's normalized state
    message_nodes: dict  # side -> node ids Alice may send


def extract_protocol(dummy: DummyGraph) -> Extraction:
    """Two-block protocol simulating G'': in the block whose first variable is u, the
    holder of u runs the graph from the entry superposition to the level of the
    first read of the other variable and sends that superposition; the other
    player finishes the run down to the sinks."""
    g2, dec = dummy.graph, dummy.decomposition
    x, y = dec.pair
    work = [n.id for n in g2.nodes if n.id != g2.start]
    index = {v: k for k, v in enumerate(work)}
    dim = len(work)
    dist = distances(g2)
    level = {v: lo for v, (lo, _) in dist.items()}
    depth = max(level[v] for v in level if g2.node(v).is_sink)
    amp_of = dict(g2.rows()[g2.start][None])

    def vec(sparse: Mapping[int, complex]) -> np.ndarray:
        out = np.zeros(dim, dtype=complex)
        for v, a in sparse.items():
            out[index[v]] += a
        return out

    def bits_for(first_val: int, second_val: int, first: int) -> tuple[int, ...]:
        b = [0] * g2.num_vars
        second = y if first == x else x
        b[first - 1], b[second - 1] = first_val, second_val
        return tuple(b)

    subs, amps, alice_states, messages = [], [], {}, {}
    sides = [(x, y, dec.S_x), (y, x, dec.S_y)]
    for first, second, entries in sides:
        if not entries:
            continue
        heads = [h for h, v in dummy.heads.items() if v in entries]
        q = sum(abs(amp_of.get(h, 0)) ** 2 for h in heads)
        if q > 0:
            init_sparse = {h: amp_of.get(h, 0) / math.sqrt(q) for h in heads}
        else:
            init_sparse = {heads[0]: 1 + 0j}
        init = vec(init_sparse)
        # Alice's cut level per head: first level holding a node labeled by the second variable
        cut = {}
        for h in heads:
            below = _forward(g2, [h])
            levels = [level[w] for w in below if g2.node(w).kind == VAR and g2.node(w).var == second]
            if not levels:
                raise DecompositionError(f"no read of variable {second} below entry node {dummy.heads[h]}")
            cut[h] = min(levels)
        alice_ops, msg_nodes = {}, set()
        for c in (0, 1):
            state: dict[int, complex] = {}
            for h, a in init_sparse.items():
                part = propagate(g2, bits_for(c, 0, first), cut[h] - level[h], {h: a})
                for w, b in part.items():
                    state[w] = state.get(w, 0j) + b
            msg_nodes |= {w for w, b in state.items() if abs(b) > 0}
            psi = vec(state)
            norm = np.linalg.norm(psi)
            if abs(norm - 1) > STATE_TOL:
                raise DecompositionError(f"Alice's state has norm {norm}, expected 1")
            alice_states[(first, c)] = psi
            alice_ops[((c,), 0)] = complete_unitary(init[:, None], psi[:, None])
        # every node Alice can reach at her cut, for any entry and either bit
        frontier = set()
        for h in heads:
            for c in (0, 1):
                frontier |= set(propagate(g2, bits_for(c, 0, first), cut[h] - level[h], {h: 1 + 0j}))
        frontier = sorted(frontier)
        messages[first] = tuple(frontier)
        domain = np.array([vec({w: 1}) for w in frontier]).T
        bob_ops = {}
        for d in (0, 1):
            images = np.array(
                [vec(propagate(g2, bits_for(0, d, first), depth - level[w], {w: 1 + 0j})) for w in frontier]
            ).T
            bob_ops[((d,), 0)] = complete_unitary(domain, images)
        part = PartitionSpec((1,), (2,)) if first == x else PartitionSpec((2,), (1,))
        subs.append(Subprotocol(part, init, alice_ops, bob_ops, message=tuple(index[w] for w in frontier)))
        amps.append(math.sqrt(q))
    m1 = np.diag([1.0 if g2.node(v).is_sink and g2.node(v).label == 1 else 0.0 for v in work]).astype(complex)
    protocol = MultiPartitionProtocol(2, subs, np.asarray(amps, dtype=complex), (np.eye(dim) - m1, m1))
    if len(subs) == 1:
        protocol.flags["degenerate"] = dec.degenerate
    check_protocol(protocol)
    return Extraction(protocol, work, alice_states, messages)


def protocol_state_by_id(ext: Extraction, z) -> dict[int, complex]:
    v = final_vector(ext.protocol, z)
    return {w: v[k] for k, w in enumerate(ext.work_nodes) if abs(v[k]) > 0}


# -- orthogonality of the two middle parts ------------------------------------------------------------------


@dataclass(frozen=True)
class OrthogonalityReport:
    max_overlap: float
    per_level: tuple[float, ...]
    passed: bool


def subspace_orthogonality_check(dummy: DummyGraph, tol: float = STATE_TOL) -> OrthogonalityReport:
    """Largest |<psi_{v1,l}(z1) | psi_{v2,l}(z2)>| over x-side and y-side chain heads,
    all pair assignments and all levels from the heads down to the sinks."""
    g2, dec = dummy.graph, dummy.decomposition
    x, y = dec.pair
    xs = [h for h, v in dummy.heads.items() if v in dec.S_x]
    ys = [h for h, v in dummy.heads.items() if v in dec.S_y]
    dist = distances(g2)
    depth = max(dist[v][0] for v in dist if g2.node(v).is_sink)
    pos = node_positions(g2)

    def trajectory(h: int, z) -> list[np.ndarray]:
        bits = [0] * g2.num_vars
        bits[x - 1], bits[y - 1] = z
        state = {h: 1 + 0j}
        out = []
        for _ in range(1, depth + 1):
            v = np.zeros(len(g2.nodes), dtype=complex)
            for w, a in state.items():
                v[pos[w]] = a
            out.append(v)
            state = propagate(g2, tuple(bits), 1, state)
        return out

    zs = list(itertools.product((0, 1), repeat=2))
    per_level = np.zeros(depth)
    tx = {(h, z): trajectory(h, z) for h in xs for z in zs}
    ty = {(h, z): trajectory(h, z) for h in ys for z in zs}
    for a in tx.values():
        for b in ty.values():
            for ell in range(depth):
                per_level[ell] = max(per_level[ell], abs(np.vdot(a[ell], b[ell])))
    worst = float(per_level.max(initial=0.0))
    return OrthogonalityReport(worst, tuple(float(v) for v in per_level), worst <= tol)


# -- end to end ------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class BridgeReport:
    pair: tuple[int, int]
    background: dict
    dummy_deviation: float
    protocol_deviation: float
    orthogonality: float
    nodes_restricted: int
    nodes_dummy: int
    degenerate: str | None
    passed: bool


def bridge_check(graph: QbpGraph, pair, background: Mapping[int, int], tol: float = STATE_TOL) -> tuple[BridgeReport, Extraction]:
    """Restrict, insert dummy chains, extract the protocol and compare final states on all
    four assignments of the pair with the final state of the unrestricted graph."""
    xy = pair_vars(graph.num_vars, pair)
    restricted = restrict(graph, background)
    dummy = insert_dummy_chains(restricted, xy)
    rep = validate(dummy.graph, tol)
    if not rep.ok:
        raise DecompositionError(f"graph with dummy chains is not valid: {rep}")
    ext = extract_protocol(dummy)
    dev_dummy = dev_proto = 0.0
    for z in itertools.product((0, 1), repeat=2):
        full = _full_assignment(graph.num_vars, xy, background, z)
        ref = state_by_id(graph, final_state(graph, full))
        restricted_state = state_by_id(restricted, final_state(restricted, full, require_regular=False))
        dummy_state = state_by_id(dummy.graph, final_state(dummy.graph, full, require_regular=False))
        dev_dummy = max(dev_dummy, state_deviation(dummy_state, restricted_state))
        dev_proto = max(dev_proto, state_deviation(protocol_state_by_id(ext, z), ref))
    orth = subspace_orthogonality_check(dummy, tol).max_overlap if dummy.decomposition.degenerate is None else 0.0
    passed = dev_dummy <= tol and dev_proto <= tol and orth <= tol
    report = BridgeReport(
        xy, dict(background), dev_dummy, dev_proto, orth, len(restricted), len(dummy.graph), dummy.decomposition.degenerate, passed
    )
    return report, ext


def restricted_function(f: Callable[[Sequence[int]], int], num_vars: int, pair, background: Mapping[int, int]):
    xy = pair_vars(num_vars, pair)
    return lambda z: int(f(_full_assignment(num_vars, xy, background, z)))
