"""Quantum branching program graphs: data model, validation and structural analysis."""

from __future__ import annotations

import heapq
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

DEFAULT_TOL = 1e-9

VAR = "var"
SINK = "sink"
UNLABELED = "unlabeled"
KINDS = (VAR, SINK, UNLABELED)


class StructureError(ValueError):
    """Raised when a graph is not structurally sound (dangling ids, bad labels, ...)."""


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    var: int | None = None
    label: int | None = None

    @property
    def is_sink(self) -> bool:
        return self.kind == SINK


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    bit: int | None
    amp: complex


class QbpGraph:
    """Immutable node/edge multigraph with complex transition amplitudes.

    Variables are numbered ``1..num_vars``. Edges leaving a variable node carry a
    boolean label, edges leaving an unlabeled node carry ``bit=None``.
    """

    __slots__ = ("num_vars", "nodes", "edges", "start", "_index", "_cache")

    def __init__(self, num_vars: int, nodes: Iterable[Node], edges: Iterable[Edge], start: int):
        self.num_vars = int(num_vars)
        self.nodes = tuple(nodes)
        self.edges = tuple(Edge(e.src, e.dst, e.bit, complex(e.amp)) for e in edges)
        self.start = start
        self._index: dict[int, int] = {}
        self._cache: dict = {}
        self._check_structure()

    def _check_structure(self) -> None:
        if self.num_vars < 0:
            raise StructureError("num_vars must be nonnegative")
        for pos, node in enumerate(self.nodes):
            if node.id in self._index:
                raise StructureError(f"duplicate node id {node.id}")
            self._index[node.id] = pos
            if node.kind not in KINDS:
                raise StructureError(f"node {node.id}: unknown kind {node.kind!r}")
            if node.kind == VAR and not (node.var is not None and 1 <= node.var <= self.num_vars):
                raise StructureError(f"node {node.id}: variable index {node.var} outside 1..{self.num_vars}")
            if node.kind == SINK and node.label not in (0, 1):
                raise StructureError(f"node {node.id}: sink label must be 0 or 1")
        if self.start not in self._index:
            raise StructureError(f"start node {self.start} does not exist")
        seen = set()
        for e in self.edges:
            if e.src not in self._index or e.dst not in self._index:
                raise StructureError(f"edge {e.src}->{e.dst} references a missing node")
            src = self.node(e.src)
            if src.is_sink:
                raise StructureError(f"edge {e.src}->{e.dst} leaves a sink")
            if (e.bit is None) != (src.kind == UNLABELED):
                raise StructureError(f"edge {e.src}->{e.dst}: bit must be None exactly for unlabeled sources")
            if e.bit not in (None, 0, 1):
                raise StructureError(f"edge {e.src}->{e.dst}: bit must be 0, 1 or None")
            if not (math.isfinite(e.amp.real) and math.isfinite(e.amp.imag)):
                raise StructureError(f"edge {e.src}->{e.dst}: amplitude is not finite")
            key = (e.src, e.dst, e.bit)
            if key in seen:
                raise StructureError(f"duplicate edge {key}")
            seen.add(key)

    def node(self, node_id: int) -> Node:
        return self.nodes[self._index[node_id]]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._index

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QbpGraph):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.start == other.start
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.num_vars, self.start, self.nodes, self.edges))

    def __repr__(self) -> str:
        return f"QbpGraph(num_vars={self.num_vars}, nodes={len(self.nodes)}, edges={len(self.edges)})"

    # -- derived adjacency, cached since graphs are immutable ---------------------------

    def rows(self) -> dict[int, dict[int | None, list[tuple[int, complex]]]]:
        """Transition rows per non-sink node, keyed by bit (``None`` for unlabeled nodes)."""
        if "rows" not in self._cache:
            rows: dict[int, dict] = {}
            for n in self.nodes:
                if n.kind == VAR:
                    rows[n.id] = {0: [], 1: []}
                elif n.kind == UNLABELED:
                    rows[n.id] = {None: []}
            for e in self.edges:
                rows[e.src][e.bit].append((e.dst, e.amp))
            self._cache["rows"] = rows
        return self._cache["rows"]

    def successors(self, node_id: int) -> list[int]:
        """Distinct successors reached by a nonzero amplitude on any bit."""
        out = []
        for row in self.rows().get(node_id, {}).values():
            for dst, amp in row:
                if amp != 0 and dst not in out:
                    out.append(dst)
        return out

    def predecessors(self) -> dict[int, list[tuple[int, int | None, complex]]]:
        if "preds" not in self._cache:
            preds: dict[int, list] = defaultdict(list)
            for e in self.edges:
                if e.amp != 0:
                    preds[e.dst].append((e.src, e.bit, e.amp))
            self._cache["preds"] = dict(preds)
        return self._cache["preds"]

    def label_of(self, node_id: int):
        """Variable label used for unidirectionality: the variable, or ``'dummy'``."""
        n = self.node(node_id)
        return n.var if n.kind == VAR else "dummy"

    def sinks(self) -> list[Node]:
        return [n for n in self.nodes if n.is_sink]

    def with_start(self, start: int) -> "QbpGraph":
        return QbpGraph(self.num_vars, self.nodes, self.edges, start)


# -- validation ----------------------------------------------------------------------------


@dataclass
class ValidationReport:
    well_formed: bool
    unidirectional: bool
    violations: list = field(default_factory=list)
    unidirectional_violations: list = field(default_factory=list)
    tol: float = DEFAULT_TOL

    @property
    def ok(self) -> bool:
        return self.well_formed and self.unidirectional


def validate(graph: QbpGraph, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check well-formedness (orthonormal transition rows) and unidirectionality.

    Only pairs of (node, bit) rows sharing a successor can have a nonzero inner
    product, so the check accumulates products per shared target instead of
    looping over all node pairs. Rows with no shared target are still checked for
    unit norm.
    """
    rows = graph.rows()
    incoming: dict[int, list[tuple[int, int | None, complex]]] = defaultdict(list)
    for u, by_bit in rows.items():
        for bit, row in by_bit.items():
            for dst, amp in row:
                if amp != 0:
                    incoming[dst].append((u, bit, amp))

    def consistent(u, bu, v, bv) -> bool:
        if graph.label_of(u) == graph.label_of(v):
            return bu == bv
        return True

    gram: dict[tuple, complex] = defaultdict(complex)
    for w, entries in incoming.items():
        for k1, (u, bu, au) in enumerate(entries):
            for (v, bv, av) in entries[k1:]:
                if not consistent(u, bu, v, bv):
                    continue
                key = _pair_key(u, bu, v, bv)
                if key[0] == u and key[1] == bu:
                    gram[key] += au.conjugate() * av
                else:
                    gram[key] += av.conjugate() * au

    violations = []
    for u, by_bit in rows.items():
        for bit in by_bit:
            value = gram.get((u, bit, u, bit), 0j)
            if abs(value - 1) > tol:
                violations.append(((u, bit), (u, bit), value))
    for (u, bu, v, bv), value in gram.items():
        if (u, bu) != (v, bv) and abs(value) > tol:
            violations.append(((u, bu), (v, bv), value))

    uni = []
    preds = graph.predecessors()
    for w, plist in preds.items():
        labels = {graph.label_of(u) for u, _, _ in plist}
        if len(labels) > 1:
            uni.append((w, tuple(sorted(map(str, labels)))))

    violations.sort(key=lambda item: (str(item[0]), str(item[1])))
    uni.sort(key=lambda item: item[0])
    return ValidationReport(not violations, not uni, violations, uni, tol)


def _pair_key(u, bu, v, bv) -> tuple:
    a, b = (u, -1 if bu is None else bu), (v, -1 if bv is None else bv)
    return (u, bu, v, bv) if a <= b else (v, bv, u, bu)


class InvalidGraphError(ValueError):
    """Raised when an operation needs a well-formed, unidirectional graph."""


def is_deterministic(graph: QbpGraph) -> bool:
    """Classical BP: every non-sink node has exactly one amplitude-1 edge per bit."""
    for n in graph.nodes:
        if n.kind == SINK:
            continue
        for row in graph.rows()[n.id].values():
            if len(row) != 1 or row[0][1] != 1:
                return False
    return True


def require_valid(graph: QbpGraph, tol: float = DEFAULT_TOL, allow_deterministic: bool = True) -> None:
    """Raise unless the graph is a valid QBP.

    Deterministic classical BPs are accepted too (unless disabled): they follow a
    single path, so the simulator is exact on them even when merging paths break
    well-formedness.
    """
    if "valid" not in graph._cache:
        graph._cache["valid"] = validate(graph, tol).ok
    if graph._cache["valid"]:
        return
    if allow_deterministic:
        if "deterministic" not in graph._cache:
            graph._cache["deterministic"] = is_deterministic(graph)
        if graph._cache["deterministic"]:
            return
    raise InvalidGraphError("graph is not well-formed and unidirectional")


# -- structural classification -------------------------------------------------------------


@dataclass(frozen=True)
class ClassInfo:
    leveled: bool
    read_once: bool
    regular_read_once: bool
    obdd_order: tuple[int, ...] | None
    reversible_classical: bool
    width: int | None


def reachable(graph: QbpGraph, source: int | None = None) -> list[int]:
    source = graph.start if source is None else source
    seen = {source}
    order = [source]
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in graph.successors(u):
            if w not in seen:
                seen.add(w)
                order.append(w)
                queue.append(w)
    return order


def topological_order(graph: QbpGraph, source: int | None = None) -> list[int] | None:
    """Topological order of the part reachable from ``source``; ``None`` if it has a cycle."""
    nodes = reachable(graph, source)
    inside = set(nodes)
    indeg = {u: 0 for u in nodes}
    for u in nodes:
        for w in graph.successors(u):
            if w in inside:
                indeg[w] += 1
    queue = deque(u for u in nodes if indeg[u] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in graph.successors(u):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return order if len(order) == len(nodes) else None


def distances(graph: QbpGraph) -> dict[int, tuple[int, int]] | None:
    """Min and max number of edges from the start node, or ``None`` on cycles."""
    order = topological_order(graph)
    if order is None:
        return None
    dist = {graph.start: (0, 0)}
    for u in order:
        lo, hi = dist[u]
        for w in graph.successors(u):
            if w in dist:
                wl, wh = dist[w]
                dist[w] = (min(wl, lo + 1), max(wh, hi + 1))
            else:
                dist[w] = (lo + 1, hi + 1)
    return dist


def classify(graph: QbpGraph) -> ClassInfo:
    order = topological_order(graph)
    reversible = _is_reversible_classical(graph)
    if order is None:
        return ClassInfo(False, False, False, None, reversible, None)

    dist = distances(graph)
    leveled = all(lo == hi for lo, hi in dist.values())
    width = None
    if leveled:
        counts: dict[int, int] = defaultdict(int)
        for lo, _ in dist.values():
            counts[lo] += 1
        width = max(counts.values())

    # bitmask of variables read strictly before each node, and min/max var counts
    before = {graph.start: 0}
    count = {graph.start: (0, 0)}
    read_once = True
    constraints: set[tuple[int, int]] = set()
    for u in order:
        node = graph.node(u)
        mask = before[u]
        lo, hi = count[u]
        if node.kind == VAR:
            bit = 1 << node.var
            if mask & bit:
                read_once = False
            for v in _bits(mask):
                constraints.add((v, node.var))
            mask |= bit
            lo, hi = lo + 1, hi + 1
        for w in graph.successors(u):
            before[w] = before.get(w, 0) | mask
            if w in count:
                cl, ch = count[w]
                count[w] = (min(cl, lo), max(ch, hi))
            else:
                count[w] = (lo, hi)

    regular = False
    if read_once:
        ends = [u for u in order if not graph.successors(u)]
        regular = bool(ends) and all(
            graph.node(u).is_sink and count[u] == (graph.num_vars, graph.num_vars) for u in ends
        )
    obdd = _order_from_constraints(graph.num_vars, constraints) if read_once else None
    return ClassInfo(leveled, read_once, regular, obdd, reversible, width)


def _bits(mask: int):
    k = 0
    while mask:
        if mask & 1:
            yield k
        mask >>= 1
        k += 1


def _order_from_constraints(num_vars: int, constraints: set[tuple[int, int]]) -> tuple[int, ...] | None:
    succ: dict[int, set[int]] = defaultdict(set)
    indeg = {v: 0 for v in range(1, num_vars + 1)}
    for a, b in constraints:
        if b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        v = heapq.heappop(heap)
        out.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    return tuple(out) if len(out) == num_vars else None


def _is_reversible_classical(graph: QbpGraph) -> bool:
    rows = graph.rows()
    for u, by_bit in rows.items():
        for row in by_bit.values():
            live = [(d, a) for d, a in row if a != 0]
            if len(live) != 1 or live[0][1] != 1:
                return False
    by_bit_preds: dict[tuple[int, int], int] = defaultdict(int)
    for w, plist in graph.predecessors().items():
        if len({graph.label_of(u) for u, _, _ in plist}) > 1:
            return False
        for u, bit, _ in plist:
            for b in ((0, 1) if bit is None else (bit,)):
                by_bit_preds[(w, b)] += 1
                if by_bit_preds[(w, b)] > 1:
                    return False
    return True


# -- transformations -------------------------------------------------------------------------


def restrict(graph: QbpGraph, assignment: Mapping[int, int]) -> QbpGraph:
    """Fix variables to constants: their nodes become unlabeled, inconsistent edges vanish."""
    for var, bit in assignment.items():
        if not (1 <= var <= graph.num_vars):
            raise KeyError(f"unknown variable {var}")
        if bit not in (0, 1):
            raise ValueError(f"variable {var}: value must be 0 or 1")
    if not assignment:
        return graph
    fixed = {n.id: assignment[n.var] for n in graph.nodes if n.kind == VAR and n.var in assignment}
    nodes = [Node(n.id, UNLABELED) if n.id in fixed else n for n in graph.nodes]
    edges = []
    for e in graph.edges:
        if e.src in fixed:
            if e.bit == fixed[e.src]:
                edges.append(Edge(e.src, e.dst, None, e.amp))
        else:
            edges.append(e)
    return QbpGraph(graph.num_vars, nodes, edges, graph.start)


def expand_unlabeled(graph: QbpGraph) -> QbpGraph:
    """Replace unlabeled nodes by nodes on a fresh dummy variable ``num_vars + 1``."""
    if not any(n.kind == UNLABELED for n in graph.nodes):
        return graph
    dummy = graph.num_vars + 1
    nodes = [Node(n.id, VAR, var=dummy) if n.kind == UNLABELED else n for n in graph.nodes]
    edges = []
    for e in graph.edges:
        if e.bit is None:
            edges.append(Edge(e.src, e.dst, 0, e.amp))
            edges.append(Edge(e.src, e.dst, 1, e.amp))
        else:
            edges.append(e)
    return QbpGraph(dummy, nodes, edges, graph.start)


def relabel_sinks(graph: QbpGraph) -> QbpGraph:
    """Complement every sink label."""
    nodes = [Node(n.id, SINK, label=1 - n.label) if n.is_sink else n for n in graph.nodes]
    return QbpGraph(graph.num_vars, nodes, graph.edges, graph.start)
