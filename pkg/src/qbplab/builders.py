"""Explicit QBP constructions: the mixed-weighted-sum programs, the DISJ chain and random QROBPs.

Two-vector inputs use x_k = variable k and y_k = variable n + k.
"""

from __future__ import annotations

import math

import numpy as np

from .functions import smallest_prime_after
from .graph import SINK, UNLABELED, VAR, Edge, Node, QbpGraph

MAX_MWS_N = 32
# every strict MWS graph has at most STRICT_SIZE_CONSTANT * (2n+3) * p^2 nodes
STRICT_SIZE_CONSTANT = 8

_H = 1 / math.sqrt(2)


class _Assembler:
    """Collects nodes keyed by hashable state descriptions and assigns integer ids."""

    def __init__(self):
        self.ids: dict = {}
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []

    def add(self, key, kind: str, var: int | None = None, label: int | None = None) -> int:
        if key in self.ids:
            return self.ids[key]
        node_id = len(self.nodes)
        self.ids[key] = node_id
        self.nodes.append(Node(node_id, kind, var=var, label=label))
        return node_id

    def edge(self, src: int, dst: int, bit: int | None, amp: complex) -> None:
        self.edges.append(Edge(src, dst, bit, complex(amp)))

    def graph(self, num_vars: int, start: int = 0) -> QbpGraph:
        return QbpGraph(num_vars, self.nodes, self.edges, start)


def _check_n(n: int) -> int:
    if not 2 <= n <= MAX_MWS_N:
        raise ValueError(f"n must lie in 2..{MAX_MWS_N}, got {n}")
    return smallest_prime_after(n)


def _candidate_order(n: int, p: int, j: int) -> tuple[list[int], tuple[int, ...]]:
    """x-read order for the second branch once y_1..y_{n-1} gave partial sum j.

    The final y-sum is j or j+n, so x_j and x_{j+n} are the only x bits that can
    matter; they are read last. Returns (order, candidates in read order).
    """
    cands = [t for t in dict.fromkeys((j % p, (j + n) % p)) if 2 <= t <= n]
    if len(cands) == 2 and cands[0] == (2 * cands[1]) % p:
        cands.reverse()
    rest = [k for k in range(2, n + 1) if k not in cands]
    return rest + cands, tuple(cands)


def build_mws_qbp(n: int, strict: bool = True) -> QbpGraph:
    """Error-free read-once QBP for the mixed weighted sum on 2n variables.

    Two classical reversible branches run in superposition, marked by a register
    a, with a phase register b prepared as |->: branch a=0 reads x then y and
    flips b by y_{s(x)}, branch a=1 flips b by x_{s(y)}. Columns hold the running
    sums (i, j) mod p. When i = j a Hadamard on a is realized at the sinks, so
    the output label is x_s XOR y_s; all other columns go to 0-sinks.
    """
    p = _check_n(n)
    return _build_strict(n, p) if strict else _build_grid(n, p)


def _hadamard_sinks(asm: _Assembler, src: int, bit, a: int, tail: tuple) -> None:
    for out in (0, 1):
        sink = asm.add(("s", out) + tail, SINK, label=out)
        asm.edge(src, sink, bit, -_H if (a and out) else _H)


def _build_grid(n: int, p: int) -> QbpGraph:
    asm = _Assembler()
    start = asm.add(("src",), UNLABELED)
    seqs = {0: list(range(1, 2 * n + 1)), 1: list(range(n + 1, 2 * n + 1)) + list(range(1, n + 1))}
    level = []
    for a in (0, 1):
        for b in (0, 1):
            key = (a, b, 0, 0)
            asm.add(("g", 1) + key, VAR, var=seqs[a][0])
            level.append(key)
            asm.edge(start, asm.ids[("g", 1) + key], None, (-1) ** b / 2)
    for row in range(1, 2 * n + 1):
        nxt = []
        for key in level:
            a, b, i, j = key
            var = seqs[a][row - 1]
            src = asm.ids[("g", row) + key]
            for u in (0, 1):
                ni, nj, nb = i, j, b
                if var <= n:
                    k = var
                    ni = (i + k * u) % p
                    if a == 1 and j == k:
                        nb ^= u
                else:
                    k = var - n
                    nj = (j + k * u) % p
                    if a == 0 and i == k:
                        nb ^= u
                nkey = (a, nb, ni, nj)
                if row < 2 * n:
                    if ("g", row + 1) + nkey not in asm.ids:
                        nxt.append(nkey)
                    dst = asm.add(("g", row + 1) + nkey, VAR, var=seqs[a][row])
                elif ni != nj:
                    dst = asm.add(("z",) + nkey, SINK, label=0)
                else:
                    dst = asm.add(("h", a, nb, ni), UNLABELED)
                asm.edge(src, dst, u, 1)
        level = sorted(nxt)
    for key, node_id in list(asm.ids.items()):
        if key[0] == "h":
            _, a, b, i = key
            _hadamard_sinks(asm, node_id, None, a, (b, i))
    return asm.graph(2 * n)


def _build_strict(n: int, p: int) -> QbpGraph:
    """No unlabeled nodes: the source is merged into an x_1 node and the Hadamard
    into the last y_n level.

    Branch a=1 reads x_1, y_1..y_{n-1}, then x_2..x_n in a path-dependent order,
    then y_n. Both branches keep c = x_1 so their columns agree at the end; x_1's
    contribution to branch 1 is applied at the y_n read from c.
    """
    asm = _Assembler()
    x = lambda k: k
    y = lambda k: n + k
    seq0 = [x(k) for k in range(2, n + 1)] + [y(k) for k in range(1, n + 1)]

    def var_of(level: int, key) -> int:
        a, _, _, _, j = key
        if a == 0:
            return seq0[level - 2]
        if level <= n:
            return y(level - 1)
        if level < 2 * n:
            return x(_candidate_order(n, p, j)[0][level - n - 1])
        return y(n)

    def move(level: int, key, u: int):
        a, b, c, i, j = key
        var = var_of(level, key)
        if a == 0:
            if var <= n:
                i = (i + var * u) % p
            else:
                k = var - n
                if i == k:
                    b ^= u
                j = (j + k * u) % p
            return (a, b, c, i, j)
        if var > n:
            k = var - n
            j = (j + k * u) % p
            if k == n and j == 1:
                b ^= c
            return (a, b, c, i, j)
        k = var
        cands = _candidate_order(n, p, j)[1]
        i = (i + k * u) % p
        if u and k in cands:
            if k == cands[-1]:
                hit = i == k
            else:
                hit = i in (k, (k - cands[-1]) % p)
            b ^= int(hit)
        return (a, b, c, i, j)

    start = asm.add(("start",), VAR, var=x(1))
    level = []
    for u in (0, 1):
        for a in (0, 1):
            for b in (0, 1):
                key = (a, b, u, u % p, 0)
                dst = asm.add((2,) + key, VAR, var=var_of(2, key))
                level.append(key)
                asm.edge(start, dst, u, (-1) ** b / 2)
    level.sort()
    for row in range(2, 2 * n + 1):
        nxt = []
        for key in level:
            src = asm.ids[(row,) + key]
            for u in (0, 1):
                a, b, c, i, j = nkey = move(row, key, u)
                if row < 2 * n:
                    if (row + 1,) + nkey not in asm.ids:
                        nxt.append(nkey)
                    dst = asm.add((row + 1,) + nkey, VAR, var=var_of(row + 1, nkey))
                    asm.edge(src, dst, u, 1)
                elif i != j:
                    asm.edge(src, asm.add(("z",) + nkey, SINK, label=0), u, 1)
                else:
                    _hadamard_sinks(asm, src, u, a, (b, c, i))
        level = sorted(nxt)
    return asm.graph(2 * n)


def strict_size_bound(n: int) -> int:
    p = smallest_prime_after(n)
    return STRICT_SIZE_CONSTANT * (2 * n + 3) * p * p


def build_disj_obdd(n: int) -> QbpGraph:
    """Deterministic chain x1, y1, ..., xn, yn with a 0-sink and a 1-sink (2n+2 nodes).

    x_k = 0 skips y_k, x_k = y_k = 1 rejects, and passing all pairs accepts.
    """
    if n < 1:
        raise ValueError("n must be positive")
    asm = _Assembler()
    for k in range(1, n + 1):
        asm.add(("x", k), VAR, var=k)
        asm.add(("y", k), VAR, var=n + k)
    zero = asm.add(("sink", 0), SINK, label=0)
    one = asm.add(("sink", 1), SINK, label=1)
    ids = asm.ids
    for k in range(1, n + 1):
        nxt = ids[("x", k + 1)] if k < n else one
        asm.edge(ids[("x", k)], nxt, 0, 1)
        asm.edge(ids[("x", k)], ids[("y", k)], 1, 1)
        asm.edge(ids[("y", k)], nxt, 0, 1)
        asm.edge(ids[("y", k)], zero, 1, 1)
    return asm.graph(2 * n, start=ids[("x", 1)])


def random_unitary(dim: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """QR of a Gaussian matrix with the phase ambiguity removed."""
    g = rng.standard_normal((dim, dim))
    if not real:
        g = g + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_regular_qrobp(n: int, width: int, seed: int, real: bool = False) -> QbpGraph:
    """Leveled regular read-once QBP reading x_1..x_n in order.

    Level 1 is the start node, levels 2..n have ``width`` nodes and the last level
    holds ``width`` sinks labelled alternately 0 and 1. Node k of a level uses
    row k of a seeded random unitary per bit.
    """
    if n < 1 or width < 2:
        raise ValueError("need n >= 1 and width >= 2")
    rng = np.random.default_rng(seed)
    asm = _Assembler()
    level = [asm.add((1, 0), VAR, var=1)]
    for ell in range(1, n + 1):
        if ell < n:
            nxt = [asm.add((ell + 1, k), VAR, var=ell + 1) for k in range(width)]
        else:
            nxt = [asm.add(("sink", k), SINK, label=k % 2) for k in range(width)]
        for bit in (0, 1):
            u = random_unitary(width, rng, real=real)
            for row, src in enumerate(level):
                for col, dst in enumerate(nxt):
                    if u[row, col] != 0:
                        asm.edge(src, dst, bit, u[row, col])
        level = nxt
    return asm.graph(n)


def random_branching_qrobp(n: int, width: int, seed: int, real: bool = False) -> QbpGraph:
    """Regular read-once QBP whose start node (reading x_1) splits into two groups of
    ``width`` nodes that read x_2..x_{n-1} in two seeded orders (different when
    n >= 4) and both read x_n last, which keeps the sinks unidirectional.

    Groups evolve under their own random unitaries and meet only at the sinks,
    where a shared random unitary on the 2*width sinks mixes them; row spaces of
    the two groups stay complementary, so every input gives a unitary step.
    """
    if n < 1 or width < 2:
        raise ValueError("need n >= 1 and width >= 2")
    rng = np.random.default_rng(seed)
    middle = list(range(2, n))
    orders = [[int(v) for v in rng.permutation(middle)] + [n] for _ in range(2)]
    if n >= 4:
        while orders[1] == orders[0]:
            orders[1] = [int(v) for v in rng.permutation(middle)] + [n]
    asm = _Assembler()
    start = asm.add(("start",), VAR, var=1)
    if n == 1:
        sinks = [asm.add(("sink", k), SINK, label=k % 2) for k in range(2)]
        for bit in (0, 1):
            u = random_unitary(2, rng, real=real)
            for col, dst in enumerate(sinks):
                asm.edge(start, dst, bit, u[0, col])
        return asm.graph(1)
    level = [[asm.add((2, g, k), VAR, var=orders[g][0]) for k in range(width)] for g in (0, 1)]
    for bit in (0, 1):
        u = random_unitary(2 * width, rng, real=real)
        for col, dst in enumerate(level[0] + level[1]):
            asm.edge(start, dst, bit, u[0, col])
    for ell in range(2, n + 1):
        if ell < n:
            nxt = [[asm.add((ell + 1, g, k), VAR, var=orders[g][ell - 1]) for k in range(width)] for g in (0, 1)]
            for g in (0, 1):
                for bit in (0, 1):
                    u = random_unitary(width, rng, real=real)
                    for row, src in enumerate(level[g]):
                        for col, dst in enumerate(nxt[g]):
                            asm.edge(src, dst, bit, u[row, col])
            level = nxt
            continue
        sinks = [asm.add(("sink", k), SINK, label=k % 2) for k in range(2 * width)]
        mix = random_unitary(2 * width, rng, real=real)
        for g in (0, 1):
            for bit in (0, 1):
                u = np.zeros((width, 2 * width), dtype=complex)
                u[:, g * width : (g + 1) * width] = random_unitary(width, rng, real=real)
                u = u @ mix
                for row, src in enumerate(level[g]):
                    for col, dst in enumerate(sinks):
                        asm.edge(src, dst, bit, u[row, col])
    return asm.graph(n)


def obdd_from_function(num_vars: int, f, order=None) -> QbpGraph:
    """Deterministic leveled OBDD for ``f`` (a function of a bit tuple) in the given
    variable order, merging prefixes whose remaining subfunctions agree. Every path
    reads every variable, so the result is a regular read-once BP."""
    if not 1 <= num_vars <= 16:
        raise ValueError("num_vars must lie in 1..16")
    order = list(order or range(1, num_vars + 1))
    if sorted(order) != list(range(1, num_vars + 1)):
        raise ValueError("order must be a permutation of the variables")
    # truth table indexed by bits in read order
    table = []
    for k in range(2**num_vars):
        read = [(k >> (num_vars - 1 - i)) & 1 for i in range(num_vars)]
        bits = [0] * num_vars
        for var, b in zip(order, read):
            bits[var - 1] = b
        table.append(int(f(tuple(bits))))
    asm = _Assembler()
    root = tuple(table)
    level = [root]
    asm.add((0, root), VAR, var=order[0])
    for depth in range(num_vars):
        nxt: dict = {}
        for sub in level:
            half = len(sub) // 2
            for bit, child in ((0, sub[:half]), (1, sub[half:])):
                if depth + 1 == num_vars:
                    dst = asm.add(("sink", child[0]), SINK, label=child[0])
                else:
                    dst = asm.add((depth + 1, child), VAR, var=order[depth + 1])
                    nxt[child] = None
                asm.edge(asm.ids[(depth, sub)], dst, bit, 1)
        level = list(nxt)
    return asm.graph(num_vars, start=asm.ids[(0, root)])
