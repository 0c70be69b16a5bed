"""Classical rectangle toolkit: Hamming balls, exact weighted-sum distributions,
the equal-sum input distribution, index-function rectangles and one-way
rectangle partitions of deterministic read-once BPs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .functions import is_prime, smallest_prime_after, weighted_sum
from .graph import SINK, VAR, QbpGraph, is_deterministic
from .protocols import PartitionSpec
from .qinfo import binary_entropy

MAX_DP_TERMS = 10**4


def hamming_ball_size(n: int, r: int) -> int:
    if not 0 <= r <= n:
        raise ValueError("radius must lie in 0..n")
    return sum(math.comb(n, k) for k in range(r + 1))


def ball_entropy_bound(n: int, eps: float) -> float:
    return 2 ** (binary_entropy(eps) * n)


# -- weighted sums --------------------------------------------------------------------------------


@dataclass(frozen=True)
class SumDistribution:
    q: int
    probs: tuple  # Fractions in exact mode, floats otherwise
    max_deviation: float


def _check_coeffs(q: int, coeffs: Sequence[int]) -> list[int]:
    if not is_prime(q):
        raise ValueError(f"modulus {q} is not prime")
    if len(coeffs) > MAX_DP_TERMS:
        raise ValueError(f"at most {MAX_DP_TERMS} coefficients")
    res = [c % q for c in coeffs]
    if any(r == 0 for r in res):
        raise ValueError("coefficients must be nonzero mod q")
    if len(set(res)) != len(res):
        raise ValueError("coefficients must be pairwise distinct mod q")
    return res


def weighted_sum_distribution(q: int, coeffs: Sequence[int], exact: bool = True) -> SumDistribution:
    """Distribution of sum a_i x_i mod q over uniform x, by a DP over residues.

    Exact mode counts assignments with integers and returns Fractions; the float
    mode halves probabilities per step.
    """
    res = _check_coeffs(q, coeffs)
    if exact:
        counts = np.zeros(q, dtype=object)
        counts[:] = 0
        counts[0] = 1
        for a in res:
            counts = counts + np.roll(counts, a)
        total = 2 ** len(res)
        probs = tuple(Fraction(int(c), total) for c in counts)
        dev = max(abs(p - Fraction(1, q)) for p in probs)
        return SumDistribution(q, probs, float(dev))
    vec = np.zeros(q)
    vec[0] = 1.0
    for a in res:
        vec = 0.5 * (vec + np.roll(vec, a))
    return SumDistribution(q, tuple(float(v) for v in vec), float(np.max(np.abs(vec - 1 / q))))


def enumerate_sum_distribution(q: int, coeffs: Sequence[int]) -> tuple:
    """Reference by brute force over all 2^n assignments."""
    counts = [0] * q
    for x in itertools.product((0, 1), repeat=len(coeffs)):
        counts[sum(a * b for a, b in zip(coeffs, x)) % q] += 1
    return tuple(Fraction(c, 2 ** len(coeffs)) for c in counts)


# -- the equal-sum distribution -------------------------------------------------------------------


@dataclass(frozen=True)
class DifficultDistribution:
    n: int
    p: int
    residue_counts: tuple[int, ...]
    support: frozenset

    @property
    def size(self) -> int:
        return len(self.support)

    def mass(self, x, y) -> Fraction:
        return Fraction(1, self.size) if (tuple(x), tuple(y)) in self.support else Fraction(0)

    def uniform_measure(self) -> Fraction:
        """Fraction of the full square {0,1}^n x {0,1}^n that lies in the support."""
        return Fraction(self.size, 4**self.n)


MAX_DIFFICULT_N = 12


def difficult_distribution(n: int) -> DifficultDistribution:
    """Uniform distribution on pairs (x, y) with equal weighted sums mod p(n)."""
    if not 1 <= n <= MAX_DIFFICULT_N:
        raise ValueError(f"n must lie in 1..{MAX_DIFFICULT_N}")
    p = smallest_prime_after(n)
    groups: dict[int, list] = {}
    for x in itertools.product((0, 1), repeat=n):
        groups.setdefault(weighted_sum(x, p), []).append(x)
    support = frozenset((a, b) for g in groups.values() for a in g for b in g)
    counts = tuple(len(groups.get(r, ())) for r in range(p))
    return DifficultDistribution(n, p, counts, support)


# -- index function ---------------------------------------------------------------------------------


def _best_by_balls(n: int, radius: int):
    best, witness = 0, None
    for r in itertools.product((0, 1), repeat=n):
        ball = [a for a in itertools.product((0, 1), repeat=n) if sum(u != v for u, v in zip(a, r)) <= radius]
        if len(ball) > best:
            best, witness = len(ball), (r, tuple(ball))
    return best, witness


def _best_by_subsets(n: int, radius: int):
    cube = list(itertools.product((0, 1), repeat=n))
    best, witness = 0, None
    for mask in range(1, 2 ** len(cube)):
        subset = [cube[k] for k in range(len(cube)) if mask >> k & 1]
        if len(subset) <= best:
            continue
        for r in cube:
            if all(sum(u != v for u, v in zip(a, r)) <= radius for a in subset):
                best, witness = len(subset), (r, tuple(subset))
                break
    return best, witness


def best_ind_rectangle(n: int, eps: float, method: str = "auto"):
    """Largest A in {0,1}^n whose members all lie within distance floor(eps n) of one
    row vector r, the structure a rectangle needs for an eps-approximation of the
    index function. Returns (max |A|, (r, A))."""
    if not 1 <= n <= 4:
        raise ValueError("n must lie in 1..4")
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    radius = math.floor(eps * n + 1e-12)
    if method == "auto":
        method = "subsets" if n <= 3 else "balls"
    best, witness = (_best_by_subsets if method == "subsets" else _best_by_balls)(n, radius)
    if eps <= 0.5 and best > ball_entropy_bound(n, eps) + 1e-9:
        raise AssertionError(f"|A| = {best} exceeds 2^(H(eps) n)")
    return best, witness


# -- rectangle partitions of deterministic BPs -------------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    partition: PartitionSpec
    A: frozenset  # assignments to partition.alice_vars, in that order
    ell: int
    cut_node: int
    side: str  # which part hit the threshold: "x", "y" or "sink"

    def contains(self, bits: Sequence[int]) -> bool:
        return tuple(bits[v - 1] for v in self.partition.alice_vars) in self.A

    def is_one_way(self) -> bool:
        return True  # B is always the full cube of the second part

    def is_ell_rectangle(self, half: int) -> bool:
        xs = sum(1 for v in self.partition.alice_vars if v <= half)
        ys = len(self.partition.alice_vars) - xs
        return (xs == self.ell and ys <= self.ell - 1) or (ys == self.ell and xs <= self.ell - 1)


def _trace(graph: QbpGraph, bits: Sequence[int], half: int, ell: int):
    """Walk the unique path; stop at the first node where ell variables of one side were read."""
    rows = graph.rows()
    v = graph.start
    read: list[int] = []
    while True:
        xs = sum(1 for u in read if u <= half)
        ys = len(read) - xs
        # one variable is read per step, so both sides cannot cross together;
        # the X side is checked first
        if xs >= ell:
            return v, tuple(read), "x"
        if ys >= ell:
            return v, tuple(read), "y"
        node = graph.node(v)
        if node.kind == SINK:
            return v, tuple(read), "sink"
        if node.kind == VAR:
            read.append(node.var)
            (w, _), = rows[v][bits[node.var - 1]]
        else:
            (w, _), = rows[v][None]
        v = w


def deterministic_eval(graph: QbpGraph, bits: Sequence[int]) -> int:
    rows = graph.rows()
    v = graph.start
    while graph.node(v).kind != SINK:
        node = graph.node(v)
        (v, _), = rows[v][bits[node.var - 1] if node.kind == VAR else None]
    return graph.node(v).label


def brs_partition(graph: QbpGraph, ell: int, merge: bool = True) -> list[Rectangle]:
    """One-way ell-rectangles partitioning the input cube of a deterministic read-once BP
    on 2n variables (x = 1..n, y = n+1..2n).

    Each input is keyed by the node where its path first has ell variables of one
    side read, together with those read variables. Paths that end at a sink
    earlier are padded with unread x variables up to ell. With ``merge`` the
    assignments sharing a key form one rectangle; otherwise every assignment is
    its own rectangle.
    """
    if not is_deterministic(graph):
        raise ValueError("brs_partition needs a deterministic BP")
    num = graph.num_vars
    if num % 2 or not 1 <= ell <= num // 2 - 1:
        raise ValueError("need 2n variables and 1 <= ell <= n-1")
    if num > 24:
        raise ValueError("at most 12 variables per side")
    half = num // 2
    groups: dict = {}
    for bits in itertools.product((0, 1), repeat=num):
        v, read, side = _trace(graph, bits, half, ell)
        first = list(read)
        if side == "sink":
            spare = [u for u in range(1, half + 1) if u not in first]
            need = ell - sum(1 for u in first if u <= half)
            first += spare[:need]
        alice = tuple(sorted(first))
        value = tuple(bits[u - 1] for u in alice)
        key = (v, alice, side) if merge else (v, alice, side, value)
        groups.setdefault(key, set()).add(value)
    out = []
    for key, values in groups.items():
        v, alice, side = key[:3]
        bob = tuple(u for u in range(1, num + 1) if u not in alice)
        out.append(Rectangle(PartitionSpec(alice, bob), frozenset(values), ell, v, side))
    return out


@dataclass(frozen=True)
class PartitionCheck:
    count: int
    bound: int
    disjoint_cover: bool
    one_way: bool
    ell_compliant: bool
    g_uniform: bool

    @property
    def ok(self) -> bool:
        return self.disjoint_cover and self.one_way and self.ell_compliant and self.g_uniform and self.count <= self.bound


def verify_partition(graph: QbpGraph, rects: list[Rectangle]) -> PartitionCheck:
    """Exhaustive checks: every input lies in exactly one rectangle, rectangles are one-way
    ell-rectangles, and the BP's value inside each depends only on the second part."""
    num = graph.num_vars
    half = num // 2
    weights = 1 << np.arange(num - 1, -1, -1)
    cover = np.zeros(2**num, dtype=np.int64)
    g_uniform = True
    for rect in rects:
        alice, bob = rect.partition.alice_vars, rect.partition.bob_vars
        for b in itertools.product((0, 1), repeat=len(bob)):
            seen = set()
            for a in rect.A:
                bits = [0] * num
                for u, val in zip(alice, a):
                    bits[u - 1] = val
                for u, val in zip(bob, b):
                    bits[u - 1] = val
                cover[int(np.dot(bits, weights))] += 1
                seen.add(deterministic_eval(graph, bits))
            g_uniform &= len(seen) <= 1
    return PartitionCheck(
        len(rects),
        2 * half * len(graph.nodes),
        bool(np.all(cover == 1)),
        all(r.is_one_way() for r in rects),
        all(r.is_ell_rectangle(half) for r in rects),
        g_uniform,
    )
