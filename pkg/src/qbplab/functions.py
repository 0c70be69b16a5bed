"""Modular weighted sums and reference evaluators for the boolean functions under study.

Variable convention for two-vector functions on 2n bits: x_k is variable k and
y_k is variable n + k, so an input bit tuple is ``x + y``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

MAX_PRIME_ARG = 10**6


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def smallest_prime_after(n: int) -> int:
    if not 1 <= n <= MAX_PRIME_ARG:
        raise ValueError(f"n must lie in 1..{MAX_PRIME_ARG}, got {n}")
    m = n + 1
    while not is_prime(m):
        m += 1
    return m


def weighted_sum(x: Sequence[int], q: int) -> int:
    """(sum_i i * x_i) mod q with 1-based weights."""
    if q < 2:
        raise ValueError("modulus must be at least 2")
    return sum(i * b for i, b in enumerate(x, start=1)) % q


def sigma(assignment: dict[int, int], indices: Iterable[int], q: int) -> int:
    """Weighted sum restricted to the given 1-based indices of a partial assignment."""
    return sum(i * assignment[i] for i in indices) % q


def _split(z: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if len(z) % 2:
        raise ValueError("expected an even number of bits")
    n = len(z) // 2
    return tuple(z[:n]), tuple(z[n:])


def ws_eval(x: Sequence[int]) -> int:
    n = len(x)
    s = weighted_sum(x, smallest_prime_after(n))
    return int(x[s - 1]) if 1 <= s <= n else 0


def mws_eval(x: Sequence[int], y: Sequence[int] | None = None) -> int:
    """x_s XOR y_s when both weighted sums equal s in 1..n, else 0."""
    if y is None:
        x, y = _split(x)
    n = len(x)
    if len(y) != n:
        raise ValueError("x and y must have equal length")
    p = smallest_prime_after(n)
    s = weighted_sum(x, p)
    if s != weighted_sum(y, p) or not 1 <= s <= n:
        return 0
    return int(x[s - 1]) ^ int(y[s - 1])


def disj_eval(x: Sequence[int], y: Sequence[int] | None = None) -> int:
    if y is None:
        x, y = _split(x)
    return int(not any(a and b for a, b in zip(x, y, strict=True)))


def nd_eval(x: Sequence[int], y: Sequence[int] | None = None) -> int:
    return 1 - disj_eval(x, y)


def ind_eval(u: Sequence[int], v: int) -> int:
    if not 1 <= v <= len(u):
        raise ValueError(f"index {v} outside 1..{len(u)}")
    return int(u[v - 1])


FUNCTIONS: dict[str, Callable[[Sequence[int]], int]] = {
    "mws": mws_eval,
    "disj": disj_eval,
    "nd": nd_eval,
    "ws": ws_eval,
}
