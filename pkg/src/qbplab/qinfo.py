"""Entropy, mutual information, fidelity, purification and realification for finite-dimensional states.

Logarithms are base 2. States are numpy arrays: 1-D arrays are pure state
vectors and 2-D arrays are density matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

STATE_TOL = 1e-10
EIG_FLOOR = 1e-12


class InvalidStateError(ValueError):
    pass


class BoundViolation(RuntimeError):
    """A numeric bound that must hold by theory was exceeded."""


# -- basic helpers ---------------------------------------------------------------------------


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def as_density(state, tol: float = STATE_TOL, check: bool = True) -> np.ndarray:
    """Density matrix for a vector or matrix, validated unless ``check`` is false."""
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        if check and abs(np.linalg.norm(arr) - 1) > tol:
            raise InvalidStateError(f"state vector has norm {np.linalg.norm(arr)}")
        return projector(arr)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {arr.shape}")
    if check:
        check_density(arr, tol)
    return arr


def check_density(rho: np.ndarray, tol: float = STATE_TOL) -> None:
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > tol:
        raise InvalidStateError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidStateError(f"trace is {np.trace(rho).real}, not 1")
    low = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min(initial=0.0)
    if low < -tol:
        raise InvalidStateError(f"matrix has negative eigenvalue {low}")


def _hermitian_eig(rho: np.ndarray):
    return np.linalg.eigh((rho + rho.conj().T) / 2)


def _entropy_of(values: Iterable[float]) -> float:
    total = 0.0
    for lam in values:
        lam = min(1.0, float(lam))
        if lam > EIG_FLOOR:
            total -= lam * math.log2(lam)
    return total


def shannon_entropy(probs: Iterable[float]) -> float:
    return _entropy_of(probs)


def binary_entropy(p: float) -> float:
    return _entropy_of((p, 1 - p))


def entropy(rho, check: bool = True, tol: float = STATE_TOL) -> float:
    """Von Neumann entropy in bits. Unnormalized input is accepted when ``check`` is false."""
    arr = np.asarray(rho, dtype=complex)
    if arr.ndim == 1:
        return 0.0
    if check:
        check_density(arr, tol)
    return _entropy_of(_hermitian_eig(arr)[0])


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (kept in their original order)."""
    rho = as_density(rho, check=False)
    dims = list(dims)
    k = len(dims)
    keep = sorted(keep)
    tensor = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(k)]
    col = [letters[k + i] if i in keep else letters[i] for i in range(k)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, tensor)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(d, d)


def mutual_info(rho: np.ndarray, dims: Sequence[int], a: Sequence[int], b: Sequence[int]) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) for subsystem index groups ``a`` and ``b``."""
    s = lambda idx: entropy(partial_trace(rho, dims, idx), check=False)
    return s(a) + s(b) - s(list(a) + list(b))


def conditional_mutual_info(rho, dims, a, b, c) -> float:
    """I(A:B|C) = S(AC) + S(BC) - S(ABC) - S(C)."""
    s = lambda idx: entropy(partial_trace(rho, dims, idx), check=False) if idx else 0.0
    a, b, c = list(a), list(b), list(c)
    return s(a + c) + s(b + c) - s(a + b + c) - s(c)


# -- classical-quantum ensembles ---------------------------------------------------------------


def _group(ensemble) -> tuple[dict, int]:
    groups: dict = {}
    dim = None
    total = 0.0
    for prob, label, state in ensemble:
        rho = as_density(state)
        if dim is None:
            dim = rho.shape[0]
        elif rho.shape[0] != dim:
            raise ValueError("all states of an ensemble must have the same dimension")
        if prob < 0:
            raise ValueError("negative probability")
        total += prob
        acc = groups.setdefault(label, [0.0, np.zeros((dim, dim), dtype=complex)])
        acc[0] += prob
        acc[1] += prob * rho
    if abs(total - 1) > STATE_TOL:
        raise ValueError(f"ensemble probabilities sum to {total}")
    return groups, dim


def cq_state(ensemble) -> np.ndarray:
    """Joint state sum_x Pr(x) rho(x) (x) |x><x| with labels in first-seen order."""
    groups, dim = _group(ensemble)
    m = len(groups)
    joint = np.zeros((dim * m, dim * m), dtype=complex)
    for k, (_, (_, weighted)) in enumerate(groups.items()):
        e = np.zeros((m, m))
        e[k, k] = 1
        joint += np.kron(weighted, e)
    return joint


def cq_mutual_info(ensemble) -> float:
    """I(Q:X) of a classical-quantum ensemble of (prob, label, state) triples.

    The joint state is block diagonal in the label, so its spectrum is the union of
    the spectra of the weighted blocks.
    """
    groups, _ = _group(ensemble)
    mixture = sum(w for _, w in groups.values())
    joint_eigs = np.concatenate([_hermitian_eig(w)[0] for _, w in groups.values()])
    h_label = shannon_entropy(p for p, _ in groups.values())
    return entropy(mixture, check=False) + h_label - _entropy_of(joint_eigs)


def cq_conditional_mutual_info(items) -> float:
    """I(Q:X|Y) for (prob, x, y, state) items: the Y-average of I(Q:X | Y=y)."""
    by_y: dict = {}
    for prob, x, y, state in items:
        by_y.setdefault(y, []).append((prob, x, state))
    total = 0.0
    for group in by_y.values():
        py = sum(p for p, _, _ in group)
        if py > 0:
            total += py * cq_mutual_info([(p / py, x, s) for p, x, s in group])
    return total


def conditional_entropy_cq(blocks) -> tuple[float, float]:
    """For (Pr(y), rho(X|Y=y)) pairs return S(rho(X),Y) - S(Y) computed on the joint
    state and the average sum_y Pr(y) S(rho(X|Y=y))."""
    ens = [(p, k, rho) for k, (p, rho) in enumerate(blocks)]
    joint = cq_state(ens)
    h_y = shannon_entropy(p for p, _ in blocks)
    direct = entropy(joint) - h_y
    average = sum(p * entropy(rho) for p, rho in blocks)
    return direct, average


def tripartite_conditional_info(blocks) -> tuple[float, float]:
    """Joint state sum_y Pr(y) rho_y (x) sigma_y (x) |y><y| from (Pr(y), rho_y, sigma_y).

    Returns I(rho:sigma | Y) computed from the joint state and the average
    sum_y Pr(y) I(rho_y : sigma_y) of the per-value product states.
    """
    m = len(blocks)
    da = as_density(blocks[0][1]).shape[0]
    db = as_density(blocks[0][2]).shape[0]
    joint = np.zeros((da * db * m, da * db * m), dtype=complex)
    average = 0.0
    for k, (p, rho, sigma) in enumerate(blocks):
        prod = np.kron(as_density(rho), as_density(sigma))
        e = np.zeros((m, m))
        e[k, k] = 1
        joint += p * np.kron(prod, e)
        average += p * mutual_info(prod, [da, db], [0], [1])
    direct = conditional_mutual_info(joint, [da, db, m], [0], [1], [2])
    return direct, average


# -- distances -------------------------------------------------------------------------------


def sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    vals, vecs = _hermitian_eig(rho)
    return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T


def fidelity(rho, sigma) -> float:
    """tr sqrt(sqrt(rho) sigma sqrt(rho)); |<a|b>| when both arguments are vectors."""
    a, b = np.asarray(rho, dtype=complex), np.asarray(sigma, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        if a.shape != b.shape:
            raise ValueError("dimension mismatch")
        as_density(a), as_density(b)
        return float(min(1.0, abs(np.vdot(a, b))))
    a, b = as_density(a), as_density(b)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    root = sqrtm_psd(a)
    vals = _hermitian_eig(root @ b @ root)[0]
    return float(min(1.0, np.sum(np.sqrt(np.clip(vals, 0, None)))))


def trace_distance(rho, sigma) -> float:
    """Trace norm of rho - sigma (range [0, 2])."""
    a, b = as_density(rho), as_density(sigma)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    return float(np.sum(np.abs(_hermitian_eig(a - b)[0])))


# -- purification and the local transition ------------------------------------------------------


def purify(rho) -> np.ndarray:
    """Canonical purification sum_k sqrt(l_k) |e_k>|k> over H (x) K with dim K = dim H.

    Eigenvalues are taken in decreasing order, so a pure input gives its vector
    times the ancilla state |0>.
    """
    rho = as_density(rho)
    vals, vecs = _hermitian_eig(rho)
    order = np.argsort(-vals, kind="stable")
    d = rho.shape[0]
    psi = np.zeros(d * d, dtype=complex)
    for slot, k in enumerate(order):
        psi += math.sqrt(max(vals[k], 0.0)) * np.kron(vecs[:, k], ket(slot, d))
    return psi / np.linalg.norm(psi)


def reduced_first(psi: np.ndarray, dim_h: int) -> np.ndarray:
    mat = np.asarray(psi, dtype=complex).reshape(dim_h, -1)
    return mat @ mat.conj().T


@dataclass(frozen=True)
class TransitionResult:
    unitary: np.ndarray
    overlap: float
    fidelity: float
    distance: float
    bound: float


def holevo_uniform_bit(rho0, rho1) -> float:
    """I(rho(X):X) for a uniform bit X encoded by rho0, rho1."""
    r0, r1 = as_density(rho0), as_density(rho1)
    return entropy((r0 + r1) / 2) - (entropy(r0) + entropy(r1)) / 2


def local_transition(rho0, rho1, psi0, psi1, tol: float = 1e-9) -> TransitionResult:
    """Unitary U on K maximizing |<psi1|(I (x) U)|psi0>|.

    With A_b the dim H x dim K coefficient matrices of psi_b, the overlap is
    tr(U M) for M = A0^T conj(A1); the polar factor of M attains the trace norm
    of M, which is the fidelity of rho0 and rho1.
    """
    r0, r1 = as_density(rho0), as_density(rho1)
    dim_h = r0.shape[0]
    p0, p1 = np.asarray(psi0, dtype=complex), np.asarray(psi1, dtype=complex)
    if p0.shape != p1.shape or p0.size % dim_h or p0.size // dim_h < dim_h:
        raise ValueError("purifications must live in H (x) K with dim K >= dim H")
    for rho, psi in ((r0, p0), (r1, p1)):
        if np.max(np.abs(reduced_first(psi, dim_h) - rho)) > tol:
            raise ValueError("given vector does not purify the given state")
    a0 = p0.reshape(dim_h, -1)
    a1 = p1.reshape(dim_h, -1)
    w, _, vh = np.linalg.svd(a0.T @ a1.conj())
    u = vh.conj().T @ w.conj().T
    moved = (a0 @ u.T).reshape(-1)
    overlap = abs(np.vdot(p1, moved))
    distance = 2 * math.sqrt(max(0.0, 1 - min(1.0, overlap) ** 2))
    bound = 2 * math.sqrt(2 * max(0.0, holevo_uniform_bit(r0, r1)))
    if distance > bound + 1e-8:
        raise BoundViolation(f"transition distance {distance} exceeds {bound}")
    return TransitionResult(u, overlap, fidelity(r0, r1), distance, bound)


def apply_on_k(u: np.ndarray, psi: np.ndarray, dim_h: int) -> np.ndarray:
    return (np.asarray(psi, dtype=complex).reshape(dim_h, -1) @ u.T).reshape(-1)


# -- realification ---------------------------------------------------------------------------


def realify_vector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    out = np.empty(2 * v.size)
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def realify_matrix(mat) -> np.ndarray:
    """Replace each entry a by the block [[Re a, -Im a], [Im a, Re a]]."""
    m = np.asarray(mat, dtype=complex)
    out = np.empty((2 * m.shape[0], 2 * m.shape[1]))
    out[0::2, 0::2] = m.real
    out[1::2, 1::2] = m.real
    out[0::2, 1::2] = -m.imag
    out[1::2, 0::2] = m.imag
    return out


def realify_state(rho) -> np.ndarray:
    """sum_i p_i |psi_i'><psi_i'| over the eigen-decomposition of rho."""
    rho = as_density(rho)
    vals, vecs = _hermitian_eig(rho)
    out = np.zeros((2 * rho.shape[0],) * 2)
    for lam, k in zip(vals, range(rho.shape[0])):
        r = realify_vector(vecs[:, k])
        out += max(lam, 0.0) * np.outer(r, r)
    return out


def realify(obj, kind: str | None = None) -> np.ndarray:
    """Vectors map entrywise to (Re, Im) pairs. Matrices map to the block form,
    or to the realified state when ``kind='state'``."""
    arr = np.asarray(obj)
    if arr.ndim == 1:
        return realify_vector(arr)
    if kind == "state":
        return realify_state(arr)
    return realify_matrix(arr)


# -- vector inequality -------------------------------------------------------------------------


def weak_triangle_gap(u, v, w, tol: float = 1e-9) -> float:
    """<u|w> - (2(<u|v> + <v|w>) - 3) for real unit vectors; never below zero."""
    vecs = [np.asarray(t, dtype=float) for t in (u, v, w)]
    if len({t.shape for t in vecs}) != 1:
        raise ValueError("dimension mismatch")
    for t in vecs:
        if abs(np.linalg.norm(t) - 1) > tol:
            raise ValueError("inputs must be unit vectors")
    u, v, w = vecs
    return float(u @ w - (2 * (u @ v + v @ w) - 3))


# -- random generators for tests and experiments ---------------------------------------------------


def random_pure(dim: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    v = rng.standard_normal(dim) + (0 if real else 1j * rng.standard_normal(dim))
    return np.asarray(v / np.linalg.norm(v), dtype=complex)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    r = rank or dim
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
