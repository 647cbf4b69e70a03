"""Simultaneous block triangularization of a commuting family of lifted affine maps.

The conjugating matrix P always has first row (1, 0, ..., 0), so it is itself the lift
of an invertible affine map, and P^-1 phi(f) P is block diagonal with lower-triangular
blocks of constant diagonal for every generator f.
"""
from __future__ import annotations

import heapq

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import sympy as sp

from affdyn._exact import is_zero, to_complex
from affdyn.affine import AffineMap, phi
from affdyn.shapes import ShapeCheck, block_slices, validate_block_shape

__all__ = [
    "BlockStructure",
    "CanonicalVectors",
    "NormalFormError",
    "NonCommutingError",
    "EmptyFamilyError",
    "canonical_vectors",
    "check_commuting",
    "compute_normal_form",
    "validate_block_shape",
    "ShapeCheck",
]

CLUSTER_TOLERANCES = (1e-6, 1e-4, 1e-3, 1e-2)


class NormalFormError(RuntimeError):
    """The spectra could not be separated to the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NonCommutingError(ValueError):
    def __init__(self, i: int, j: int, norm: float):
        super().__init__(f"generators {i} and {j} do not commute (commutator norm {norm:.3e})")
        self.pair = (i, j)
        self.norm = norm


class EmptyFamilyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BlockStructure:
    eta: tuple[int, ...]
    P: np.ndarray | sp.ImmutableMatrix
    P_inv: np.ndarray | sp.ImmutableMatrix
    residual: float = 0.0
    cluster_tol: float | None = None

    @property
    def r(self) -> int:
        return len(self.eta)

    @property
    def n(self) -> int:
        return sum(self.eta) - 1

    @property
    def is_exact(self) -> bool:
        return isinstance(self.P, sp.MatrixBase)

    @property
    def u0(self):
        return _u0(self.eta, self.is_exact)

    @property
    def v0(self):
        if self.is_exact:
            return sp.ImmutableMatrix(self.P * self.u0)
        return self.P @ self.u0

    @property
    def w0(self):
        v = self.v0
        return sp.ImmutableMatrix(v[1:, 0]) if self.is_exact else v[1:]

    def conjugate(self, M):
        """P^-1 M P."""
        if self.is_exact:
            return sp.ImmutableMatrix((self.P_inv * M * self.P).applyfunc(sp.expand))
        return self.P_inv @ np.asarray(M, dtype=complex) @ self.P

    def unconjugate(self, M):
        """P M P^-1."""
        if self.is_exact:
            return sp.ImmutableMatrix((self.P * M * self.P_inv).applyfunc(sp.expand))
        return self.P @ np.asarray(M, dtype=complex) @ self.P_inv


@dataclass(frozen=True, eq=False)
class CanonicalVectors:
    u0: object
    e_k: list = field(default_factory=list)
    J_k: list = field(default_factory=list)
    Pe_k: list = field(default_factory=list)
    p2_Pe_k: list = field(default_factory=list)


def _u0(eta, exact: bool):
    size = sum(eta)
    starts = np.cumsum((0,) + tuple(eta))[:-1]
    if exact:
        u = sp.zeros(size, 1)
        for s in starts:
            u[int(s), 0] = 1
        return sp.ImmutableMatrix(u)
    u = np.zeros(size, dtype=complex)
    u[starts] = 1.0
    return u


def canonical_vectors(structure: BlockStructure) -> CanonicalVectors:
    eta = structure.eta
    size = sum(eta)
    exact = structure.is_exact
    u0 = _u0(eta, exact)
    e_k, J_k, Pe_k, p2 = [], [], [], []
    for sl in block_slices(eta):
        if exact:
            e = sp.zeros(size, 1)
            e[sl.start, 0] = 1
            J = sp.zeros(size, size)
            for i in range(sl.start, sl.stop):
                J[i, i] = 1
            Pe = structure.P * e
            e_k.append(sp.ImmutableMatrix(e))
            J_k.append(sp.ImmutableMatrix(J))
            Pe_k.append(sp.ImmutableMatrix(Pe))
            p2.append(sp.ImmutableMatrix(Pe[1:, 0]))
        else:
            e = np.zeros(size, dtype=complex)
            e[sl.start] = 1.0
            J = np.zeros((size, size), dtype=complex)
            J[sl, sl] = np.eye(sl.stop - sl.start)
            Pe = structure.P @ e
            e_k.append(e)
            J_k.append(J)
            Pe_k.append(Pe)
            p2.append(Pe[1:])
    return CanonicalVectors(u0, e_k, J_k, Pe_k, p2)


def check_commuting(mats, tol: float = 1e-9) -> None:
    """Raise NonCommutingError for the first pair whose commutator is not negligible.

    Float commutators are compared against ``tol * max(1, |A| |B|)`` so large entries
    do not trip the check on rounding noise.
    """
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            A, B = mats[i], mats[j]
            if isinstance(A, sp.MatrixBase):
                C = (A * B - B * A).applyfunc(sp.expand)
                if not all(is_zero(x) for x in C):
                    norm = max(abs(to_complex(x)) for x in C)
                    raise NonCommutingError(i, j, norm)
            else:
                C = A @ B - B @ A
                norm = float(np.abs(C).max())
                scale = max(1.0, float(np.abs(A).max() * np.abs(B).max()))
                if norm > tol * scale:
                    raise NonCommutingError(i, j, norm)


def _lifts(generators: Sequence[AffineMap]):
    if len(generators) == 0:
        raise EmptyFamilyError("the generator list is empty; at least one map is required")
    n = generators[0].n
    exact = generators[0].is_exact
    for f in generators:
        if f.n != n:
            raise ValueError(f"dimension mismatch: {f.n} vs {n}")
        if f.is_exact != exact:
            raise TypeError("cannot mix exact and float generators")
    return [phi(f).entries for f in generators]


def compute_normal_form(
    generators: Sequence[AffineMap],
    tol: float = 1e-9,
    cluster_tol: float = 1e-8,
    exact: bool | None = None,
) -> BlockStructure:
    """Find P and the block sizes putting every lifted generator into block shape.

    Exact generators are handled exactly when a permutation of the coordinates
    1..n already achieves the shape; otherwise ``exact=True`` raises and the default
    converts to float. Float families are split into joint generalized eigenspaces and
    each piece gets a common flag. When defective blocks smear a repeated eigenvalue,
    the clustering tolerance is widened step by step until the conjugated family
    validates.
    """
    mats = _lifts(generators)
    check_commuting(mats, tol)
    if generators[0].is_exact and exact is not False:
        structure = _exact_normal_form(mats)
        if structure is not None:
            return structure
        if exact:
            raise NormalFormError(
                "exact normal form needs a family that is triangular up to a coordinate permutation",
                float("nan"),
            )
    if generators[0].is_exact:
        mats = [phi(f.to_float()).entries for f in generators]
    mats = [np.asarray(M, dtype=complex) for M in mats]
    best = np.inf
    tolerances = (cluster_tol,) + tuple(t for t in CLUSTER_TOLERANCES if t > cluster_tol)
    for ctol in tolerances:
        try:
            structure = _float_normal_form(mats, ctol)
        except np.linalg.LinAlgError:
            continue
        if structure is None:
            continue
        residual = _family_residual(mats, structure)
        best = min(best, residual)
        if residual <= tol:
            return BlockStructure(structure.eta, structure.P, structure.P_inv, residual, ctol)
    raise NormalFormError(f"failed to separate spectra; best residual {best:.3e}", best)


def _family_residual(mats, structure: BlockStructure) -> float:
    res = 0.0
    for M in mats:
        C = structure.conjugate(M)
        scale = max(1.0, float(np.abs(M).max()))
        res = max(res, validate_block_shape(C, structure.eta, np.inf).residual / scale)
    return res


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters of complex values closer than tol (relative to size)."""
    k = len(values)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            scale = max(1.0, abs(values[i]), abs(values[j]))
            if abs(values[i] - values[j]) <= tol * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _split(mats, Q: np.ndarray, tol: float) -> list[np.ndarray]:
    """Orthonormal bases of the joint generalized eigenspaces inside span(Q)."""
    d = Q.shape[1]
    if d <= 1:
        return [Q]
    for L in mats:
        R = Q.conj().T @ L @ Q
        vals = np.linalg.eigvals(R)
        groups = _cluster(vals, tol)
        if len(groups) < 2:
            continue
        pieces = []
        for g in groups:
            mu = vals[g].mean()
            k = len(g)
            Mk = np.linalg.matrix_power(R - mu * np.eye(d), k)
            _, _, Vh = np.linalg.svd(Mk)
            basis, _ = np.linalg.qr(Q @ Vh[-k:].conj().T)
            pieces.extend(_split(mats, basis, tol))
        return pieces
    return [Q]


def _lower_flag(mats, U: np.ndarray) -> np.ndarray:
    """Reorder a basis of the invariant-up-to-quotient space span(U) into a common flag.

    The returned columns b_1..b_d make every compressed generator lower triangular:
    the last column is a common eigenvector and earlier columns span complements.
    """
    d = U.shape[1]
    if d <= 1:
        return U
    rows = []
    for L in mats:
        R = U.conj().T @ L @ U
        mu = np.trace(R) / d
        rows.append(R - mu * np.eye(d))
    _, _, Vh = np.linalg.svd(np.vstack(rows))
    v = Vh[-1].conj()
    comp = scipy.linalg.null_space(v[None, :].conj())
    head = _lower_flag(mats, U @ comp)
    return np.hstack([head, (U @ v)[:, None]])


def _joint_eigenvalues(mats, Q):
    d = Q.shape[1]
    return tuple(np.trace(Q.conj().T @ L @ Q) / d for L in mats)


def _float_normal_form(mats, ctol: float) -> BlockStructure | None:
    size = mats[0].shape[0]
    spaces = _split(mats, np.eye(size, dtype=complex), ctol)
    if sum(Q.shape[1] for Q in spaces) != size:
        return None
    lead = int(np.argmax([np.linalg.norm(Q[0]) for Q in spaces]))
    W = spaces[lead]
    if np.linalg.norm(W[0]) < 1e-8:
        return None
    others = [Q for i, Q in enumerate(spaces) if i != lead]
    others.sort(key=lambda Q: [(z.real, z.imag) for z in _joint_eigenvalues(mats, Q)])

    q = W[0].conj() / np.linalg.norm(W[0])
    first = W @ q
    first = first / first[0]
    inside = W @ scipy.linalg.null_space(W[0:1, :])
    columns = [first[:, None]]
    if inside.shape[1]:
        columns.append(_lower_flag(mats, inside))
    for Q in others:
        columns.append(_lower_flag(mats, Q))
    P = np.hstack(columns)
    for j in range(1, size):
        # fix the free phase so diagonal families come back with P = I
        col = P[:, j]
        top = col[np.argmax(np.abs(col) > np.abs(col).max() * (1 - 1e-9))]
        P[:, j] = col * (abs(top) / top) / np.linalg.norm(col)
    P[0, 1:] = 0.0
    P[0, 0] = 1.0
    eta = (W.shape[1],) + tuple(Q.shape[1] for Q in others)
    P_inv = np.linalg.inv(P)
    return BlockStructure(eta, P, P_inv)


def _lower_order(mats, group: list[int]) -> list[int] | None:
    """Order ``group`` so every generator is lower triangular on it (None if impossible).

    Coordinate j must precede i whenever some generator has a nonzero (i, j) entry;
    ties go to the smallest index, which keeps coordinate 0 first.
    """
    after = {i: set() for i in group}
    for i in group:
        for j in group:
            if i != j and any(not is_zero(M[i, j]) for M in mats):
                after[i].add(j)
    ready = [i for i in group if not after[i]]
    heapq.heapify(ready)
    order = []
    while ready:
        j = heapq.heappop(ready)
        order.append(j)
        for i in group:
            if j in after[i]:
                after[i].discard(j)
                if not after[i]:
                    heapq.heappush(ready, i)
    return order if len(order) == len(group) else None


def _exact_normal_form(mats) -> BlockStructure | None:
    """Block structure by a coordinate permutation, when one suffices."""
    size = mats[0].shape[0]
    diag = [tuple(sp.simplify(M[i, i]) for M in mats) for i in range(size)]

    def same(s, t):
        return all(is_zero(a - b) for a, b in zip(s, t))

    groups: list[list[int]] = []
    for i in range(size):
        for g in groups:
            if same(diag[g[0]], diag[i]):
                g.append(i)
                break
        else:
            groups.append([i])
    groups = [_lower_order(mats, g) for g in groups]
    if any(g is None for g in groups):
        return None
    head, rest = groups[0], groups[1:]
    rest.sort(key=lambda g: [(c.real, c.imag) for c in map(to_complex, diag[g[0]])])
    order = [i for g in [head] + rest for i in g]
    P = sp.zeros(size, size)
    for col, i in enumerate(order):
        P[i, col] = 1
    P = sp.ImmutableMatrix(P)
    eta = tuple(len(g) for g in [head] + rest)
    structure = BlockStructure(eta, P, P.T)
    for M in mats:
        if not validate_block_shape(structure.conjugate(M), eta).ok:
            return None
    return structure
