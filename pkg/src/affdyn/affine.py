"""Affine maps on C^n, their matrix lifts, and exp/log on block-triangular matrices.

Two backends coexist. Float maps hold read-only complex numpy arrays; exact maps hold
sympy immutable matrices whose entries are closed-form numbers (rationals, pi,
algebraic irrationals, exp/log of those). Exact values may be converted to float with
``to_float``; nothing ever converts silently in the other direction.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
import scipy.linalg
import sympy as sp

from affdyn._exact import TWO_PI_I, exact_matrix, is_zero, principal_log, to_complex
from affdyn.shapes import block_slices, project_block_shape, validate_block_shape

FLOAT_TOL = 1e-9

Matrix = Union[np.ndarray, sp.MatrixBase]


def _has_exact(obj) -> bool:
    if isinstance(obj, (sp.Basic, sp.MatrixBase, Fraction)):
        return True
    if isinstance(obj, (list, tuple)):
        return any(_has_exact(x) for x in obj)
    return False


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class AffineMap:
    """The map x -> A x + a.

    The backend is inferred: sympy objects or Fractions anywhere make the map exact,
    anything else is stored as complex floats. Use ``AffineMap.exact`` to force the
    exact backend for plain integer input.
    """

    linear: Matrix
    translation: Matrix

    def __post_init__(self):
        A, a = self.linear, self.translation
        if _has_exact(A) or _has_exact(a) or isinstance(A, sp.MatrixBase):
            A = exact_matrix(A)
            a = exact_matrix(list(a) if not isinstance(a, sp.MatrixBase) else a)
            if a.shape[1] != 1:
                a = a.T
        else:
            A = _frozen(A)
            a = _frozen(a).reshape(-1)
        n = A.shape[0]
        if A.shape != (n, n) or a.shape[0] != n or n == 0:
            raise ValueError(f"linear part {A.shape} and translation {a.shape} disagree")
        object.__setattr__(self, "linear", A)
        object.__setattr__(self, "translation", a)

    @classmethod
    def exact(cls, A, a) -> "AffineMap":
        return cls(exact_matrix(A), exact_matrix([[x] for x in a]))

    @classmethod
    def identity(cls, n: int, exact: bool = False) -> "AffineMap":
        if exact:
            return cls(sp.eye(n), sp.zeros(n, 1))
        return cls(np.eye(n), np.zeros(n))

    @property
    def n(self) -> int:
        return self.linear.shape[0]

    @property
    def is_exact(self) -> bool:
        return isinstance(self.linear, sp.MatrixBase)

    @property
    def invertible(self) -> bool:
        if self.is_exact:
            return not is_zero(self.linear.det())
        s = np.linalg.svd(self.linear, compute_uv=False)
        return bool(s[-1] > FLOAT_TOL * max(1.0, s[0]))

    def __call__(self, x):
        if self.is_exact:
            x = exact_matrix([[v] for v in x]) if not isinstance(x, sp.MatrixBase) else x
            return (self.linear * x + self.translation).applyfunc(sp.expand)
        return self.linear @ np.asarray(x, dtype=complex) + self.translation

    def __add__(self, other: "AffineMap") -> "AffineMap":
        _same_backend(self, other)
        return AffineMap(self.linear + other.linear, self.translation + other.translation)

    def to_float(self) -> "AffineMap":
        if not self.is_exact:
            return self
        A = np.array([[to_complex(v) for v in row] for row in self.linear.tolist()])
        return AffineMap(A, np.array([to_complex(v) for v in self.translation]))

    def equals(self, other: "AffineMap", tol: float = 0.0) -> bool:
        if self.n != other.n:
            return False
        if self.is_exact and other.is_exact and tol == 0.0:
            return all(is_zero(x) for x in (self.linear - other.linear)) and all(
                is_zero(x) for x in (self.translation - other.translation)
            )
        f, g = self.to_float(), other.to_float()
        return bool(
            np.abs(f.linear - g.linear).max() <= tol
            and np.abs(f.translation - g.translation).max() <= tol
        )

    def __repr__(self) -> str:
        kind = "exact" if self.is_exact else "float"
        return f"AffineMap[{kind}](A={self.linear.tolist()}, a={list(self.translation)})"


def _same_backend(f: AffineMap, g: AffineMap) -> None:
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")
    if f.is_exact != g.is_exact:
        raise TypeError("cannot mix exact and float maps; convert with to_float() first")


def compose(f: AffineMap, g: AffineMap) -> AffineMap:
    """f after g: x -> A(Bx + b) + a."""
    _same_backend(f, g)
    if f.is_exact:
        A = (f.linear * g.linear).applyfunc(sp.expand)
        a = (f.linear * g.translation + f.translation).applyfunc(sp.expand)
        return AffineMap(A, a)
    return AffineMap(f.linear @ g.linear, f.linear @ g.translation + f.translation)


class Kind(enum.Enum):
    PHI = "PhiImage"
    PSI = "PsiImage"
    GENERAL = "General"


@dataclass(frozen=True, eq=False)
class LiftedMatrix:
    """An (n+1)x(n+1) matrix together with the lift it is known to belong to."""

    entries: Matrix
    kind: Kind = Kind.GENERAL

    def __post_init__(self):
        M = self.entries
        if isinstance(M, sp.MatrixBase):
            M = sp.ImmutableMatrix(M)
        else:
            M = _frozen(M)
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"lifted matrices are square, got {M.shape}")
        object.__setattr__(self, "entries", M)
        if self.kind is Kind.PHI and not _first_row_is(M, 1, 0.0):
            raise ValueError("a PhiImage must have first row (1, 0, ..., 0)")
        if self.kind is Kind.PSI and not _first_row_is(M, 0, 0.0):
            raise ValueError("a PsiImage must have first row zero")

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def is_exact(self) -> bool:
        return isinstance(self.entries, sp.MatrixBase)


def _entries(M) -> Matrix:
    if isinstance(M, LiftedMatrix):
        return M.entries
    if isinstance(M, sp.MatrixBase):
        return M
    return np.asarray(M, dtype=complex)


def _first_row_is(M, corner, tol: float) -> bool:
    if isinstance(M, sp.MatrixBase):
        row = list(M.row(0))
        return is_zero(row[0] - corner) and all(is_zero(x) for x in row[1:])
    row = np.asarray(M)[0]
    return abs(row[0] - corner) <= tol and bool(np.all(np.abs(row[1:]) <= tol))


def _lift(f: AffineMap, corner: int) -> Matrix:
    n = f.n
    if f.is_exact:
        M = sp.zeros(n + 1, n + 1)
        M[0, 0] = corner
        M[1:, 0] = f.translation
        M[1:, 1:] = f.linear
        return M
    M = np.zeros((n + 1, n + 1), dtype=complex)
    M[0, 0] = corner
    M[1:, 0] = f.translation
    M[1:, 1:] = f.linear
    return M


def _unlift(M, corner: int, tol: float, what: str) -> AffineMap:
    M = _entries(M)
    if not _first_row_is(M, corner, tol):
        expected = "(1, 0, ..., 0)" if corner else "zero"
        raise ValueError(f"{what}: first row must be {expected}")
    if isinstance(M, sp.MatrixBase):
        return AffineMap(sp.ImmutableMatrix(M[1:, 1:]), sp.ImmutableMatrix(M[1:, 0]))
    return AffineMap(M[1:, 1:], M[1:, 0])


def phi(f: AffineMap) -> LiftedMatrix:
    """Group embedding: corner 1, translation in the first column, A below right."""
    return LiftedMatrix(_lift(f, 1), Kind.PHI)


def phi_inv(M, tol: float = FLOAT_TOL) -> AffineMap:
    return _unlift(M, 1, tol, "phi_inv")


def psi(f: AffineMap) -> LiftedMatrix:
    """Linear embedding: same layout as ``phi`` with corner 0."""
    return LiftedMatrix(_lift(f, 0), Kind.PSI)


def psi_inv(M, tol: float = FLOAT_TOL) -> AffineMap:
    return _unlift(M, 0, tol, "psi_inv")


def _nilpotent_series(N, size: int, coeff, exact: bool):
    """sum_{j=0}^{size-1} coeff(j) N^j, using the exact nilpotency degree."""
    if exact:
        out, power = sp.zeros(size, size), sp.eye(size)
    else:
        out, power = np.zeros((size, size), complex), np.eye(size, dtype=complex)
    for j in range(size):
        c = coeff(j)
        if c != 0:
            out = out + c * power
        power = power * N if exact else power @ N
    return out


def block_exp(M, eta: Sequence[int] | None = None, tol: float = FLOAT_TOL) -> Matrix:
    """Matrix exponential, blockwise in closed form when ``M`` has block shape ``eta``.

    Each block mu*I + N gives e^mu * sum_j N^j / j!. Float input that is not in block
    shape (or has no ``eta``) falls back to scaling and squaring. Exact input must be in
    block shape.
    """
    M = _entries(M)
    if isinstance(M, sp.MatrixBase):
        if eta is None or not validate_block_shape(M, eta).ok:
            raise ValueError("exact block_exp needs a matrix in block shape eta")
        out = sp.zeros(*M.shape)
        for sl in block_slices(eta):
            blk = sp.Matrix(M[sl, sl])
            size = blk.shape[0]
            mu = blk[0, 0]
            N = blk - mu * sp.eye(size)
            series = _nilpotent_series(N, size, lambda j: sp.Rational(1, sp.factorial(j)), True)
            out[sl, sl] = (sp.exp(mu) * series).applyfunc(sp.expand)
        return sp.ImmutableMatrix(out)
    if eta is None or not validate_block_shape(M, eta, tol).ok:
        return scipy.linalg.expm(M)
    K = project_block_shape(M, eta)
    out = np.zeros_like(K)
    for sl in block_slices(eta):
        blk = K[sl, sl]
        size = blk.shape[0]
        mu = blk[0, 0]
        N = blk - mu * np.eye(size)
        fact = [1.0]
        for j in range(1, size):
            fact.append(fact[-1] * j)
        out[sl, sl] = np.exp(mu) * _nilpotent_series(N, size, lambda j: 1.0 / fact[j], False)
    return out


def _branches(branch, r: int) -> list[int]:
    if branch is None:
        return [0] * r
    if isinstance(branch, (int, np.integer)):
        return [int(branch)] * r
    out = [int(b) for b in branch]
    if len(out) != r:
        raise ValueError(f"expected {r} branch integers, got {len(out)}")
    return out


def _float_log(mu: complex) -> complex:
    z = np.log(complex(mu))
    if z.imag <= -np.pi:
        z = complex(z.real, np.pi)
    return z


def block_log(A, eta: Sequence[int], branch=0, tol: float = FLOAT_TOL) -> Matrix:
    """Logarithm of an invertible matrix of block shape ``eta``.

    Per block mu*I + N the result is (Log mu + 2 i pi b) I + sum_{j<size} (-1)^(j+1) (N/mu)^j / j,
    where Log is the principal branch (imaginary part in (-pi, pi]) and b the block's
    entry of ``branch`` (an int applied to every block, or one int per block).
    """
    A = _entries(A)
    branches = _branches(branch, len(eta))
    exact = isinstance(A, sp.MatrixBase)
    check = validate_block_shape(A, eta, tol if not exact else 0.0)
    if not check.ok:
        raise ValueError(f"block_log needs block shape {tuple(eta)}; residual {check.residual:.3e}")
    if exact:
        out = sp.zeros(*A.shape)
        for sl, b in zip(block_slices(eta), branches):
            blk = sp.Matrix(A[sl, sl])
            size = blk.shape[0]
            mu = blk[0, 0]
            if is_zero(mu):
                raise ValueError("singular diagonal block: logarithm undefined")
            X = ((blk - mu * sp.eye(size)) / mu).applyfunc(sp.expand)
            series = _nilpotent_series(
                X, size, lambda j: sp.Rational((-1) ** (j + 1), j) if j else 0, True
            )
            diag = principal_log(mu) + b * TWO_PI_I
            out[sl, sl] = (diag * sp.eye(size) + series).applyfunc(sp.expand)
        return sp.ImmutableMatrix(out)
    K = project_block_shape(A, eta)
    out = np.zeros_like(K)
    for sl, b in zip(block_slices(eta), branches):
        blk = K[sl, sl]
        size = blk.shape[0]
        mu = blk[0, 0]
        if abs(mu) <= tol:
            raise ValueError("singular diagonal block: logarithm undefined")
        X = (blk - mu * np.eye(size)) / mu
        series = _nilpotent_series(X, size, lambda j: (-1) ** (j + 1) / j if j else 0.0, False)
        out[sl, sl] = (_float_log(mu) + 2j * np.pi * b) * np.eye(size) + series
    return out


def psi_normalize(B, tol: float = FLOAT_TOL) -> LiftedMatrix:
    """Shift B by an integer multiple of 2 i pi I so that its first row vanishes."""
    B = _entries(B)
    if isinstance(B, sp.MatrixBase):
        k = sp.simplify(B[0, 0] / TWO_PI_I)
        if not k.is_integer:
            raise ValueError(f"corner entry / (2 i pi) = {k} is not an integer")
        out = sp.Matrix(B - k * TWO_PI_I * sp.eye(B.shape[0])).applyfunc(sp.expand)
        if not all(is_zero(x) for x in out.row(0)):
            raise ValueError("first row does not vanish after the 2 i pi shift")
        out[0, :] = sp.zeros(1, out.shape[1])
        return LiftedMatrix(out, Kind.PSI)
    k = B[0, 0] / (2j * np.pi)
    kr = round(k.real)
    if abs(k - kr) > tol:
        raise ValueError(f"corner entry / (2 i pi) = {k} is not an integer")
    out = B - 2j * np.pi * kr * np.eye(B.shape[0])
    scale = max(1.0, float(np.abs(B).max()))
    if np.abs(out[0]).max() > tol * scale:
        raise ValueError("first row does not vanish after the 2 i pi shift")
    out = out.copy()
    out[0] = 0.0
    return LiftedMatrix(out, Kind.PSI)
