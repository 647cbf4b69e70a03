"""Density of finitely generated additive subgroups of C^n.

Z u_1 + ... + Z u_m is dense in C^n exactly when the real 2n x m matrix M = [Re u; Im u]
has rank 2n and no nonzero integer vector lies in its row space. Non-density is always
returned with a checkable reason (too few generators, rank deficiency, or an explicit
integer relation). Density is only ever certified in exact mode; float mode reports
Inconclusive when the relation search comes up empty.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import sympy as sp
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from affdyn.generators import GeneratorSet
from affdyn.lattice import lll_reduce

DENSE = "Dense"
NOT_DENSE = "NotDense"
INCONCLUSIVE = "Inconclusive"

COUNT_BOUND = "CountBound"
RANK_DEFICIENT = "RankDeficient"
INTEGER_RELATION = "IntegerRelation"
SEARCH_EXHAUSTED = "RelationSearchExhausted"

RANK_TOL = 1e-8
PENALTY_SCALE = 1e12
DEFAULT_BOUND = 10**6


@dataclass(frozen=True)
class DensityVerdict:
    status: str
    reason: str | None
    m: int
    n: int
    rank: int | None = None
    witness: tuple[int, ...] | None = None
    search_bound: int | None = None
    tolerance: float | None = None
    mode: str = "float"
    certificate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "witness": list(self.witness) if self.witness is not None else None,
            "m": self.m,
            "n": self.n,
            "rank": self.rank,
            "bound": self.search_bound,
            "tolerance": self.tolerance,
            "mode": self.mode,
            "certificate": self.certificate,
        }


def generator_count(p: int, r: int) -> int:
    """Size of the generator set built from p log-lifts and r blocks."""
    return p + r - 1 if r >= 2 else p


def count_bound(p: int, r: int, n: int) -> DensityVerdict | None:
    """NotDense when there are too few generators to reach rank 2n + 1."""
    if n < 1 or not 1 <= r <= n + 1 or p < 0:
        raise ValueError(f"invalid counts p={p}, r={r}, n={n}")
    m = generator_count(p, r)
    if m <= 2 * n:
        return DensityVerdict(NOT_DENSE, COUNT_BOUND, m, n, certificate={"limit": 2 * n})
    return None


def realify(gens: GeneratorSet) -> np.ndarray:
    """The real 2n x m matrix with real parts stacked over imaginary parts."""
    U = gens.as_array()
    return np.vstack([U.real, U.imag])


def _primitive(s: Sequence[int]) -> tuple[int, ...]:
    g = reduce(math.gcd, (abs(int(x)) for x in s), 0)
    s = [int(x) // g for x in s] if g else [int(x) for x in s]
    for x in s:
        if x:
            if x < 0:
                s = [-y for y in s]
            break
    return tuple(s)


def _pick(basis, reach: int = 2, accept=None) -> tuple[int, ...] | None:
    """Smallest vector (sup norm, then lexicographic) among small combinations of ``basis``.

    ``basis`` should be LLL-reduced, so the true minimum is almost always a combination
    with coefficients in [-reach, reach].
    """
    basis = [list(b) for b in basis if any(b)]
    if not basis:
        return None
    B = np.array(basis, dtype=object)
    best = None
    for coeffs in itertools.product(range(-reach, reach + 1), repeat=len(basis)):
        if not any(coeffs):
            continue
        s = _primitive(np.dot(np.array(coeffs, dtype=object), B).tolist())
        if not any(s) or (accept is not None and not accept(s)):
            continue
        key = (max(map(abs, s)), s)
        if best is None or key < best:
            best = key
    return best[1] if best else None


def effective_bound(m: int, d: int, bound: int, scale: float = PENALTY_SCALE) -> int:
    """Largest coefficient size the float relation search can resolve.

    In the worst case a single irrational linear form cuts the row space out of Z^m,
    and integer vectors of size h then come within about (2h)^(1-m) / h (relative) of
    it by pigeonhole alone. The cap keeps such near misses a factor 100 or more above
    the 1/scale acceptance level.
    """
    if d == 0:
        return bound
    return max(1, min(bound, int(0.5 * (scale / 100) ** (1 / m))))


def find_integer_relation(
    null_basis,
    bound: int = DEFAULT_BOUND,
    scale: float = PENALTY_SCALE,
) -> tuple[int, ...] | None:
    """Nonzero integer s orthogonal (to within 1/scale relative) to every basis vector.

    The lattice Z^m is embedded with ``scale`` times the null-space coordinates appended
    as penalty columns and LLL-reduced; short reduced vectors with negligible penalty
    are relations. Coefficients are capped at ``effective_bound(m, d, bound)``, which is
    below ``bound`` when double precision cannot separate relations from near misses.
    """
    N = np.asarray(null_basis, dtype=float)
    if N.ndim == 1:
        N = N[None, :] if N.size else N.reshape(0, 0)
    d, m = N.shape
    if m == 0:
        return None
    if d == 0:
        return (1,) + (0,) * (m - 1)
    if d >= m:
        return None
    Q, _ = np.linalg.qr(N.T)
    h = effective_bound(m, d, bound, scale)
    rows = []
    for i in range(m):
        penalty = [int(round(scale * x)) for x in Q[i]]
        rows.append([1 if j == i else 0 for j in range(m)] + penalty)
    reduced = lll_reduce(rows)
    def accepted(row) -> bool:
        s = np.array(row, dtype=float)
        if not s.any() or np.abs(s).max() > h:
            return False
        return bool(np.linalg.norm(Q.T @ s) <= np.linalg.norm(s) / scale)

    return _pick([row[:m] for row in reduced if accepted(row[:m])], accept=accepted)


def _float_rank(M: np.ndarray, tol: float) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    U, s, Vh = np.linalg.svd(M)
    if s.size == 0:
        return 0, U, s, Vh
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return rank, U, s, Vh


def relation_is_sound(M: np.ndarray, s: Sequence[int], tol: float = RANK_TOL) -> bool:
    """rank([M; s]) <= 2n, i.e. s lies in the row space of M (float check)."""
    two_n, m = M.shape
    if m <= two_n:
        return True
    s = np.asarray(s, dtype=float)
    stacked = np.vstack([M, s / np.linalg.norm(s)])
    sv = np.linalg.svd(stacked, compute_uv=False)
    return bool(sv[two_n] <= tol * max(1.0, sv[0]))


def group_rank_density(
    gens: GeneratorSet,
    mode: str = "float",
    search_bound: int = DEFAULT_BOUND,
    tol: float = RANK_TOL,
) -> DensityVerdict:
    """Decide density of the Z-span of ``gens`` (coefficient tags are ignored)."""
    if mode not in ("float", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    n, m = gens.dim, gens.m
    if m == 0:
        return DensityVerdict(NOT_DENSE, RANK_DEFICIENT, 0, n, rank=0, mode=mode)
    if mode == "exact":
        return _exact_density(gens)
    M = realify(gens)
    if not np.all(np.isfinite(M)):
        raise ValueError("generator vectors contain non-finite entries")
    rank, U, s, Vh = _float_rank(M, tol)
    if rank < 2 * n:
        normal = U[:, -1]
        return DensityVerdict(
            NOT_DENSE, RANK_DEFICIENT, m, n, rank=rank, tolerance=tol, mode=mode,
            certificate={"normal": [float(x) for x in normal]},
        )
    null = Vh[2 * n:]
    h = effective_bound(m, m - 2 * n, search_bound)
    witness = find_integer_relation(null, search_bound) if m > 2 * n else (1,) + (0,) * (m - 1)
    if witness is not None and relation_is_sound(M, witness, tol):
        return DensityVerdict(
            NOT_DENSE, INTEGER_RELATION, m, n, rank=rank, witness=witness,
            search_bound=h, tolerance=tol, mode=mode,
        )
    return DensityVerdict(
        INCONCLUSIVE, SEARCH_EXHAUSTED, m, n, rank=rank, search_bound=h, tolerance=tol, mode=mode,
    )


# exact backend -------------------------------------------------------------------------


class NotRepresentable(ValueError):
    pass


def _real_parts(gens: GeneratorSet) -> list[list[sp.Expr]]:
    """Rows of [Re; Im] as sympy expressions, each checked to be a polynomial in pi
    with real algebraic coefficients."""
    if not gens.is_exact:
        raise NotRepresentable("exact mode needs exact generator entries; use float mode")
    cols = []
    for v in gens.vectors:
        if not isinstance(v, sp.MatrixBase):
            raise NotRepresentable("exact mode needs exact generator entries; use float mode")
        re, im = zip(*(sp.expand_complex(x).as_real_imag() for x in v))
        cols.append([sp.expand(x) for x in re + im])
    rows = [list(r) for r in zip(*cols)]
    for row in rows:
        for x in row:
            _check_representable(x)
    return rows


def _check_representable(x: sp.Expr) -> None:
    if x.free_symbols:
        raise NotRepresentable(f"entry {x} has free symbols")
    try:
        poly = sp.Poly(x, sp.pi)
    except sp.PolynomialError:
        raise NotRepresentable(f"entry {x} is not polynomial in pi; use float mode") from None
    for c in poly.coeffs():
        if c.has(sp.pi) or c.is_algebraic is not True or c.is_real is not True:
            raise NotRepresentable(
                f"entry {x} has coefficient {c} outside the real algebraic numbers; use float mode"
            )


def _extensions(rows) -> list[sp.Expr]:
    exts = set()
    for row in rows:
        for x in row:
            for a in x.atoms(sp.Pow):
                if a.exp.is_Rational and not a.exp.is_Integer:
                    exts.add(a.base ** (1 / sp.Integer(a.exp.q)))
            exts.update(x.atoms(sp.CRootOf))
            exts.update(x.atoms(sp.AlgebraicNumber))
    return sorted(exts, key=sp.default_sort_key)


def _domain(exts):
    A = QQ.algebraic_field(*exts) if exts else QQ
    return A, A.frac_field(sp.pi)


def _components(vec, K, A) -> list[list]:
    """Rational coordinates of a null vector over the basis pi^k * omega^l.

    The vector is first multiplied by the lcm of its denominators so each entry is a
    polynomial in pi with coefficients in the algebraic field.
    """
    dens = [e.denom for e in vec]
    lcm = reduce(lambda a, b: a.lcm(b), dens)
    numers = [e.numer * lcm.exquo(e.denom) for e in vec]
    degree = A.ext.minpoly.degree() if A is not QQ else 1
    table: dict[tuple[int, int], list] = {}
    m = len(vec)
    for j, poly in enumerate(numers):
        for (k,), c in poly.terms():
            coeffs = c.to_list() if A is not QQ else [c]
            coeffs = [QQ(0)] * (degree - len(coeffs)) + list(coeffs)
            for l, q in enumerate(reversed(coeffs)):
                if q:
                    table.setdefault((k, l), [QQ(0)] * m)[j] = QQ(q)
    return list(table.values())


def _integer_basis(rows) -> list[list[int]]:
    out = []
    for row in rows:
        den = reduce(math.lcm, (int(q.denominator) for q in row), 1)
        out.append([int(q * den) for q in row])
    return out


def _exact_density(gens: GeneratorSet) -> DensityVerdict:
    n, m = gens.dim, gens.m
    rows = _real_parts(gens)
    exts = _extensions(rows)
    A, K = _domain(exts)
    Mk = DomainMatrix([[K.from_sympy(x) for x in row] for row in rows], (2 * n, m), K)
    rank = Mk.rank()
    if rank < 2 * n:
        return DensityVerdict(NOT_DENSE, RANK_DEFICIENT, m, n, rank=rank, mode="exact")
    null = Mk.nullspace().to_Matrix() if m > 2 * n else None
    comps = []
    if null is not None:
        for i in range(null.shape[0]):
            vec = [K.from_sympy(x) for x in null.row(i)]
            comps.extend(_components(vec, K, A))
    if comps:
        R = DomainMatrix([list(c) for c in comps], (len(comps), m), QQ)
        free = R.nullspace().to_Matrix()
        free_rows = [[QQ(sp.Rational(x).p, sp.Rational(x).q) for x in free.row(i)] for i in range(free.shape[0])]
    else:
        free_rows = [[QQ(int(i == j)) for j in range(m)] for i in range(m)]
    if not free_rows:
        return DensityVerdict(
            DENSE, None, m, n, rank=rank, mode="exact",
            certificate={"component_rank": m, "field_extensions": [str(e) for e in exts]},
        )
    basis = lll_reduce(_integer_basis(free_rows))
    witness = _pick(basis)
    if not exact_relation_is_sound(gens, witness):
        raise ArithmeticError(f"exact witness {witness} failed its own rank check")
    return DensityVerdict(NOT_DENSE, INTEGER_RELATION, m, n, rank=rank, witness=witness, mode="exact")


def exact_relation_is_sound(gens: GeneratorSet, s: Sequence[int]) -> bool:
    """Exact check that rank([Re; Im; s]) equals rank([Re; Im]) (and so is at most 2n)."""
    rows = _real_parts(gens)
    _, K = _domain(_extensions(rows))
    m = gens.m
    M = DomainMatrix([[K.from_sympy(x) for x in row] for row in rows], (len(rows), m), K)
    S = DomainMatrix([[K.from_sympy(sp.Integer(x)) for x in s]], (1, m), K)
    return M.vstack(S).rank() <= 2 * gens.dim
