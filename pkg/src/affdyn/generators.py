"""Additive generator sets built from logarithms of a commuting family.

Each generator f_k gets a logarithmic lift f'_k (an affine map with exp(psi(f'_k)) =
phi(f_k)). Evaluating the lifts at the distinguished point w0 and adding the 2 i pi
block directions gives the finitely generated additive set whose density in C^n
decides hypercyclicity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy as sp

from affdyn._exact import TWO_PI_I, to_exact
from affdyn.affine import AffineMap, block_log, phi, psi, psi_inv, psi_normalize
from affdyn.normal_form import BlockStructure, canonical_vectors
from affdyn.serialize import decode_vector, encode_vector

NATURAL = "N"
INTEGER = "Z"


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Vectors u_1..u_m of C^dim, each with coefficient tag N or Z and a provenance label.

    ``complex_lines`` lists directions v for which the whole line C*v is part of the
    set; they are kept symbolically and never sampled.
    """

    dim: int
    vectors: tuple
    coeffs: tuple[str, ...]
    provenance: tuple[str, ...]
    complex_lines: tuple = ()

    def __post_init__(self):
        if not (len(self.vectors) == len(self.coeffs) == len(self.provenance)):
            raise ValueError("vectors, coefficient tags and provenance differ in length")
        for c in self.coeffs:
            if c not in (NATURAL, INTEGER):
                raise ValueError(f"unknown coefficient tag {c!r}")
        vecs = tuple(_as_vector(v, self.dim) for v in self.vectors)
        if any(isinstance(v, sp.MatrixBase) for v in vecs):
            vecs = tuple(v if isinstance(v, sp.MatrixBase) else _exact_vector(v) for v in vecs)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def m(self) -> int:
        return len(self.vectors)

    @property
    def is_exact(self) -> bool:
        return any(isinstance(v, sp.MatrixBase) for v in self.vectors)

    def group_closure(self) -> "GeneratorSet":
        """Same vectors with every coefficient tag upgraded to Z."""
        return GeneratorSet(self.dim, self.vectors, (INTEGER,) * self.m, self.provenance, self.complex_lines)

    def to_float(self) -> "GeneratorSet":
        vecs = [
            np.array([complex(sp.N(x, 30)) for x in v], dtype=complex) if isinstance(v, sp.MatrixBase) else v
            for v in self.vectors
        ]
        return GeneratorSet(self.dim, vecs, self.coeffs, self.provenance, self.complex_lines)

    def as_array(self) -> np.ndarray:
        """dim x m complex array of the (float) vectors."""
        if self.m == 0:
            return np.zeros((self.dim, 0), dtype=complex)
        return np.column_stack(self.to_float().vectors)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "vectors": [
                {"v": encode_vector(v), "coeff": c, "provenance": p}
                for v, c, p in zip(self.vectors, self.coeffs, self.provenance)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict, exact: bool = False) -> "GeneratorSet":
        vecs, coeffs, prov = [], [], []
        for item in obj["vectors"]:
            vecs.append(decode_vector(item["v"], exact))
            coeffs.append(item.get("coeff", INTEGER))
            prov.append(item.get("provenance", ""))
        return cls(int(obj["dim"]), tuple(vecs), tuple(coeffs), tuple(prov))


def _exact_vector(v) -> sp.ImmutableMatrix:
    """Promote a float vector that holds only Gaussian integers; anything else is refused."""
    out = []
    for z in v:
        if z.real != int(z.real) or z.imag != int(z.imag):
            raise TypeError("cannot mix exact vectors with non-integer float vectors")
        out.append([sp.Integer(int(z.real)) + sp.I * sp.Integer(int(z.imag))])
    return sp.ImmutableMatrix(out)


def _as_vector(v, dim: int):
    if isinstance(v, sp.MatrixBase):
        v = sp.ImmutableMatrix(v).reshape(len(v), 1)
    elif isinstance(v, (list, tuple)) and any(isinstance(x, sp.Basic) for x in v):
        v = sp.ImmutableMatrix([[to_exact(x)] for x in v])
    else:
        v = np.array(v, dtype=complex).reshape(-1)
        v.setflags(write=False)
    if len(v) != dim:
        raise ValueError(f"vector of length {len(v)} in a set of dimension {dim}")
    return v


def from_vectors(vectors: Sequence, coeff: str = INTEGER) -> GeneratorSet:
    """Convenience constructor: plain vectors (or scalars for dim 1), all with one tag."""
    vecs = [v if isinstance(v, (list, tuple, np.ndarray, sp.MatrixBase)) else [v] for v in vectors]
    if not vecs:
        raise ValueError("at least one vector is needed to fix the dimension")
    dim = len(vecs[0])
    return GeneratorSet(dim, tuple(vecs), (coeff,) * len(vecs), tuple(f"u{i + 1}" for i in range(len(vecs))))


def log_lift_generators(
    generators: Sequence[AffineMap],
    structure: BlockStructure,
    branches=None,
    tol: float = 1e-9,
) -> list[AffineMap]:
    """Logarithmic lifts f'_k with exp(psi(f'_k)) = phi(f_k).

    ``branches`` is None (principal logarithms), or one entry per generator, each an
    int or a per-block integer sequence.
    """
    if branches is None:
        branches = [0] * len(generators)
    if len(branches) != len(generators):
        raise ValueError("one branch entry per generator is required")
    out = []
    for k, (f, b) in enumerate(zip(generators, branches)):
        if not f.invertible:
            raise ValueError(f"generator {k} is not invertible and has no logarithm")
        if structure.is_exact and not f.is_exact:
            raise TypeError("exact block structure with a float generator")
        if f.is_exact and not structure.is_exact:
            f = f.to_float()
        C = structure.conjugate(phi(f).entries)
        scale = 1.0 if structure.is_exact else max(1.0, float(np.abs(C).max()))
        B = block_log(C, structure.eta, b, tol * scale)
        X = structure.unconjugate(B)
        out.append(psi_inv(psi_normalize(X, tol * scale), tol * scale))
    return out


def _eval(f: AffineMap, w):
    if f.is_exact:
        return sp.ImmutableMatrix(f(w))
    return f(np.asarray(w, dtype=complex))


def q_w0_generators(f_primes: Sequence[AffineMap], structure: BlockStructure) -> GeneratorSet:
    """f'_k(w0) tagged N, then 2 i pi p2(P e_k) for blocks k = 2..r tagged Z."""
    n = structure.n
    w0 = structure.w0
    canon = canonical_vectors(structure)
    vecs, coeffs, prov = [], [], []
    for k, f in enumerate(f_primes, 1):
        vecs.append(_eval(f, w0))
        coeffs.append(NATURAL)
        prov.append(f"log-lift {k}")
    for k in range(2, structure.r + 1):
        vecs.append(_scale_2ipi(canon.p2_Pe_k[k - 1], structure.is_exact))
        coeffs.append(INTEGER)
        prov.append(f"2ipi-block {k}")
    return GeneratorSet(n, tuple(vecs), tuple(coeffs), tuple(prov))


def _scale_2ipi(v, exact: bool):
    if exact:
        return sp.ImmutableMatrix((TWO_PI_I * v).applyfunc(sp.expand))
    return 2j * np.pi * np.asarray(v)


def g_v0_generators(f_primes: Sequence[AffineMap], structure: BlockStructure) -> GeneratorSet:
    """psi(f'_k) v0 tagged N, then 2 i pi P e_k for every block k = 1..r tagged Z."""
    v0 = structure.v0
    canon = canonical_vectors(structure)
    vecs, coeffs, prov = [], [], []
    for k, f in enumerate(f_primes, 1):
        M = psi(f).entries
        vecs.append(sp.ImmutableMatrix((M * v0).applyfunc(sp.expand)) if structure.is_exact else M @ v0)
        coeffs.append(NATURAL)
        prov.append(f"log-lift {k}")
    for k in range(1, structure.r + 1):
        vecs.append(_scale_2ipi(canon.Pe_k[k - 1], structure.is_exact))
        coeffs.append(INTEGER)
        prov.append(f"2ipi-block {k}")
    return GeneratorSet(structure.n + 1, tuple(vecs), tuple(coeffs), tuple(prov))


def g_tilde_v0_generators(f_primes: Sequence[AffineMap], structure: BlockStructure) -> GeneratorSet:
    """The lifted set with the full complex line through v0 adjoined (kept symbolic)."""
    g = g_v0_generators(f_primes, structure)
    return GeneratorSet(g.dim, g.vectors, g.coeffs, g.provenance, (structure.v0,))


def drop_first_coordinate(gens: GeneratorSet, skip_provenance: Sequence[str] = ()) -> GeneratorSet:
    """Project C^{n+1} -> C^n by deleting coordinate 0, optionally dropping some vectors."""
    keep = [i for i, p in enumerate(gens.provenance) if p not in skip_provenance]
    vecs = []
    for i in keep:
        v = gens.vectors[i]
        vecs.append(sp.ImmutableMatrix(v[1:, 0]) if isinstance(v, sp.MatrixBase) else np.asarray(v)[1:])
    return GeneratorSet(
        gens.dim - 1,
        tuple(vecs),
        tuple(gens.coeffs[i] for i in keep),
        tuple(gens.provenance[i] for i in keep),
    )
