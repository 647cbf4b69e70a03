"""Semigroup spec files: JSON descriptions of a commuting affine family plus run settings.

Example::

    {
      "n": 1,
      "arithmetic": "exact",
      "flags": {"s3": {"minpoly": "x**2 - 3", "root": 1.732}},
      "generators": [{"A": [["exp(1/10 + 2*I*pi*s3)"]], "a": [0]}],
      "budget": 139, "box": [-1, 1], "epsilon": 0.1, "seed": 0
    }

Scalars are numbers, [re, im] pairs, or expression strings. Flags name real algebraic
irrationals by minimal polynomial; the root closest to ``root`` is used.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import sympy as sp

from affdyn.affine import AffineMap, phi
from affdyn.normal_form import check_commuting
from affdyn.serialize import decode_matrix, decode_vector, dumps, encode_matrix, encode_vector

_X = sp.Symbol("x")


class SpecError(ValueError):
    """Malformed or inconsistent spec input."""


@dataclass(frozen=True, eq=False)
class SemigroupSpec:
    n: int
    generators: tuple[AffineMap, ...]
    arithmetic: str = "float"
    flags: dict = field(default_factory=dict)
    seed: int = 0
    budget: int = 100
    box: tuple[float, float] = (-1.0, 1.0)
    epsilon: float = 0.05
    base_point: tuple | None = None
    raw_generators: tuple | None = None

    def to_json(self) -> dict:
        gens = self.raw_generators
        if gens is None:
            gens = [{"A": encode_matrix(f.linear), "a": encode_vector(f.translation)} for f in self.generators]
        out: dict[str, Any] = {
            "n": self.n,
            "arithmetic": self.arithmetic,
            "flags": self.flags,
            "generators": list(gens),
            "seed": self.seed,
            "budget": self.budget,
            "box": list(self.box),
            "epsilon": self.epsilon,
        }
        if self.base_point is not None:
            out["base_point"] = [[z.real, z.imag] for z in np.asarray(self.base_point, dtype=complex)]
        return out

    def dumps(self) -> str:
        return dumps(self.to_json())


def resolve_flags(flags: dict) -> dict[str, sp.Expr]:
    out = {}
    for name, info in flags.items():
        if not name.isidentifier():
            raise SpecError(f"flag name {name!r} is not an identifier")
        try:
            poly = sp.Poly(sp.sympify(info["minpoly"], locals={"x": _X}), _X)
            target = float(info["root"])
        except (KeyError, TypeError, sp.SympifyError, sp.PolynomialError) as exc:
            raise SpecError(f"flag {name!r} needs 'minpoly' in x and a numeric 'root' ({exc})") from None
        if poly.degree() < 1 or not poly.is_irreducible:
            raise SpecError(f"flag {name!r}: {poly.as_expr()} is not an irreducible polynomial")
        roots = poly.real_roots()
        if not roots:
            raise SpecError(f"flag {name!r}: {poly.as_expr()} has no real root")
        out[name] = min(roots, key=lambda r: abs(float(r) - target))
    return out


def parse_spec(obj: Any) -> SemigroupSpec:
    if not isinstance(obj, dict):
        raise SpecError("a spec must be a JSON object")
    arithmetic = obj.get("arithmetic", "float")
    if arithmetic not in ("exact", "float"):
        raise SpecError(f"arithmetic must be 'exact' or 'float', got {arithmetic!r}")
    exact = arithmetic == "exact"
    flags = obj.get("flags", {}) or {}
    symbols = resolve_flags(flags)
    raw = obj.get("generators")
    if not isinstance(raw, list) or not raw:
        raise SpecError("'generators' must be a nonempty list")
    gens = []
    for i, g in enumerate(raw):
        try:
            A = decode_matrix(g["A"], exact, symbols)
            a = decode_vector(g.get("a", [0] * len(g["A"])), exact, symbols)
            gens.append(AffineMap(A, a))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"generator {i}: {exc}") from None
    n = int(obj.get("n", gens[0].n))
    for i, f in enumerate(gens):
        if f.n != n:
            raise SpecError(f"generator {i} acts on C^{f.n}, expected C^{n}")
    check_commuting([phi(f).entries for f in gens])
    box = obj.get("box", [-1.0, 1.0])
    if not (isinstance(box, list) and len(box) == 2 and box[0] < box[1]):
        raise SpecError(f"'box' must be [lo, hi] with lo < hi, got {box!r}")
    base = obj.get("base_point")
    if base is not None:
        base = tuple(decode_vector(base, False))
    return SemigroupSpec(
        n=n,
        generators=tuple(gens),
        arithmetic=arithmetic,
        flags=dict(flags),
        seed=int(obj.get("seed", 0)),
        budget=int(obj.get("budget", 100)),
        box=(float(box[0]), float(box[1])),
        epsilon=float(obj.get("epsilon", 0.05)),
        base_point=base,
        raw_generators=tuple(raw),
    )


def load_spec(path: str | Path) -> SemigroupSpec:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_spec(obj)
