"""Build n+1 commuting diagonal maps on C^n whose logarithmic generators pass the exact
density certificate.

Generator j scales coordinate l by exp(L_jl) with L_jl = scale * R_jl + 2 i pi B_jl.
The real parts R positively span R^n (generators 0..n-1 expand one axis each, the last
contracts all of them), so the semigroup can reach every modulus. Both R and B are
drawn from combinations of square roots of small primes so that, together with 2 i pi,
the resulting 2n + 1 vectors have no rational relation.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy as sp

from affdyn.affine import AffineMap
from affdyn.density import DENSE
from affdyn.orbits import word_count
from affdyn.pipeline import analyze_hypercyclicity
from affdyn.specfile import SemigroupSpec

MAX_N = 4
WORD_CAP = 10_000
PRIMES = (2, 3, 5, 7)


def _flags(n: int) -> dict[str, sp.Expr]:
    primes = PRIMES[:3] if n <= 3 else PRIMES
    return {f"s{p}": sp.sqrt(p) for p in primes}


def _canonical(n: int, names: list[str]):
    """Seed-0 tuple for n = 1: real parts (1, -s2), imaginary coefficients (s3, s5)."""
    s = {k: sp.Symbol(k) for k in names}
    return [[sp.Integer(1)], [-s["s2"]]], [[s["s3"]], [s["s5"]]]


def _draw(n: int, names: list[str], rng: np.random.Generator):
    syms = [sp.Symbol(k) for k in names]

    def irrational(positive: bool) -> sp.Expr:
        a = int(rng.integers(0, 3))
        b = int(rng.integers(1, 4))
        val = a + b * syms[int(rng.integers(len(syms)))]
        return val if positive else -val

    real = [[sp.Integer(0)] * n for _ in range(n + 1)]
    for j in range(n):
        real[j][j] = irrational(True)
    for l in range(n):
        real[n][l] = irrational(False)
    imag = [[irrational(bool(rng.integers(2))) for _ in range(n)] for _ in range(n + 1)]
    return real, imag


def default_budget(p: int, cap: int = WORD_CAP) -> int:
    """Largest lattice budget whose word count stays within ``cap``."""
    b = 0
    while word_count(p, b + 1) <= cap:
        b += 1
    return b


def construct_example(
    n: int,
    seed: int = 0,
    real_scale: Fraction = Fraction(1, 10),
    max_attempts: int = 50,
) -> SemigroupSpec:
    """A spec with n+1 diagonal generators certified Dense by the exact rank test.

    ``real_scale`` shrinks the real parts of the log-eigenvalues; a small value keeps
    the moduli close to 1 so that an orbit fills a bounded window quickly. Candidates
    that fail the exact certificate are redrawn (deterministically from ``seed``).
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"construct_example supports 1 <= n <= {MAX_N} (exact-mode cost guard)")
    values = _flags(n)
    names = list(values)
    scale = sp.Rational(real_scale.numerator, real_scale.denominator)
    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        if n == 1 and seed == 0 and attempt == 0:
            real, imag = _canonical(n, names)
        else:
            real, imag = _draw(n, names, rng)
        texts = []
        for j in range(n + 1):
            diag = [
                f"exp({sp.sstr(scale * real[j][l])} + 2*I*pi*({sp.sstr(imag[j][l])}))"
                for l in range(n)
            ]
            A = [[diag[i] if i == l else 0 for l in range(n)] for i in range(n)]
            texts.append({"A": A, "a": [0] * n})
        maps = []
        for g in texts:
            A = sp.Matrix([[sp.sympify(x, locals=values) for x in row] for row in g["A"]])
            maps.append(AffineMap(A, sp.zeros(n, 1)))
        report = analyze_hypercyclicity(maps, mode="exact")
        if report.verdict.status == DENSE:
            flags = {k: {"minpoly": f"x**2 - {k[1:]}", "root": float(v)} for k, v in values.items()}
            return SemigroupSpec(
                n=n,
                generators=tuple(maps),
                arithmetic="exact",
                flags=flags,
                seed=seed,
                budget=default_budget(n + 1),
                box=(-1.0, 1.0),
                epsilon=0.1,
                base_point=tuple([0.5 + 0j] * n),
                raw_generators=tuple(texts),
            )
    raise RuntimeError(f"no certified example found after {max_attempts} attempts")
