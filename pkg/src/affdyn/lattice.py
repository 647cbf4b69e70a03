"""LLL reduction of integer lattice bases in all-integer arithmetic.

This is the integral variant (Cohen, A Course in Computational Algebraic Number Theory,
Alg. 2.6.7): Gram-Schmidt data are carried as the integers d_i (Gram determinants) and
lambda_ij = d_j mu_ij, so every division is exact and no rationals are formed.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def _nearest(num: int, den: int) -> int:
    """round(num / den) for den > 0, halves rounded up."""
    return (2 * num + den) // (2 * den)


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """Return an LLL-reduced basis of the lattice spanned by the rows of ``basis``.

    Rows must be linearly independent.
    """
    delta = Fraction(delta)
    p, q = delta.numerator, delta.denominator
    n = len(basis)
    # 1-based storage to follow the textbook indices
    b = [None] + [list(map(int, row)) for row in basis]
    if n <= 1:
        return b[1:]
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]

    def gram_schmidt(k: int) -> None:
        for j in range(1, k + 1):
            u = _dot(b[k], b[j])
            for i in range(1, j):
                u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
            if j < k:
                lam[k][j] = u
            elif u == 0:
                raise ValueError("lattice basis rows are linearly dependent")
            else:
                d[k] = u

    def reduce(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l]:
            r = _nearest(lam[k][l], d[l])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= r * d[l]
            for i in range(1, l):
                lam[k][i] -= r * lam[l][i]

    def swap(k: int, kmax: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        x = lam[k][k - 1]
        B = (d[k - 2] * d[k] + x * x) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - x * t) // d[k - 1]
            lam[i][k - 1] = (B * t + x * lam[i][k]) // d[k]
        d[k - 1] = B

    gram_schmidt(1)
    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            gram_schmidt(k)
        while True:
            reduce(k, k - 1)
            if q * (d[k] * d[k - 2] + lam[k][k - 1] ** 2) < p * d[k - 1] ** 2:
                swap(k, kmax)
                k = max(2, k - 1)
            else:
                break
        for l in range(k - 2, 0, -1):
            reduce(k, l)
        k += 1
    return b[1:]
