"""Helpers for the exact (sympy) backend."""
from __future__ import annotations

from fractions import Fraction
from numbers import Integral

import sympy as sp

TWO_PI_I = 2 * sp.pi * sp.I


def is_exact_scalar(x) -> bool:
    return isinstance(x, (sp.Basic, Integral, Fraction)) and not isinstance(x, bool)


def to_exact(x) -> sp.Expr:
    """Convert ``x`` to a sympy expression, refusing anything that carries a float."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Integral):
        return sp.Integer(int(x))
    if isinstance(x, Fraction):
        return sp.Rational(x.numerator, x.denominator)
    if isinstance(x, str):
        x = sp.sympify(x, rational=False)
    if isinstance(x, sp.Basic):
        if x.has(sp.Float):
            raise TypeError(f"float value {x} cannot enter the exact backend")
        return x
    raise TypeError(f"{type(x).__name__} value {x!r} cannot enter the exact backend")


def exact_matrix(rows) -> sp.ImmutableMatrix:
    m = sp.Matrix(rows)
    return sp.ImmutableMatrix(m.applyfunc(to_exact))


def is_zero(expr) -> bool:
    """Decide ``expr == 0`` for the closed-form numbers this package produces."""
    e = sp.expand(expr)
    if e == 0:
        return True
    if e.is_number:
        approx = complex(sp.N(e, 40))
        if abs(approx) > 1e-25:
            return False
    e = sp.simplify(e)
    if e == 0:
        return True
    z = e.is_zero
    if z is None:
        raise ArithmeticError(f"cannot decide whether {e} vanishes")
    return bool(z)


def to_complex(expr) -> complex:
    return complex(sp.N(expr, 30))


def principal_log(mu) -> sp.Expr:
    """Principal logarithm with imaginary part in (-pi, pi], kept in closed form."""
    mu = sp.sympify(mu)
    if mu == 1:
        return sp.Integer(0)
    if is_zero(mu):
        raise ValueError("logarithm of zero")
    if isinstance(mu, sp.exp):
        z = sp.expand(mu.args[0])
        im = sp.N(sp.im(z), 50)
        k = sp.ceiling((im - sp.pi.evalf(50)) / (2 * sp.pi.evalf(50)))
        return sp.expand(z - 2 * sp.pi * sp.I * int(k))
    return sp.log(mu)
