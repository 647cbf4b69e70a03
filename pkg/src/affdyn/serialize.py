"""JSON encoding shared by every report: [re, im] scalar pairs and fixed float formatting."""
from __future__ import annotations

import json
import math
from typing import Any, Mapping

import numpy as np
import sympy as sp

from affdyn._exact import to_exact


def encode_scalar(x) -> list:
    """[re, im] with floats for the float backend, sympy strings for the exact one."""
    if isinstance(x, sp.Basic):
        re, im = sp.expand_complex(x).as_real_imag()
        return [str(sp.simplify(re)), str(sp.simplify(im))]
    z = complex(x)
    return [z.real, z.imag]


def encode_vector(v) -> list:
    return [encode_scalar(x) for x in v]


def encode_matrix(M) -> list:
    if isinstance(M, sp.MatrixBase):
        return [[encode_scalar(x) for x in M.row(i)] for i in range(M.shape[0])]
    return [[encode_scalar(x) for x in row] for row in np.asarray(M)]


def _parse_string(text: str, symbols: Mapping[str, sp.Expr]) -> sp.Expr:
    try:
        expr = sp.sympify(text, locals=dict(symbols), rational=True)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse scalar {text!r}: {exc}") from None
    unknown = expr.free_symbols
    if unknown:
        raise ValueError(f"scalar {text!r} uses undeclared symbols {sorted(map(str, unknown))}")
    return expr


def decode_scalar(obj, exact: bool, symbols: Mapping[str, sp.Expr] | None = None):
    """Inverse of ``encode_scalar``; also accepts a bare number or expression string.

    In exact mode JSON floats are rejected (they cannot be promoted); strings in float
    mode are evaluated numerically.
    """
    symbols = symbols or {}
    if isinstance(obj, list):
        if len(obj) != 2:
            raise ValueError(f"complex scalars are [re, im] pairs, got {obj!r}")
        re, im = (decode_scalar(p, exact, symbols) for p in obj)
        return sp.expand(re + sp.I * im) if exact else complex(re) + 1j * complex(im)
    if isinstance(obj, bool) or obj is None:
        raise ValueError(f"not a scalar: {obj!r}")
    if isinstance(obj, str):
        expr = _parse_string(obj, symbols)
        return expr if exact else complex(sp.N(expr, 30))
    if isinstance(obj, int):
        return sp.Integer(obj) if exact else complex(obj)
    if isinstance(obj, float):
        if exact:
            raise ValueError(f"float {obj!r} cannot be used in exact mode; write it as a string")
        return complex(obj)
    raise ValueError(f"not a scalar: {obj!r}")


def decode_vector(obj, exact: bool, symbols=None):
    if not isinstance(obj, list):
        raise ValueError(f"expected a list of scalars, got {obj!r}")
    vals = [decode_scalar(x, exact, symbols) for x in obj]
    if exact:
        return sp.ImmutableMatrix([[to_exact(v)] for v in vals])
    return np.array(vals, dtype=complex)


def decode_matrix(obj, exact: bool, symbols=None):
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise ValueError(f"expected a list of rows, got {obj!r}")
    rows = [[decode_scalar(x, exact, symbols) for x in r] for r in obj]
    if exact:
        return sp.ImmutableMatrix(rows)
    return np.array(rows, dtype=complex)


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if all(c in "-0123456789" for c in text):
        text += ".0"
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(v, (list, tuple, Mapping, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    if hasattr(obj, "to_json"):
        return _encode(obj.to_json(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON: floats at 17 significant digits, NaN and infinities as null."""
    return _encode(obj, indent, 0) + "\n"
