"""Block-shape bookkeeping for direct sums of lower-triangular blocks with constant diagonal."""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
import sympy as sp

from affdyn._exact import is_zero, to_complex


class ShapeCheck(NamedTuple):
    ok: bool
    residual: float


def block_slices(eta: Sequence[int]) -> list[slice]:
    out, start = [], 0
    for size in eta:
        if size <= 0:
            raise ValueError(f"block sizes must be positive, got {tuple(eta)}")
        out.append(slice(start, start + size))
        start += size
    return out


def _block_index(eta: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(eta)), eta)


def shape_violations(M, eta: Sequence[int]) -> list[tuple[int, int, object]]:
    """Entries that must vanish for ``M`` to have the block shape, as (i, j, value).

    Diagonal entries are reported as their deviation from the block's first diagonal entry.
    """
    size = sum(eta)
    if tuple(M.shape) != (size, size):
        raise ValueError(f"matrix of shape {tuple(M.shape)} does not match eta {tuple(eta)}")
    owner = _block_index(eta)
    starts = np.cumsum((0,) + tuple(eta))[:-1]
    out = []
    for i in range(size):
        for j in range(size):
            if owner[i] != owner[j] or j > i:
                out.append((i, j, M[i, j]))
            elif i == j and i != starts[owner[i]]:
                s = starts[owner[i]]
                out.append((i, j, M[i, i] - M[s, s]))
    return out


def validate_block_shape(M, eta: Sequence[int], tol: float = 1e-9) -> ShapeCheck:
    """Check that ``M`` lies in the block-diagonal class of shape ``eta``.

    Float matrices pass when every violating entry is at most ``tol`` in magnitude;
    sympy matrices pass only when every violation is exactly zero.
    """
    if isinstance(M, sp.MatrixBase):
        viol = shape_violations(M, eta)
        residual = max((abs(to_complex(v)) for *_, v in viol), default=0.0)
        ok = all(is_zero(v) for *_, v in viol)
        return ShapeCheck(ok, residual)
    M = np.asarray(M, dtype=complex)
    size = sum(eta)
    if M.shape != (size, size):
        raise ValueError(f"matrix of shape {M.shape} does not match eta {tuple(eta)}")
    residual = 0.0
    owner = _block_index(eta)
    off = (owner[:, None] != owner[None, :]) | np.triu(np.ones((size, size), bool), 1)
    if off.any():
        residual = float(np.abs(M[off]).max())
    for sl in block_slices(eta):
        d = np.diag(M[sl, sl])
        residual = max(residual, float(np.abs(d - d.mean()).max()))
    return ShapeCheck(residual <= tol, residual)


def project_block_shape(M: np.ndarray, eta: Sequence[int]) -> np.ndarray:
    """Nearest matrix of the block shape: forbidden entries zeroed, diagonals averaged."""
    M = np.asarray(M, dtype=complex)
    out = np.zeros_like(M)
    for sl in block_slices(eta):
        blk = np.tril(M[sl, sl])
        np.fill_diagonal(blk, np.diag(blk).mean())
        out[sl, sl] = blk
    return out
