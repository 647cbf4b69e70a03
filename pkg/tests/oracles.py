"""Independent reference computations used by the tests.

None of these reuse the package's rank, lattice or grid code paths.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import cKDTree


def lattice_points_in_box(u: np.ndarray, cmax: int = 200, box=(-1.0, 1.0), margin: float = 0.05) -> np.ndarray:
    """All sums c_1 u_1 + ... + c_m u_m (|c_i| <= cmax) landing in box+margin, for u in C^1.

    Two well-conditioned generators are solved for directly; the others are enumerated.
    """
    u = np.asarray(u, dtype=complex)
    lo, hi = box[0] - margin, box[1] + margin
    m = len(u)
    span = np.arange(-cmax, cmax + 1)
    if m <= 2 or np.linalg.matrix_rank(np.array([u.real, u.imag]), tol=1e-12) < 2:
        if m > 2:
            raise ValueError("oracle needs an R-independent pair when m > 2")
        grids = np.meshgrid(*([span] * m), indexing="ij")
        z = sum(g.ravel() * ui for g, ui in zip(grids, u))
    else:
        best, pair = -1.0, (0, 1)
        for a, b in itertools.combinations(range(m), 2):
            area = abs((np.conj(u[a]) * u[b]).imag) / (abs(u[a]) * abs(u[b]) + 1e-300)
            if area > best:
                best, pair = area, (a, b)
        a, b = pair
        rest = [i for i in range(m) if i not in pair]
        T = np.array([[u[a].real, u[b].real], [u[a].imag, u[b].imag]])
        Tinv = np.linalg.inv(T)
        combos = np.array(list(itertools.product(span, repeat=len(rest))), dtype=float)
        offsets = combos @ u[rest] if rest else np.zeros(1, dtype=complex)
        center = (lo + hi) / 2
        half = (hi - lo) / 2
        # parallelogram preimage of the box, per coefficient
        mid = Tinv @ np.array([center - offsets.real, center - offsets.imag])
        rad = np.abs(Tinv).sum(axis=1) * half
        width = [int(np.ceil(2 * r)) + 2 for r in rad]
        start = np.floor(mid - rad[:, None]).astype(np.int64)
        da, db = np.meshgrid(np.arange(width[0]), np.arange(width[1]), indexing="ij")
        ca = start[0][:, None] + da.ravel()[None, :]
        cb = start[1][:, None] + db.ravel()[None, :]
        ok = (np.abs(ca) <= cmax) & (np.abs(cb) <= cmax)
        z = (offsets[:, None] + ca * u[a] + cb * u[b])[ok]
    inside = (z.real >= lo) & (z.real <= hi) & (z.imag >= lo) & (z.imag <= hi)
    return z[inside]


def grid_coverage_2d(z: np.ndarray, box=(-1.0, 1.0), eps: float = 0.05) -> float:
    """Fraction of the eps-grid cell centers of box^2 within eps of some point of z."""
    cells = int(round((box[1] - box[0]) / eps))
    centers = box[0] + (np.arange(cells) + 0.5) * (box[1] - box[0]) / cells
    cx, cy = np.meshgrid(centers, centers, indexing="ij")
    if len(z) == 0:
        return 0.0
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    d, _ = tree.query(np.column_stack([cx.ravel(), cy.ravel()]))
    return float(np.mean(d <= eps))


def density_oracle(u, cmax: int = 200, eps: float = 0.05, threshold: float = 0.9) -> tuple[bool, float]:
    """(looks dense, coverage) for the Z-span of u in C^1."""
    z = lattice_points_in_box(np.asarray(u, dtype=complex), cmax, margin=eps)
    cov = grid_coverage_2d(z, eps=eps)
    return cov >= threshold, cov


def brute_cells_hit(points: np.ndarray, lo: float, hi: float, eps: float) -> int:
    """Count eps-grid cells of [lo, hi]^D whose center is within eps of a point, by full scan."""
    D = points.shape[1]
    cells = int(round((hi - lo) / eps))
    pitch = (hi - lo) / cells
    centers_1d = lo + (np.arange(cells) + 0.5) * pitch
    hit = 0
    for idx in itertools.product(range(cells), repeat=D):
        c = centers_1d[list(idx)]
        if len(points) and np.min(np.linalg.norm(points - c, axis=1)) <= eps:
            hit += 1
    return hit


def naive_word_value(maps, word, x):
    """Apply f_p^{m_p}, then ..., then f_1^{m_1} one step at a time (reverse of the DP order)."""
    y = np.asarray(x, dtype=complex)
    for f, e in reversed(list(zip(maps, word))):
        for _ in range(int(e)):
            y = f.linear @ y + f.translation
    return y
