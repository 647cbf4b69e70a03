"""Orbit sampling for commuting affine families and epsilon-grid coverage of a box.

A word (m_1, ..., m_p) stands for f_1^m_1 o ... o f_p^m_p; since the maps commute the
order of application is irrelevant. Lattice sampling enumerates every word with
sum(m) <= budget in graded order (by total degree, then descending lexicographic),
so samples are bit-reproducible. Points whose norm exceeds the escape radius, or that
overflow, are kept in the sample as NaN with ``escaped`` set.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

from affdyn.affine import AffineMap, phi

ESCAPE_RADIUS = 1e6


@dataclass(frozen=True, eq=False)
class OrbitSample:
    base_points: np.ndarray  # (k, n)
    words: np.ndarray  # (N, p) ints
    points: np.ndarray  # (N, k, n) complex, NaN where escaped
    escaped: np.ndarray  # (N,) bool
    budget: int
    strategy: str = "lattice"
    seed: int | None = None

    @property
    def k(self) -> int:
        return self.base_points.shape[0]

    @property
    def n(self) -> int:
        return self.base_points.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def realified(self) -> np.ndarray:
        """(N_kept, 2nk) real coordinates (re, im per complex coordinate) of kept points."""
        pts = self.points[~self.escaped].reshape(-1, self.k * self.n)
        out = np.empty((pts.shape[0], 2 * pts.shape[1]))
        out[:, 0::2] = pts.real
        out[:, 1::2] = pts.imag
        return out

    def to_csv(self) -> str:
        p = self.words.shape[1]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        dims = self.k * self.n
        header = [f"m{i + 1}" for i in range(p)]
        for j in range(dims):
            header += [f"re{j + 1}", f"im{j + 1}"]
        writer.writerow(header)
        flat = self.points.reshape(len(self), dims)
        for word, row in zip(self.words, flat):
            cells = [str(int(x)) for x in word]
            for z in row:
                cells += [format(z.real, ".17g"), format(z.imag, ".17g")]
            writer.writerow(cells)
        return buf.getvalue()


@dataclass(frozen=True)
class CoverageReport:
    box: tuple[float, float]
    epsilon: float
    dims: int
    cells_per_axis: int
    cells_total: int
    cells_hit: int

    @property
    def coverage(self) -> float:
        return self.cells_hit / self.cells_total if self.cells_total else 0.0

    def to_json(self) -> dict:
        return {
            "box": list(self.box),
            "epsilon": self.epsilon,
            "dims": self.dims,
            "cells_per_axis": self.cells_per_axis,
            "cells_total": self.cells_total,
            "cells_hit": self.cells_hit,
            "coverage": self.coverage,
        }


def graded_words(p: int, budget: int) -> Iterator[tuple[int, ...]]:
    """All exponent vectors with sum <= budget: by total, then descending lexicographic."""
    def level(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in level(total - first, parts - 1):
                yield (first,) + rest

    for total in range(budget + 1):
        yield from level(total, p)


def word_count(p: int, budget: int) -> int:
    return math.comb(budget + p, p)


def _float_maps(generators: Sequence[AffineMap]):
    maps = [f.to_float() for f in generators]
    if not maps:
        raise ValueError("at least one generator is required")
    n = maps[0].n
    if any(f.n != n for f in maps):
        raise ValueError("generators act on different dimensions")
    return maps


def _apply(f: AffineMap, X: np.ndarray) -> np.ndarray:
    """Apply f to every point of an (N, k, n) array."""
    with np.errstate(over="ignore", invalid="ignore"):
        return X @ f.linear.T + f.translation


def _escape_mask(X: np.ndarray, radius: float) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.abs(X).reshape(len(X), -1).max(axis=1, initial=0.0)
    return ~np.isfinite(mag) | (mag > radius)


def _base(points, n: int) -> np.ndarray:
    base = np.array(points, dtype=complex)
    if base.ndim == 1:
        base = base[None, :]
    if base.ndim != 2 or base.shape[1] != n:
        raise ValueError(f"base points must be k vectors of length {n}")
    return base


def k_fold_orbit(
    generators: Sequence[AffineMap],
    points,
    budget: int,
    strategy: str = "lattice",
    samples: int = 10_000,
    seed: int = 0,
    escape_radius: float = ESCAPE_RADIUS,
) -> OrbitSample:
    """Orbit of a k-tuple under the diagonal action: one word moves all coordinates."""
    maps = _float_maps(generators)
    base = _base(points, maps[0].n)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if len({tuple(np.round(b, 12)) for b in base}) < len(base):
        warnings.warn("k-fold orbit started from repeated base points", stacklevel=2)
    if strategy == "lattice":
        words, values, escaped = _lattice(maps, base, budget, escape_radius)
        seed = None
    elif strategy == "random":
        words, values, escaped = _random(maps, base, budget, samples, seed, escape_radius)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return OrbitSample(base, words, values, escaped, budget, strategy, seed)


def simulate_orbit(
    generators: Sequence[AffineMap],
    x,
    budget: int,
    strategy: str = "lattice",
    samples: int = 10_000,
    seed: int = 0,
    escape_radius: float = ESCAPE_RADIUS,
) -> OrbitSample:
    """Orbit of a single point; the k = 1 case of ``k_fold_orbit``."""
    x = np.asarray(x, dtype=complex).reshape(1, -1)
    return k_fold_orbit(generators, x, budget, strategy, samples, seed, escape_radius)


def _lattice(maps, base, budget, radius):
    p = len(maps)
    words = np.array(list(graded_words(p, budget)), dtype=np.int64).reshape(-1, p)
    total = words.sum(axis=1)
    values = np.full((len(words),) + base.shape, np.nan, dtype=complex)
    escaped = np.ones(len(words), dtype=bool)
    index = {w: i for i, w in enumerate(map(tuple, words))}
    values[0] = base
    escaped[0] = bool(_escape_mask(base[None], radius)[0])
    if escaped[0]:
        values[0] = np.nan
    for level in range(1, budget + 1):
        rows = np.flatnonzero(total == level)
        todo = np.ones(len(rows), dtype=bool)
        for i in range(p):
            sel = todo & (words[rows, i] > 0)
            if not sel.any():
                continue
            targets = rows[sel]
            parents = []
            for t in targets:
                w = list(words[t])
                w[i] -= 1
                parents.append(index[tuple(w)])
            parents = np.array(parents)
            alive = ~escaped[parents]
            targets, parents = targets[alive], parents[alive]
            if len(targets) == 0:
                continue
            new = _apply(maps[i], values[parents])
            gone = _escape_mask(new, radius)
            new[gone] = np.nan
            values[targets] = new
            escaped[targets] = gone
            todo[np.isin(rows, targets)] = False
    return words, values, escaped


def _random(maps, base, budget, samples, seed, radius):
    p = len(maps)
    rng = np.random.default_rng(seed)
    drawn = set()
    for _ in range(samples):
        # uniform weak composition of budget into p + 1 parts, last part discarded
        cuts = np.sort(rng.choice(budget + p, size=p, replace=False))
        parts = np.diff(np.concatenate([[-1], cuts])) - 1
        drawn.add(tuple(int(x) for x in parts))
    order = sorted(drawn, key=lambda w: (sum(w), tuple(-x for x in w)))
    words = np.array(order, dtype=np.int64).reshape(-1, p)
    lifts = [phi(f).entries for f in maps]
    ones = np.ones((base.shape[0], 1), dtype=complex)
    lifted_base = np.hstack([ones, base])
    values = np.empty((len(words),) + base.shape, dtype=complex)
    escaped = np.zeros(len(words), dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for row, w in enumerate(words):
            M = np.eye(base.shape[1] + 1, dtype=complex)
            for L, e in zip(lifts, w):
                if e:
                    M = M @ np.linalg.matrix_power(L, int(e))
            values[row] = (lifted_base @ M.T)[:, 1:]
    escaped = _escape_mask(values, radius)
    values[escaped] = np.nan
    return words, values, escaped


def coverage_report(
    sample: OrbitSample | np.ndarray,
    box: tuple[float, float] = (-1.0, 1.0),
    epsilon: float = 0.05,
    chunk: int = 4096,
) -> CoverageReport:
    """Fraction of epsilon-cells of the cube box^D whose center lies within epsilon of a point.

    ``sample`` may also be a raw (N, D) array of real coordinates.
    """
    lo, hi = float(box[0]), float(box[1])
    if not epsilon > 0 or not hi > lo:
        raise ValueError("need epsilon > 0 and a nonempty box")
    pts = sample.realified() if isinstance(sample, OrbitSample) else np.asarray(sample, dtype=float)
    dims = pts.shape[1] if pts.ndim == 2 else 0
    if isinstance(sample, OrbitSample):
        dims = 2 * sample.k * sample.n
    cells = max(1, int(round((hi - lo) / epsilon)))
    pitch = (hi - lo) / cells
    total = cells**dims
    if pts.size == 0 or dims == 0:
        return CoverageReport((lo, hi), epsilon, dims, cells, total, 0)
    keep = np.all((pts >= lo - epsilon) & (pts <= hi + epsilon), axis=1)
    pts = pts[keep]
    if len(pts) == 0:
        return CoverageReport((lo, hi), epsilon, dims, cells, total, 0)
    base = np.unique(np.floor((pts - lo) / pitch).astype(np.int64), axis=0)
    reach = max(1, math.ceil(epsilon / pitch + 0.5) - 1)
    steps = range(-reach, reach + 1)
    offsets = np.array(list(itertools.product(steps, repeat=dims)), dtype=np.int64)
    tree = cKDTree(pts)
    # cells are tracked by their row-major linear index when it fits in int64
    packed = total < 2**62
    weights = cells ** np.arange(dims - 1, -1, -1, dtype=np.int64) if packed else None
    hit: set = set()
    for start in range(0, len(base), chunk):
        cand = (base[start:start + chunk, None, :] + offsets[None]).reshape(-1, dims)
        cand = cand[np.all((cand >= 0) & (cand < cells), axis=1)]
        if len(cand) == 0:
            continue
        if packed:
            codes = np.unique(cand @ weights)
            codes = codes[~np.isin(codes, np.fromiter(hit, np.int64, len(hit)))] if hit else codes
            cand = (codes[:, None] // weights[None, :]) % cells
        else:
            cand = np.unique(cand, axis=0)
        if len(cand) == 0:
            continue
        centers = lo + (cand + 0.5) * pitch
        dist, _ = tree.query(centers, distance_upper_bound=epsilon * (1 + 1e-12))
        found = np.isfinite(dist)
        hit.update(codes[found].tolist() if packed else map(tuple, cand[found]))
    return CoverageReport((lo, hi), epsilon, dims, cells, total, len(hit))
