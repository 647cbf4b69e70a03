"""End-to-end analysis of a commuting affine family, and the k-fold refutation harness."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from affdyn.affine import AffineMap
from affdyn.density import (
    DEFAULT_BOUND,
    DensityVerdict,
    NotRepresentable,
    count_bound,
    group_rank_density,
)
from affdyn.generators import GeneratorSet, log_lift_generators, q_w0_generators
from affdyn.normal_form import BlockStructure, NormalFormError, compute_normal_form
from affdyn.orbits import coverage_report, k_fold_orbit, simulate_orbit
from affdyn.serialize import encode_vector

HEADLINES = {
    "NotDense": "not hypercyclic (certified)",
    "Dense": "candidate hypercyclic (group-level certificate)",
    "Inconclusive": "candidate hypercyclic (empirical)",
}


@dataclass(frozen=True, eq=False)
class AnalysisReport:
    n: int
    p: int
    excluded: tuple[int, ...]
    mode_requested: str
    mode_used: str
    structure: BlockStructure
    generator_set: GeneratorSet
    verdict: DensityVerdict
    corroboration: tuple = ()
    notes: tuple[str, ...] = ()

    @property
    def eta(self) -> tuple[int, ...]:
        return self.structure.eta

    @property
    def r(self) -> int:
        return self.structure.r

    @property
    def m(self) -> int:
        return self.generator_set.m

    @property
    def headline(self) -> str:
        return HEADLINES[self.verdict.status]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "excluded_non_invertible": list(self.excluded),
            "mode_requested": self.mode_requested,
            "mode_used": self.mode_used,
            "eta": list(self.eta),
            "r": self.r,
            "m": self.m,
            "normal_form_residual": self.structure.residual,
            "w0": encode_vector(self.structure.w0),
            "generators": self.generator_set.to_json(),
            "verdict": self.verdict.to_json(),
            "headline": self.headline,
            "corroboration": list(self.corroboration),
            "notes": list(self.notes),
        }


def _structure_for(generators, mode: str, notes: list[str]) -> tuple[BlockStructure, list[AffineMap], str]:
    exact_input = all(f.is_exact for f in generators)
    if mode == "exact":
        if not exact_input:
            raise ValueError("exact mode needs exact generator entries; use float mode")
        try:
            return compute_normal_form(generators, exact=True), list(generators), "exact"
        except NormalFormError:
            notes.append("family is not triangular up to a coordinate permutation; normal form computed in float")
    maps = [f.to_float() for f in generators]
    return compute_normal_form(maps), maps, "float"


def analyze_hypercyclicity(
    generators: Sequence[AffineMap],
    mode: str = "float",
    relation_bound: int = DEFAULT_BOUND,
    branches=None,
    simulate: bool = False,
    budget: int = 100,
    box: tuple[float, float] = (-1.0, 1.0),
    epsilon: float = 0.05,
    points: Sequence | None = None,
) -> AnalysisReport:
    """Normal form, logarithmic generators, counting bound, then the rank criterion."""
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    generators = list(generators)
    notes: list[str] = []
    structure, maps, used = _structure_for(generators, mode, notes)
    n = structure.n
    invertible = [i for i, f in enumerate(maps) if f.invertible]
    excluded = tuple(i for i in range(len(maps)) if i not in invertible)
    if excluded:
        notes.append(f"generators {list(excluded)} are not invertible and get no logarithm")
    if branches is not None:
        branches = [branches[i] for i in invertible]
    f_primes = log_lift_generators([maps[i] for i in invertible], structure, branches)
    gens = q_w0_generators(f_primes, structure)
    verdict = count_bound(len(f_primes), structure.r, n)
    if verdict is None:
        try:
            verdict = group_rank_density(gens.group_closure(), used, relation_bound)
        except NotRepresentable as exc:
            notes.append(f"exact density test not applicable ({exc}); fell back to float")
            used = "float"
            verdict = group_rank_density(gens.group_closure(), "float", relation_bound)
    corroboration = []
    if simulate:
        starts = [_float_w0(structure)]
        starts += [np.asarray(p, dtype=complex) for p in (points or [])]
        for x in starts:
            sample = simulate_orbit(maps, x, budget)
            rep = coverage_report(sample, box, epsilon)
            corroboration.append({"point": encode_vector(x), "words": len(sample), **rep.to_json()})
    return AnalysisReport(
        n, len(maps), excluded, mode, used, structure, gens, verdict, tuple(corroboration), tuple(notes)
    )


def _float_w0(structure: BlockStructure) -> np.ndarray:
    return np.array([complex(x) for x in structure.w0], dtype=complex)


@dataclass(frozen=True, eq=False)
class RefutationReport:
    k: int
    budget: int
    box: tuple[float, float]
    epsilon: float
    threshold: float
    seed: int
    base_points: np.ndarray
    coverages: tuple[float, ...]
    words: int
    one_fold_coverage: float | None

    @property
    def max_coverage(self) -> float:
        return max(self.coverages, default=0.0)

    @property
    def passed(self) -> bool:
        return all(c <= self.threshold for c in self.coverages)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "trials": len(self.coverages),
            "budget": self.budget,
            "words": self.words,
            "box": list(self.box),
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "seed": self.seed,
            "coverages": list(self.coverages),
            "max_coverage": self.max_coverage,
            "one_fold_coverage": self.one_fold_coverage,
            "passed": self.passed,
            "base_points": [[encode_vector(x) for x in tup] for tup in self.base_points],
        }


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("AFFDYN_THREADS", "1")))
    except ValueError:
        return 1


def refute_k_transitivity(
    generators: Sequence[AffineMap],
    k: int,
    trials: int = 20,
    budget: int = 100,
    box: tuple[float, float] = (-1.0, 1.0),
    epsilon: float = 0.1,
    seed: int = 0,
    threshold: float = 0.5,
    one_fold_point=None,
) -> RefutationReport:
    """Coverage of k-fold orbits from random k-tuples; every trial should stay far from dense.

    A coverage above ``threshold`` is reported (``passed`` is False), never raised.
    """
    if k < 2:
        raise ValueError("k-transitivity refutation needs k >= 2")
    maps = [f.to_float() for f in generators]
    n = maps[0].n
    rng = np.random.default_rng(seed)
    lo, hi = box
    shape = (trials, k, n)
    tuples = rng.uniform(lo, hi, shape) + 1j * rng.uniform(lo, hi, shape)

    def run(tup):
        sample = k_fold_orbit(maps, tup, budget)
        return coverage_report(sample, box, epsilon).coverage, len(sample)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(run, tuples))
    point = tuples[0, 0] if one_fold_point is None else np.asarray(one_fold_point, dtype=complex)
    one = coverage_report(simulate_orbit(maps, point, budget), box, epsilon).coverage if trials else None
    return RefutationReport(
        k, budget, (lo, hi), epsilon, threshold, seed, tuples,
        tuple(c for c, _ in results), results[0][1] if results else 0, one,
    )
