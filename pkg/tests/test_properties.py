"""Property-based checks of the algebraic and simulation invariants."""
import itertools

import numpy as np
import sympy as sp
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from affdyn.affine import AffineMap, block_exp, block_log, compose, phi, phi_inv, psi, psi_inv, psi_normalize
from affdyn.density import INCONCLUSIVE, group_rank_density, relation_is_sound, realify
from affdyn.generators import from_vectors
from affdyn.normal_form import canonical_vectors, compute_normal_form
from affdyn.orbits import coverage_report, simulate_orbit
from families import k_shaped_family, random_family
from oracles import naive_word_value

SETTINGS = settings(max_examples=40, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])

small = st.integers(-6, 6)
rationals = st.builds(sp.Rational, small, st.integers(1, 5))
gaussian = st.builds(lambda a, b: a + sp.I * b, rationals, rationals)
floats = st.floats(-2, 2, allow_nan=False)
complexes = st.builds(complex, floats, floats)


@st.composite
def exact_maps(draw, n):
    A = [[draw(gaussian) for _ in range(n)] for _ in range(n)]
    a = [draw(gaussian) for _ in range(n)]
    return AffineMap.exact(A, a)


@st.composite
def float_maps(draw, n):
    A = np.array([[draw(complexes) for _ in range(n)] for _ in range(n)])
    a = np.array([draw(complexes) for _ in range(n)])
    return AffineMap(A, a)


@SETTINGS
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(exact_maps(n), exact_maps(n))))
def test_phi_is_a_homomorphism(pair):
    f, g = pair
    assert sp.Matrix(phi(compose(f, g)).entries) == (sp.Matrix(phi(f).entries) * sp.Matrix(phi(g).entries)).applyfunc(sp.expand)


@SETTINGS
@given(st.integers(1, 3).flatmap(exact_maps))
def test_lift_round_trips(f):
    assert phi_inv(phi(f)).equals(f)
    assert psi_inv(psi(f)).equals(f)


@SETTINGS
@given(st.integers(1, 3).flatmap(float_maps))
def test_exp_of_linear_lift_is_affine(f):
    E = block_exp(psi(f).entries)
    assert np.abs(E[0] - np.eye(f.n + 1)[0]).max() < 1e-10
    assert phi_inv(E).invertible


@SETTINGS
@given(st.integers(1, 3).flatmap(float_maps), st.integers(-3, 3))
def test_psi_normalize_idempotent(f, k):
    B = psi(f).entries + 2j * np.pi * k * np.eye(f.n + 1)
    once = psi_normalize(B).entries
    twice = psi_normalize(once).entries
    assert np.array_equal(once, twice)
    assert np.allclose(once, psi(f).entries, atol=1e-12)


@SETTINGS
@given(st.integers(0, 10**6))
def test_exp_log_round_trip(seed):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, 5))
    eta = []
    left = size
    while left:
        eta.append(int(rng.integers(1, left + 1)))
        left -= eta[-1]
    (K,) = k_shaped_family(tuple(eta), 1, rng, first_one=False, distinct=False)
    L = block_log(K, eta)
    assert np.abs(block_exp(L, eta) - K).max() < 1e-10 * max(1.0, np.abs(K).max())


@SETTINGS
@given(st.integers(0, 10**6))
def test_projectors_and_base_vector(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    maps, _ = random_family(n, 2, rng)
    s = compute_normal_form(maps)
    c = canonical_vectors(s)
    assert np.array_equal(sum(c.J_k), np.eye(n + 1))
    for k, J in enumerate(c.J_k):
        assert np.array_equal(J @ c.u0, c.e_k[k])
    assert s.v0[0] == 1 and np.array_equal(s.v0[1:], s.w0)


@SETTINGS
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_words_commute(seed, budget):
    rng = np.random.default_rng(seed)
    maps, _ = random_family(1, 2, rng)
    maps = [AffineMap(0.9 * f.linear / np.abs(f.linear), f.translation) for f in maps]
    assume(all(f.invertible for f in maps))
    x = np.array([0.3 + 0.2j])
    sample = simulate_orbit(maps, x, budget)
    for w, pt, gone in zip(sample.words, sample.points, sample.escaped):
        if gone:
            continue
        assert np.allclose(naive_word_value(maps, w, x), pt[0], atol=1e-8)


@SETTINGS
@given(st.integers(0, 10**6), st.integers(0, 6))
def test_lifted_orbit_matches_affine_orbit(seed, budget):
    rng = np.random.default_rng(seed)
    maps, _ = random_family(2, 2, rng)
    x = rng.normal(size=2) + 1j * rng.normal(size=2)
    sample = simulate_orbit(maps, x, budget, escape_radius=np.inf)
    lifts = [phi(f).entries for f in maps]
    for w, pt in zip(sample.words, sample.points):
        M = np.eye(3, dtype=complex)
        for L, e in zip(lifts, w):
            M = M @ np.linalg.matrix_power(L, int(e))
        lifted = M @ np.concatenate([[1], x])
        assert abs(lifted[0] - 1) < 1e-12
        assert np.allclose(lifted[1:], pt[0], rtol=1e-9, atol=1e-9)


@SETTINGS
@given(st.integers(0, 10**6), st.integers(0, 40))
def test_coverage_non_decreasing_in_budget(seed, budget):
    rng = np.random.default_rng(seed)
    maps = [AffineMap(np.array([[np.exp(complex(rng.normal(0, 0.1), rng.uniform(-3, 3)))]]), np.zeros(1))
            for _ in range(2)]
    x = [0.5]
    a = coverage_report(simulate_orbit(maps, x, budget), epsilon=0.1).coverage
    b = coverage_report(simulate_orbit(maps, x, budget + 1), epsilon=0.1).coverage
    assert b >= a


@SETTINGS
@given(st.lists(st.tuples(floats, floats), min_size=1, max_size=80), st.sampled_from([0.05, 0.1, 0.25]))
def test_coverage_non_decreasing_when_epsilon_doubles(pts, eps):
    pts = np.array(pts, dtype=float)
    fine = coverage_report(pts, epsilon=eps).coverage
    coarse = coverage_report(pts, epsilon=2 * eps).coverage
    assert coarse >= fine


def _unimodular(m, rng):
    U = np.eye(m, dtype=np.int64)
    for _ in range(3 * m):
        i, j = rng.choice(m, 2, replace=False)
        U[i] += int(rng.integers(-2, 3)) * U[j]
    return U


@SETTINGS
@given(st.integers(0, 10**6))
def test_verdict_invariant_under_recombination(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(3, 6))
    base = list(rng.integers(-3, 4, size=m) + 1j * rng.integers(-3, 4, size=m))
    if rng.integers(2):
        base[-1] = np.sqrt(2) + 1j * np.sqrt(3)
    u = np.array(base, dtype=complex)
    U = _unimodular(m, rng)
    mixed = U.T @ u
    perm = rng.permutation(m)
    v0 = group_rank_density(from_vectors(list(u)))
    v1 = group_rank_density(from_vectors(list(mixed)))
    v2 = group_rank_density(from_vectors(list(u[perm])))
    assert v0.status == v1.status == v2.status
    for v, vecs in ((v1, mixed), (v2, u[perm])):
        if v.witness is not None:
            assert relation_is_sound(realify(from_vectors(list(vecs))), v.witness)


@SETTINGS
@given(st.lists(complexes, min_size=1, max_size=6))
def test_float_density_never_claims_dense(u):
    v = group_rank_density(from_vectors(u))
    assert v.status in ("NotDense", INCONCLUSIVE)
    if v.witness is not None:
        assert relation_is_sound(realify(from_vectors(u)), v.witness)


def test_witness_permutes_with_generators():
    u = np.array([1, 1j, 1 + 1j])
    for perm in itertools.permutations(range(3)):
        v = group_rank_density(from_vectors(list(u[list(perm)])))
        assert v.status == "NotDense"
        s = np.array(v.witness)
        M = realify(from_vectors(list(u[list(perm)])))
        assert relation_is_sound(M, s)
