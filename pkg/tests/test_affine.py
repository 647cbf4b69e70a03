from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from affdyn.affine import (
    AffineMap,
    Kind,
    LiftedMatrix,
    block_exp,
    block_log,
    compose,
    phi,
    phi_inv,
    psi,
    psi_inv,
    psi_normalize,
)
from affdyn.shapes import validate_block_shape

I2PI = 2j * np.pi


def test_compose_scalar():
    f = AffineMap(np.array([[2.0]]), np.array([1.0]))
    g = AffineMap(np.array([[3.0]]), np.array([2.0]))
    h = compose(f, g)
    assert h.equals(AffineMap(np.array([[6.0]]), np.array([5.0])))


def test_compose_identity_left():
    g = AffineMap(np.array([[1.0, 2.0], [0.5, -1j]]), np.array([3.0, 1j]))
    assert compose(AffineMap.identity(2), g).equals(g)


def test_compose_exact_stays_exact():
    f = AffineMap.exact([[2]], [1])
    g = AffineMap.exact([[3]], [2])
    h = compose(f, g)
    assert h.is_exact
    assert h.linear[0, 0] == 6 and h.translation[0] == 5


def test_compose_dimension_mismatch():
    with pytest.raises(ValueError):
        compose(AffineMap.identity(1), AffineMap.identity(2))


def test_mixed_backends_rejected():
    with pytest.raises(TypeError):
        compose(AffineMap.exact([[2]], [1]), AffineMap(np.array([[2.0]]), np.array([1.0])))


def test_fraction_entries_are_exact():
    f = AffineMap([[Fraction(1, 2)]], [Fraction(1, 3)])
    assert f.is_exact and f.linear[0, 0] == sp.Rational(1, 2)


def test_float_entries_never_promoted():
    with pytest.raises(TypeError):
        AffineMap.exact([[sp.Float(0.5)]], [0])


def test_phi_layout():
    A = sp.Matrix([[2, 3], [5, 7]])
    f = AffineMap(A, sp.Matrix([11, 13]))
    expected = sp.Matrix([[1, 0, 0], [11, 2, 3], [13, 5, 7]])
    assert phi(f).entries == expected
    assert phi(f).kind is Kind.PHI


def test_phi_identity():
    assert np.array_equal(phi(AffineMap.identity(3)).entries, np.eye(4))


def test_psi_translation():
    f = AffineMap.exact([[0]], [1])
    assert psi(f).entries == sp.Matrix([[0, 0], [1, 0]])


def test_phi_inv_rejects_bad_first_row():
    with pytest.raises(ValueError):
        phi_inv(np.array([[1.0, 0.1], [0.0, 2.0]]))
    with pytest.raises(ValueError):
        psi_inv(np.array([[0.5, 0.0], [0.0, 2.0]]))


def test_lifted_matrix_kind_checked():
    with pytest.raises(ValueError):
        LiftedMatrix(np.array([[0.0, 0.0], [1.0, 1.0]]), Kind.PHI)


def test_exp_nilpotent():
    E = block_exp(sp.Matrix([[0, 0], [1, 0]]), (2,))
    assert sp.Matrix(E) == sp.Matrix([[1, 0], [1, 1]])


def test_exp_two_pi_i_is_identity():
    E = block_exp(I2PI * np.eye(3), (3,))
    assert np.abs(E - np.eye(3)).max() < 1e-12


def test_exp_diag_logs():
    E = block_exp(np.diag([np.log(2), np.log(3)]), (1, 1))
    assert np.allclose(E, np.diag([2, 3]), atol=1e-14)


def test_exp_without_shape_uses_general_exponential():
    M = np.array([[0.0, 1.0], [-1.0, 0.0]])
    E = block_exp(M)
    assert np.allclose(E, [[np.cos(1), np.sin(1)], [-np.sin(1), np.cos(1)]])


def test_log_unipotent():
    L = block_log(sp.Matrix([[1, 0], [1, 1]]), (2,))
    assert sp.Matrix(L) == sp.Matrix([[0, 0], [1, 0]])


def test_log_identity():
    assert np.abs(block_log(np.eye(3), (3,))).max() == 0


def test_log_branch_per_block():
    L = block_log(np.diag([1.0, 2.0]), (1, 1), branch=[0, 1])
    assert np.allclose(L, np.diag([0, np.log(2) + I2PI]))


def test_log_principal_branch_on_negative_axis():
    L = block_log(np.array([[-1.0 + 0j]]), (1,))
    assert L[0, 0] == pytest.approx(1j * np.pi)


def test_log_rejects_wrong_shape():
    with pytest.raises(ValueError):
        block_log(np.diag([1.0, 2.0]), (2,))


def test_log_rejects_singular_block():
    with pytest.raises(ValueError):
        block_log(np.diag([1.0, 0.0]), (1, 1))


def test_exact_log_then_exp():
    A = sp.Matrix([[3, 0, 0], [1, 3, 0], [sp.Rational(1, 2), 2, 3]])
    L = block_log(A, (3,))
    assert sp.simplify(sp.Matrix(block_exp(L, (3,))) - A) == sp.zeros(3, 3)


def test_psi_normalize_examples():
    out = psi_normalize(I2PI * np.eye(2))
    assert np.abs(out.entries).max() == 0
    B = np.array([[0, 0], [1, 0]], dtype=complex)
    assert np.array_equal(psi_normalize(B).entries, B)
    B = np.diag([I2PI, I2PI + np.log(2)])
    assert np.allclose(psi_normalize(B).entries, np.diag([0, np.log(2)]))
    assert np.allclose(block_exp(B, (1, 1)), block_exp(psi_normalize(B).entries, (1, 1)))


def test_psi_normalize_exact():
    B = sp.diag(2 * sp.pi * sp.I, 2 * sp.pi * sp.I + sp.log(2))
    out = psi_normalize(B)
    assert sp.Matrix(out.entries) == sp.diag(0, sp.log(2))


def test_psi_normalize_rejects_non_integer_shift():
    with pytest.raises(ValueError):
        psi_normalize(np.diag([1j, 0]))
    with pytest.raises(ValueError):
        psi_normalize(np.array([[I2PI, 1.0], [0, 0]]))


def test_block_shape_examples():
    mu = 2 + 1j
    assert validate_block_shape(np.array([[mu, 0], [0.3, mu]]), (2,)).ok
    assert not validate_block_shape(np.diag([1.0, 2.0]), (2,)).ok
    M = np.eye(3)
    M[0, 2] = 1e-3
    check = validate_block_shape(M, (3,))
    assert not check.ok and check.residual == pytest.approx(1e-3)
