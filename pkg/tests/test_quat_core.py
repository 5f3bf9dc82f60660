import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swmoment.quat_core import (
    ImQuat,
    Quat,
    ad_invariance_residual,
    bracket,
    jacobi_residual,
    left_matrix,
    quat_conj,
    quat_mul,
    quat_norm,
    right_matrix,
    su_basis,
    trivial_alg,
    u_basis,
)

finite = st.floats(-10, 10, allow_nan=False)
quats = arrays(np.float64, 4, elements=finite)

ONE, I, J, K = (Quat(*e) for e in np.eye(4))


def test_multiplication_table():
    assert I * J == K and J * K == I and K * I == J
    assert J * I == Quat(0, 0, 0, -1.0)
    for u in (I, J, K):
        assert u * u == Quat(-1.0, 0, 0, 0)
    assert quat_mul(quat_mul(I, J), K) == Quat(-1.0, 0, 0, 0)


def test_quat_helpers():
    q = Quat(1, 2, 3, 4)
    assert q.conj() == Quat(1, -2, -3, -4)
    assert q.norm() == pytest.approx(np.sqrt(30))
    assert Quat.imag(1, 2, 3) == ImQuat(1, 2, 3).to_quat()


@given(quats, quats)
def test_norm_is_multiplicative(a, b):
    assert quat_norm(quat_mul(a, b)) == pytest.approx(quat_norm(a) * quat_norm(b), rel=1e-12, abs=1e-9)


@given(quats, quats)
def test_conjugation_reverses_products(a, b):
    np.testing.assert_allclose(quat_conj(quat_mul(a, b)), quat_mul(quat_conj(b), quat_conj(a)), atol=1e-9)


@given(quats, quats, quats)
def test_associativity(a, b, c):
    lhs = quat_mul(quat_mul(a, b), c)
    rhs = quat_mul(a, quat_mul(b, c))
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(lhs).max()))


@given(quats, quats)
def test_left_right_matrices(q, p):
    np.testing.assert_allclose(left_matrix(q) @ p, quat_mul(q, p), atol=1e-9)
    np.testing.assert_allclose(right_matrix(q) @ p, quat_mul(p, q), atol=1e-9)
    # left and right multiplications commute
    np.testing.assert_allclose(left_matrix(q) @ right_matrix(p), right_matrix(p) @ left_matrix(q), atol=1e-9)


def test_batched_product(rng):
    a, b = rng.standard_normal((2, 50, 4))
    ref = np.array([quat_mul(x, y) for x, y in zip(a, b)])
    np.testing.assert_allclose(quat_mul(a, b), ref)


def test_su2_tau_basis():
    g = su_basis(2)
    assert g.dim == 3 and g.matrix_size == 2
    # [tau_0, tau_1] = 2 tau_2 and cyclic
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        np.testing.assert_allclose(bracket(g, np.eye(3)[a], np.eye(3)[b]), 2 * np.eye(3)[c], atol=1e-14)
    m = g.basis
    np.testing.assert_allclose(m[0] @ m[0], -np.eye(2), atol=1e-14)


@pytest.mark.parametrize("k,dim", [(1, 1), (2, 3), (3, 8)])
def test_su_dims(k, dim):
    assert su_basis(k).dim == dim


@pytest.mark.parametrize("k", [1, 2, 3])
def test_u_basis_centre_last(k):
    g = u_basis(k)
    assert g.dim == k * k
    np.testing.assert_allclose(g.basis[-1], 1j * np.eye(k) / np.sqrt(k), atol=1e-14)
    # the centre brackets to zero with everything
    assert np.abs(g.structure_constants[-1]).max() < 1e-14


@pytest.mark.parametrize("alg", [su_basis(2), su_basis(3), u_basis(2), u_basis(3)], ids=repr)
def test_matrix_round_trip(alg, rng):
    x = rng.standard_normal((20, alg.dim))
    np.testing.assert_allclose(alg.from_matrix(alg.to_matrix(x)), x, atol=1e-13)
    # bracket agrees with the matrix commutator
    y = rng.standard_normal((20, alg.dim))
    X, Y = alg.to_matrix(x), alg.to_matrix(y)
    np.testing.assert_allclose(alg.to_matrix(bracket(alg, x, y)), X @ Y - Y @ X, atol=1e-12)
    np.testing.assert_allclose(alg.ad(x[0]) @ y[0], bracket(alg, x[0], y[0]), atol=1e-13)


@pytest.mark.parametrize("alg", [su_basis(1), su_basis(2), su_basis(3), u_basis(2), u_basis(3)], ids=repr)
def test_jacobi_and_invariance_10k(alg, rng):
    x, y, z = rng.standard_normal((3, 10_000, alg.dim))
    assert jacobi_residual(alg, x, y, z).max() <= 1e-12
    assert ad_invariance_residual(alg, x, y, z).max() <= 1e-12


def test_trivial_alg():
    g = trivial_alg()
    assert g.dim == 0 and g.matrix_size == 0


def test_bracket_shape_errors():
    with pytest.raises(ValueError):
        bracket(su_basis(2), np.ones(2), np.ones(3))
    with pytest.raises(ValueError):
        su_basis(0)
