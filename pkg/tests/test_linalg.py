import numpy as np
import pytest

from colts.linalg import (
    SingularMatrixError,
    inv_and_inv_sqrt,
    mahalanobis,
    rank1_update,
    weighted_norm,
)


def random_pd(rng, d):
    A = rng.standard_normal((d, d))
    return np.eye(d) + A @ A.T


def test_rank1_update_basis_vector():
    out = rank1_update(np.eye(2), np.array([1.0, 0.0]))
    assert np.array_equal(out, np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_rank1_update_zero_vector():
    out = rank1_update(np.eye(2), np.zeros(2))
    assert np.array_equal(out, np.eye(2))


def test_rank1_update_dimension_mismatch():
    with pytest.raises(ValueError):
        rank1_update(np.eye(2), np.ones(3))


def test_rank1_update_quadratic_form_identity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        d = rng.integers(1, 8)
        V = random_pd(rng, d)
        a = rng.standard_normal(d)
        x = rng.standard_normal(d)
        lhs = x @ rank1_update(V, a) @ x
        rhs = x @ V @ x + (a @ x) ** 2
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_rank1_update_preserves_symmetry_bit_exactly():
    rng = np.random.default_rng(1)
    V = np.eye(5)
    for _ in range(200):
        V = rank1_update(V, rng.standard_normal(5))
    assert np.array_equal(V, V.T)
    assert np.linalg.eigvalsh(V)[0] > 0


def test_inv_and_inv_sqrt_identity():
    V_inv, V_half = inv_and_inv_sqrt(np.eye(3))
    assert np.allclose(V_inv, np.eye(3), atol=1e-14)
    assert np.allclose(V_half, np.eye(3), atol=1e-14)


def test_inv_and_inv_sqrt_diagonal():
    V_inv, V_half = inv_and_inv_sqrt(np.diag([4.0, 9.0]))
    assert np.allclose(V_inv, np.diag([0.25, 1.0 / 9.0]), atol=1e-14)
    assert np.allclose(V_half, np.diag([0.5, 1.0 / 3.0]), atol=1e-14)


def test_inv_sqrt_reconstruction():
    rng = np.random.default_rng(2)
    for _ in range(30):
        V = random_pd(rng, int(rng.integers(1, 10)))
        V_inv, V_half = inv_and_inv_sqrt(V)
        assert np.max(np.abs(V_half @ V @ V_half - np.eye(V.shape[0]))) <= 1e-8
        assert np.max(np.abs(V_half @ V_half - V_inv)) <= 1e-8
        assert np.array_equal(V_half, V_half.T)


def test_inv_rejects_singular():
    with pytest.raises(SingularMatrixError):
        inv_and_inv_sqrt(np.diag([1.0, 0.0]))
    with pytest.raises(SingularMatrixError):
        inv_and_inv_sqrt(np.diag([1.0, -2.0]))


def test_mahalanobis_examples():
    assert mahalanobis(np.array([1.0, 0.0]), np.eye(2)) == pytest.approx(1.0)
    assert mahalanobis(np.zeros(3), np.eye(3)) == 0.0
    got = mahalanobis(np.array([1.0, 1.0]), np.diag([0.25, 1.0 / 9.0]))
    assert got == pytest.approx(0.6009252125773316, abs=1e-12)


def test_mahalanobis_rejects_indefinite():
    with pytest.raises(ValueError):
        mahalanobis(np.array([0.0, 1.0]), np.diag([1.0, -1.0]))


def test_mahalanobis_is_a_norm():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = int(rng.integers(1, 7))
        V_inv, _ = inv_and_inv_sqrt(random_pd(rng, d))
        x = rng.standard_normal(d)
        y = rng.standard_normal(d)
        s = rng.standard_normal()
        tri = mahalanobis(x + y, V_inv) - mahalanobis(x, V_inv) - mahalanobis(y, V_inv)
        assert tri <= 1e-9
        assert abs(mahalanobis(s * x, V_inv) - abs(s) * mahalanobis(x, V_inv)) <= 1e-9


def test_whitened_norm_nonincreasing_under_updates():
    # inversion is monotone decreasing in the PSD order, so adding rank-1
    # terms can only shrink ||a||_{V^-1}
    rng = np.random.default_rng(4)
    V = np.eye(4)
    a = rng.standard_normal(4)
    prev = np.inf
    for _ in range(60):
        V_inv, _ = inv_and_inv_sqrt(V)
        cur = mahalanobis(a, V_inv)
        assert cur <= prev + 1e-12
        prev = cur
        V = rank1_update(V, rng.standard_normal(4))


def test_weighted_norm_matches_mahalanobis_through_inverse():
    rng = np.random.default_rng(5)
    V = random_pd(rng, 5)
    V_inv, _ = inv_and_inv_sqrt(V)
    x = rng.standard_normal(5)
    assert weighted_norm(x, V_inv) == pytest.approx(mahalanobis(x, V_inv), abs=1e-12)
