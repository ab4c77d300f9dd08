import numpy as np
import pytest

from rsvdreg.linalg import pinv
from rsvdreg.smoothing import (
    ProductOperator,
    SmoothingOperator,
    custom,
    first_difference,
    form_B,
    identity,
    l_pinv_apply,
    null_basis,
    second_difference,
    weighted_pinv,
)
from rsvdreg.solvers import gen_tikhonov_direct


class TestOperators:
    def test_first_difference_matrix(self):
        L = first_difference(4).matrix()
        assert L.shape == (3, 4)
        assert np.allclose(L @ np.ones(4), 0)
        assert np.allclose(L, [[-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1]])

    def test_second_difference_annihilates_linear(self):
        L = second_difference(6)
        ramp = np.arange(6, dtype=float)
        assert np.allclose(L.apply(np.ones(6)), 0)
        assert np.allclose(L.apply(ramp), 0)
        assert L.shape == (4, 6)

    def test_apply_matches_matrix(self, rng):
        for L in (first_difference(9), second_difference(9)):
            x = rng.standard_normal(9)
            assert np.allclose(L.apply(x), L.matrix() @ x)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown penalty kind"):
            SmoothingOperator("third_difference", 5)


class TestNullBasis:
    def test_first_difference(self):
        W = null_basis(first_difference(4))
        assert np.allclose(W, np.full((4, 1), 0.5))

    def test_identity_empty(self):
        assert null_basis(identity(3)).shape == (3, 0)

    def test_second_difference_vs_svd_oracle(self):
        L = second_difference(5)
        W = null_basis(L)
        assert np.linalg.norm(L.matrix() @ W, 2) <= 1e-12
        assert np.allclose(W.T @ W, np.eye(2), atol=1e-12)
        # cross-check dimension against the SVD null space
        s = np.linalg.svd(L.matrix(), compute_uv=False)
        assert np.sum(s > 1e-10) == 3

    def test_custom_kernel_via_svd(self):
        M = np.array([[1.0, -1.0, 0.0], [2.0, -2.0, 0.0]])
        W = null_basis(custom(M))
        assert W.shape == (3, 2)
        assert np.linalg.norm(M @ W, 2) <= 1e-12


class TestStructuredPinv:
    def test_identity(self, rng):
        y = rng.standard_normal(5)
        assert np.allclose(l_pinv_apply(identity(5), y), y)

    def test_right_inverse_first_difference(self, rng):
        L = first_difference(8)
        y = rng.standard_normal(7)
        assert np.allclose(L.apply(L.pinv_apply(y)), y, atol=1e-12)

    @pytest.mark.parametrize("make", [first_difference, second_difference])
    def test_matches_dense_pinv(self, rng, make):
        L = make(20)
        y = rng.standard_normal(L.ell)
        dense = pinv(L.matrix()) @ y
        assert np.linalg.norm(L.pinv_apply(y) - dense) <= 1e-10

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="leading dimension"):
            first_difference(5).pinv_apply(np.ones(5))


class TestWeightedPinv:
    def test_identity_bundle(self, rng):
        A = rng.standard_normal((6, 4))
        bundle = weighted_pinv(A, identity(4))
        assert bundle.null_dim == 0
        assert np.allclose(bundle.L_sharp, np.eye(4))

    def test_square_invertible_custom(self, rng):
        M = np.eye(5) + 0.3 * np.diag(np.ones(4), -1)
        A = rng.standard_normal((7, 5))
        bundle = weighted_pinv(A, custom(M))
        assert np.linalg.norm(bundle.L_sharp - np.linalg.inv(M), 2) <= 1e-10

    def test_oblique_orthogonality(self, rng):
        # The weighted pseudoinverse makes range(A L_sharp) orthogonal to
        # range(A W).
        A = rng.standard_normal((9, 7))
        bundle = weighted_pinv(A, first_difference(7))
        ALs = A @ bundle.L_sharp
        AW = A @ bundle.W
        assert np.linalg.norm(ALs.T @ AW, 2) <= 1e-8 * np.linalg.norm(A, 2) ** 2

    def test_overlapping_null_spaces_rejected(self, rng):
        # A annihilates constants, and so does the first difference.
        A = rng.standard_normal((6, 5))
        A -= A.mean(axis=1, keepdims=True)
        with pytest.raises(ValueError, match="uniqueness"):
            weighted_pinv(A, first_difference(5))

    def test_gamma_symmetry(self, rng):
        A = rng.standard_normal((8, 6))
        bundle = weighted_pinv(A, first_difference(6))
        u, v = rng.standard_normal(6), rng.standard_normal(6)
        assert bundle.gamma_apply(u) @ v == pytest.approx(
            u @ bundle.gamma_apply(v), rel=1e-10)

    def test_solution_decomposition_matches_direct(self, rng):
        # x = L_sharp xi + W (A W)^+ b reproduces the dense minimizer.
        A = rng.standard_normal((10, 8))
        b = rng.standard_normal(10)
        L = first_difference(8)
        bundle = weighted_pinv(A, L)
        alpha = 0.37
        x_direct = gen_tikhonov_direct(A, L, b, alpha, bundle).x
        ALs = A @ bundle.L_sharp
        xi = np.linalg.solve(ALs.T @ ALs + alpha * np.eye(L.ell), ALs.T @ b)
        x_split = bundle.L_sharp @ xi + bundle.w_term(b)
        assert np.linalg.norm(x_split - x_direct) <= 1e-8 * np.linalg.norm(x_direct)


class TestFormB:
    def test_identity_returns_matrix(self, rng):
        A = rng.standard_normal((5, 4))
        assert form_B(A, weighted_pinv(A, identity(4))) is A

    def test_handle_matches_materialized(self, rng):
        A = rng.standard_normal((7, 6))
        bundle = weighted_pinv(A, first_difference(6))
        B = form_B(A, bundle)
        assert isinstance(B, ProductOperator)
        assert B.shape == (7, 5)
        X = rng.standard_normal((5, 3))
        assert np.linalg.norm(B @ X - B.toarray() @ X, 2) <= 1e-10
        assert np.allclose(B.T.toarray(), B.toarray().T)

    def test_adjoint_consistency(self, rng):
        A = rng.standard_normal((7, 6))
        B = form_B(A, weighted_pinv(A, first_difference(6)))
        x, y = rng.standard_normal(5), rng.standard_normal(7)
        assert (B @ x) @ y == pytest.approx(x @ (B.T @ y), rel=1e-10)
