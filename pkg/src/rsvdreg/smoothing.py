"""Smoothness penalty operators and their structured (pseudo)inverses.

Covers the identity, forward first/second difference matrices (no boundary
rows, so they have a small analytic null space) and arbitrary custom
penalties.  The weighted pseudoinverse machinery reduces a general-penalty
least-squares problem to standard form: the penalty's null-space component
is resolved exactly through ``W (A W)^+ b`` while the smooth component
travels through ``L_sharp = (I - W (A W)^+ A) L^+``.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, estimate_spectral_norm, pinv, svd_full

KINDS = ("identity", "first_difference", "second_difference", "custom")


class SmoothingOperator:
    """Penalty matrix ``L`` with structured apply/solve paths.

    Parameters
    ----------
    kind : str
        One of ``identity``, ``first_difference``, ``second_difference``,
        ``custom``.
    m : int
        Number of columns (solution dimension).
    matrix : ndarray, optional
        Required for ``custom``; ignored otherwise (difference operators
        materialize on demand).
    """

    def __init__(self, kind, m, matrix=None):
        if kind not in KINDS:
            raise ValueError(f"unknown penalty kind {kind!r}, expected one of {KINDS}")
        if m < 3 and kind == "second_difference":
            raise ValueError("second_difference needs m >= 3")
        if m < 2 and kind == "first_difference":
            raise ValueError("first_difference needs m >= 2")
        self.kind = kind
        self.m = int(m)
        if kind == "custom":
            matrix = as_matrix(matrix, "L")
            if matrix.shape[1] != m:
                raise ValueError(
                    f"custom penalty has {matrix.shape[1]} columns, expected {m}"
                )
            self._matrix = matrix
        else:
            self._matrix = None

    @property
    def ell(self):
        """Number of rows of ``L``."""
        if self.kind == "identity":
            return self.m
        if self.kind == "first_difference":
            return self.m - 1
        if self.kind == "second_difference":
            return self.m - 2
        return self._matrix.shape[0]

    @property
    def shape(self):
        return (self.ell, self.m)

    def matrix(self):
        """Materialize ``L`` as a dense array."""
        if self._matrix is not None:
            return self._matrix
        m = self.m
        if self.kind == "identity":
            return np.eye(m)
        if self.kind == "first_difference":
            L = np.zeros((m - 1, m))
            idx = np.arange(m - 1)
            L[idx, idx] = -1.0
            L[idx, idx + 1] = 1.0
            return L
        L = np.zeros((m - 2, m))
        idx = np.arange(m - 2)
        L[idx, idx] = 1.0
        L[idx, idx + 1] = -2.0
        L[idx, idx + 2] = 1.0
        return L

    def apply(self, x):
        """Compute ``L @ x`` (x may be a vector or a stack of columns)."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.m:
            raise ValueError(f"expected leading dimension {self.m}, got {x.shape}")
        if self.kind == "identity":
            return x.copy()
        if self.kind == "first_difference":
            return np.diff(x, axis=0)
        if self.kind == "second_difference":
            return np.diff(x, n=2, axis=0)
        return self._matrix @ x

    def pinv_apply(self, y):
        """Compute ``L^+ @ y`` (minimum-norm solution of ``L x = y``).

        Difference kinds use a cumulative-sum particular solution followed
        by projection out of the null space, which reproduces the SVD
        pseudoinverse to rounding; custom kinds fall back to a dense
        pseudoinverse.
        """
        y = np.asarray(y, dtype=float)
        if y.shape[0] != self.ell:
            raise ValueError(f"expected leading dimension {self.ell}, got {y.shape}")
        squeeze = y.ndim == 1
        Y = y.reshape(self.ell, -1)
        if self.kind == "identity":
            X = Y.copy()
        elif self.kind == "first_difference":
            X = np.vstack([np.zeros((1, Y.shape[1])), np.cumsum(Y, axis=0)])
            X -= X.mean(axis=0, keepdims=True)
        elif self.kind == "second_difference":
            X = np.vstack(
                [np.zeros((2, Y.shape[1])), np.cumsum(np.cumsum(Y, axis=0), axis=0)]
            )
            W = self.null_basis()
            X -= W @ (W.T @ X)
        else:
            X = self._dense_pinv() @ Y
        return X[:, 0] if squeeze else X

    def pinv_matrix(self):
        """Materialize ``L^+`` (m-by-ell)."""
        if self.kind == "custom":
            return self._dense_pinv()
        return self.pinv_apply(np.eye(self.ell))

    def _dense_pinv(self):
        if not hasattr(self, "_pinv_cache"):
            self._pinv_cache = pinv(self._matrix)
        return self._pinv_cache

    def null_basis(self):
        """Orthonormal basis of the null space of ``L`` (m-by-d).

        Analytic for the structured kinds: constants for the first
        difference, constants plus a linear ramp for the second.  The
        identity returns an empty basis; custom penalties fall back to the
        SVD null space at the default rank cutoff.
        """
        m = self.m
        if self.kind == "identity":
            return np.zeros((m, 0))
        if self.kind == "first_difference":
            return np.full((m, 1), 1.0 / np.sqrt(m))
        if self.kind == "second_difference":
            ones = np.full(m, 1.0 / np.sqrt(m))
            ramp = np.arange(m, dtype=float)
            ramp -= ramp.mean()
            ramp /= np.linalg.norm(ramp)
            return np.column_stack([ones, ramp])
        tri = svd_full(self._matrix)
        cutoff = max(self._matrix.shape) * np.finfo(float).eps * tri.sigma[0]
        rank = int(np.sum(tri.sigma > cutoff))
        full_V = np.linalg.svd(self._matrix, full_matrices=True)[2].T
        return full_V[:, rank:]


def identity(m):
    return SmoothingOperator("identity", m)


def first_difference(m):
    return SmoothingOperator("first_difference", m)


def second_difference(m):
    return SmoothingOperator("second_difference", m)


def custom(matrix):
    matrix = as_matrix(matrix, "L")
    return SmoothingOperator("custom", matrix.shape[1], matrix)


def null_basis(L):
    """Orthonormal basis for the null space of the penalty operator."""
    return L.null_basis()


def l_pinv_apply(L, y):
    """Minimum-norm solve ``L^+ y`` through the structured path."""
    return L.pinv_apply(y)


@dataclass(frozen=True)
class WeightedPinvBundle:
    """Precomputed standard-form reduction data for a pair ``(A, L)``.

    Attributes
    ----------
    L : SmoothingOperator
    W : ndarray, shape (m, d)
        Orthonormal null-space basis of ``L``.
    AW_pinv : ndarray, shape (d, n)
        Pseudoinverse of ``A @ W``.
    L_sharp : ndarray, shape (m, ell)
        The A-weighted pseudoinverse ``(I - W (A W)^+ A) L^+``.
    """

    L: SmoothingOperator
    W: np.ndarray
    AW_pinv: np.ndarray
    L_sharp: np.ndarray

    @property
    def null_dim(self):
        return self.W.shape[1]

    def sharp_apply(self, y):
        return self.L_sharp @ y

    def sharp_t_apply(self, x):
        return self.L_sharp.T @ x

    def gamma_apply(self, x):
        """Apply ``Gamma = L_sharp @ L_sharp.T`` (symmetric smoother)."""
        return self.L_sharp @ (self.L_sharp.T @ x)

    def w_term(self, b):
        """Null-space component ``W (A W)^+ b`` of the solution."""
        if self.null_dim == 0:
            return np.zeros(self.W.shape[0])
        return self.W @ (self.AW_pinv @ b)


def weighted_pinv(A, L, norm_estimate=None):
    """Build the standard-form reduction bundle for ``(A, L)``.

    Requires the null spaces of ``A`` and ``L`` to intersect trivially,
    checked as ``sigma_min(A @ W) > 1e-10 * ||A||``; otherwise the penalized
    problem has no unique minimizer and a ``ValueError`` is raised.

    When ``L`` has a trivial null space the bundle degenerates to
    ``L_sharp = L^+``.
    """
    A = as_matrix(A)
    n, m = A.shape
    if m != L.m:
        raise ValueError(f"A has {m} columns but L expects {L.m}")
    W = L.null_basis()
    L_pinv = L.pinv_matrix()
    if W.shape[1] == 0:
        return WeightedPinvBundle(L, W, np.zeros((0, n)), L_pinv)
    AW = A @ W
    sv = np.linalg.svd(AW, compute_uv=False)
    scale = norm_estimate if norm_estimate is not None else estimate_spectral_norm(A)
    if sv.size == 0 or sv[-1] <= 1e-10 * scale:
        raise ValueError(
            "uniqueness assumption violated: N(A) and N(L) intersect "
            f"nontrivially (sigma_min(A @ W) = {0.0 if sv.size == 0 else sv[-1]:.3e} "
            f"<= 1e-10 * ||A|| = {1e-10 * scale:.3e})"
        )
    AW_pinv = pinv(AW)
    AL_pinv = A @ L_pinv
    L_sharp = L_pinv - W @ (AW_pinv @ AL_pinv)
    return WeightedPinvBundle(L, W, AW_pinv, L_sharp)


class ProductOperator:
    """Lazy product ``A @ M`` exposing just enough of the ndarray protocol
    (``shape``, ``@``, ``.T``) for the randomized SVD pipeline."""

    def __init__(self, A, M):
        self.A = A
        self.M = M
        self.shape = (A.shape[0], M.shape[1])

    def __matmul__(self, X):
        return self.A @ (self.M @ X)

    @property
    def T(self):
        return _TransposedProductOperator(self)

    def toarray(self):
        return self.A @ self.M


class _TransposedProductOperator:
    def __init__(self, parent):
        self.parent = parent
        self.shape = (parent.shape[1], parent.shape[0])

    def __matmul__(self, Y):
        return self.parent.M.T @ (self.parent.A.T @ Y)

    @property
    def T(self):
        return self.parent

    def toarray(self):
        return self.parent.toarray().T


def form_B(A, bundle):
    """Operator handle for ``B = A @ L_sharp``.

    Returns ``A`` itself for the identity penalty; otherwise a lazy
    product operator that never materializes ``A @ L_sharp`` (call
    ``.toarray()`` if a dense copy is genuinely needed).
    """
    if bundle.L.kind == "identity":
        return A
    return ProductOperator(A, bundle.L_sharp)
