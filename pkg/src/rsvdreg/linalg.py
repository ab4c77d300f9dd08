"""Dense matrix/vector kernels shared by every solver in the package.

All routines operate on plain float64 ndarrays.  Matrices are validated on
entry (finite entries, sensible shapes) and never mutated, so results are
safe to share across threads.
"""

import warnings

import numpy as np
import scipy.linalg


class RankDeficiencyWarning(UserWarning):
    """Emitted when a factorization detects numerical rank deficiency."""


class SvdTriple:
    """Thin SVD ``A = U @ diag(sigma) @ V.T``.

    Attributes
    ----------
    U : ndarray, shape (n, r)
        Left singular vectors (orthonormal columns).
    sigma : ndarray, shape (r,)
        Singular values, sorted nonincreasingly, ``r = min(n, m)``.
    V : ndarray, shape (m, r)
        Right singular vectors (orthonormal columns).
    """

    __slots__ = ("U", "sigma", "V")

    def __init__(self, U, sigma, V):
        self.U = U
        self.sigma = sigma
        self.V = V

    def __iter__(self):
        return iter((self.U, self.sigma, self.V))

    def truncate(self, k):
        """Return the leading-``k`` factors as a new triple."""
        return SvdTriple(self.U[:, :k], self.sigma[:k], self.V[:, :k])


def as_matrix(A, name="A"):
    """Validate and return ``A`` as a 2-d float64 array with finite entries."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"{name} must be nonempty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def as_vector(b, name="b"):
    """Validate and return ``b`` as a 1-d float64 array with finite entries."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got ndim={b.ndim}")
    if not np.all(np.isfinite(b)):
        raise ValueError(f"{name} contains non-finite entries")
    return b


def svd_full(A):
    """Thin SVD of a dense matrix.

    Parameters
    ----------
    A : ndarray, shape (n, m)

    Returns
    -------
    SvdTriple
        Factors with ``min(n, m)`` singular values sorted nonincreasingly.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the underlying iterative eigensolver fails to converge; the
        message names the matrix shape.
    """
    A = as_matrix(A)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"SVD did not converge for matrix of shape {A.shape} "
            f"within the LAPACK iteration cap"
        ) from exc
    return SvdTriple(U, s, Vt.T)


def jacobi_svd(A, tol=1e-14, max_sweeps=60):
    """One-sided Jacobi SVD, used as an independent cross-check oracle.

    Orthogonalizes the columns of a working copy of ``A`` by plane
    rotations.  Slow (O(m^2 n) per sweep) but simple enough to trust
    independently of the LAPACK path.

    Returns
    -------
    SvdTriple

    Raises
    ------
    RuntimeError
        If the sweep loop does not converge within ``max_sweeps``.
    """
    A = as_matrix(A)
    transposed = A.shape[0] < A.shape[1]
    W = (A.T if transposed else A).copy()
    n, m = W.shape
    V = np.eye(m)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                app = W[:, p] @ W[:, p]
                aqq = W[:, q] @ W[:, q]
                apq = W[:, p] @ W[:, q]
                if abs(apq) <= tol * np.sqrt(app * aqq):
                    continue
                off = max(off, abs(apq))
                zeta = (aqq - app) / (2.0 * apq)
                t = np.sign(zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                rot = np.array([[c, s], [-s, c]])
                W[:, [p, q]] = W[:, [p, q]] @ rot
                V[:, [p, q]] = V[:, [p, q]] @ rot
        if off == 0.0:
            break
    else:
        raise RuntimeError(
            f"one-sided Jacobi SVD did not converge for shape {A.shape} "
            f"within {max_sweeps} sweeps"
        )
    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma)
    sigma = sigma[order]
    W = W[:, order]
    V = V[:, order]
    U = np.zeros_like(W)
    nonzero = sigma > 0
    U[:, nonzero] = W[:, nonzero] / sigma[nonzero]
    if transposed:
        return SvdTriple(V, sigma, U)
    return SvdTriple(U, sigma, V)


def qr_thin(A, warn_deficient=True):
    """Orthonormal basis of the column space via thin Householder QR.

    For full-column-rank input, ``range(Q) == range(A)``.  Rank-deficient
    input still yields orthonormal columns (Householder completes them)
    but triggers a :class:`RankDeficiencyWarning`.

    Parameters
    ----------
    A : ndarray, shape (n, m) with n >= m

    Returns
    -------
    Q : ndarray, shape (n, m)
    """
    A = as_matrix(A)
    n, m = A.shape
    if n < m:
        raise ValueError(f"qr_thin needs rows >= cols, got shape {A.shape}")
    Q, R = np.linalg.qr(A)
    if warn_deficient:
        diag = np.abs(np.diag(R))
        cutoff = max(n, m) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
        if diag.size and diag.min() <= cutoff:
            warnings.warn(
                f"qr_thin: input of shape {A.shape} is numerically "
                f"rank-deficient; basis columns beyond the rank are arbitrary",
                RankDeficiencyWarning,
                stacklevel=2,
            )
    return Q


def default_pinv_rtol(shape):
    """Relative cutoff max(n, m) * eps used to declare singular values zero."""
    return max(shape) * np.finfo(float).eps


def pinv(A, rtol=None):
    """Moore-Penrose pseudoinverse with a relative singular value cutoff.

    Singular values below ``rtol * sigma_1`` are treated as zero.  The
    default ``rtol`` is ``max(n, m) * eps`` (the usual numerical-rank
    convention).
    """
    A = as_matrix(A)
    if rtol is None:
        rtol = default_pinv_rtol(A.shape)
    if not 0.0 < rtol < 1.0:
        raise ValueError(f"rtol must lie in (0, 1), got {rtol}")
    return np.linalg.pinv(A, rcond=rtol)


def spectral_norm(A):
    """Largest singular value of ``A``."""
    A = as_matrix(A)
    return float(np.linalg.norm(A, 2))


def estimate_spectral_norm(A, iterations=30, seed=0):
    """Cheap power-iteration estimate of the spectral norm.

    Used where only a tolerance scale is needed and a full SVD would be
    wasteful.  Underestimates by at most a few percent after ~30 iterations
    on generic matrices.
    """
    n, m = A.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iterations):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        est = np.sqrt(nw)
        v = w / nw
    return float(est)


def solve_shifted_gram(U, sigma, alpha, b):
    """Spectral sum ``sum_i (u_i, b) / (sigma_i^2 + alpha) * u_i``.

    This is the shared kernel of every range-preserving solver: it applies
    the inverse of the shifted Gram matrix ``U diag(sigma^2) U.T + alpha I``
    restricted to ``span(U)``, dropping the orthogonal complement entirely.

    Parameters
    ----------
    U : ndarray, shape (n, k)
        Orthonormal columns.
    sigma : ndarray, shape (k,)
        Nonnegative spectrum associated with the columns of ``U``.
    alpha : float
        Nonnegative shift.  ``alpha == 0`` requires all ``sigma > 0``.
    b : ndarray, shape (n,)

    Returns
    -------
    ndarray, shape (n,)
    """
    U = as_matrix(U, "U") if U.size else np.asarray(U, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    b = as_vector(b)
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    if alpha == 0.0:
        zero = np.flatnonzero(sigma <= 0.0)
        if zero.size:
            raise ValueError(
                f"alpha = 0 requires positive spectrum, but sigma[{zero[0]}] = "
                f"{sigma[zero[0]]}"
            )
    if U.size == 0:
        return np.zeros_like(b)
    coeff = (U.T @ b) / (sigma**2 + alpha)
    return U @ coeff


def solve_spd(M, rhs, name="system"):
    """Solve a symmetric positive definite system, with a clear failure mode."""
    try:
        return scipy.linalg.solve(M, rhs, assume_a="pos")
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"failed to solve SPD {name} of shape {M.shape}: {exc}"
        ) from exc
