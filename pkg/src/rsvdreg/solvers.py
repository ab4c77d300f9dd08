"""Regularized solvers for discrete linear inverse problems.

Three families, each in a direct flavor and randomized flavors:

* truncated SVD: exact (``tsvd_solve``), randomized projected
  (``trsvd_solve_projected``) and randomized range-preserving
  (``trsvd_solve_range``);
* Tikhonov: direct (``tikhonov_solve_direct``), projected
  (``rsvd_tikhonov_projected``) and range-preserving
  (``rsvd_tikhonov_range``);
* general Tikhonov with a smoothness penalty: direct
  (``gen_tikhonov_direct``), projected (``rsvd_gen_tikhonov_projected``)
  and range-preserving (``rsvd_gen_tikhonov_range``).

The range-preserving flavors keep the solution inside ``range(A.T)``
(resp. ``range(Gamma A.T)``) by construction: they only consume the left
factors ``(U, sigma)`` of the randomized SVD and touch the data space
through a single product with ``A.T``.  Their spectral filter is the sum
``sum_i (u_i, b) / (sigma_i^2 + alpha) u_i`` over the captured modes; the
component of ``b`` orthogonal to the captured range is dropped rather than
amplified by ``1/alpha``, which is also what makes the ``alpha -> 0``
limit recover the truncated solver.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import (
    as_matrix,
    as_vector,
    default_pinv_rtol,
    solve_shifted_gram,
    solve_spd,
)
from .smoothing import weighted_pinv

METHODS = (
    "tsvd",
    "trsvd_proj",
    "trsvd_range",
    "tikh_direct",
    "tikh_proj",
    "tikh_range",
    "gtikh_direct",
    "gtikh_proj",
    "gtikh_range",
)


@dataclass(frozen=True)
class SolverResult:
    """Solution vector plus the knobs that produced it."""

    x: np.ndarray
    method: str
    alpha: float | None
    k: int | None
    wall_time: float


def _result(x, method, alpha, k, t0):
    return SolverResult(x, method, alpha, k, time.perf_counter() - t0)


def _check_positive_spectrum(sigma, what):
    zero = np.flatnonzero(np.asarray(sigma) <= 0.0)
    if zero.size:
        raise ValueError(f"{what} requires positive singular values, but "
                         f"sigma[{zero[0]}] = {sigma[zero[0]]}")


def tsvd_solve(svd, k, b):
    """Truncated SVD solution ``sum_{i<=k} (u_i, b)/sigma_i * v_i``.

    ``k`` must not exceed the numerical rank of the factored matrix.
    """
    b = as_vector(b)
    t0 = time.perf_counter()
    sigma = svd.sigma
    cutoff = default_pinv_rtol((svd.U.shape[0], svd.V.shape[0])) * sigma[0]
    rank = int(np.sum(sigma > cutoff))
    if k > rank:
        raise ValueError(
            f"truncation level k={k} exceeds numerical rank {rank} "
            f"(sigma_k would be {sigma[k - 1] if k <= sigma.size else 0.0:.3e}, "
            f"cutoff {cutoff:.3e})"
        )
    coeff = (svd.U[:, :k].T @ b) / sigma[:k]
    return _result(svd.V[:, :k] @ coeff, "tsvd", None, k, t0)


def trsvd_solve_projected(approx, b):
    """Truncated randomized SVD in the projected form
    ``V diag(1/sigma) U.T b``."""
    b = as_vector(b)
    t0 = time.perf_counter()
    _check_positive_spectrum(approx.sigma, "trsvd_solve_projected")
    coeff = (approx.U.T @ b) / approx.sigma
    return _result(approx.V @ coeff, "trsvd_proj", None, approx.k, t0)


def trsvd_solve_range(A, approx, b):
    """Range-preserving truncated randomized SVD:
    ``A.T @ sum_i (u_i, b)/sigma_i^2 u_i``.

    Only needs the left factors plus one product with ``A.T``; the result
    lies in ``range(A.T)`` by construction.
    """
    b = as_vector(b)
    t0 = time.perf_counter()
    _check_positive_spectrum(approx.sigma, "trsvd_solve_range")
    x = A.T @ solve_shifted_gram(approx.U, approx.sigma, 0.0, b)
    return _result(x, "trsvd_range", None, approx.k, t0)


def tikhonov_solve_direct(A, b, alpha):
    """Classical Tikhonov solution of ``(A.T A + alpha I) x = A.T b``.

    Uses the data-space (dual) form ``A.T (A A.T + alpha I)^-1 b`` when
    rows <= cols and the parameter-space (primal) normal equations
    otherwise; the two agree to rounding.
    """
    A = as_matrix(A)
    b = as_vector(b)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t0 = time.perf_counter()
    n, m = A.shape
    if n <= m:
        M = A @ A.T
        M[np.diag_indices_from(M)] += alpha
        x = A.T @ solve_spd(M, b, "shifted Gram matrix")
    else:
        M = A.T @ A
        M[np.diag_indices_from(M)] += alpha
        x = solve_spd(M, A.T @ b, "regularized normal equations")
    return _result(x, "tikh_direct", alpha, None, t0)


def rsvd_tikhonov_projected(approx, b, alpha):
    """Projected randomized Tikhonov
    ``(A_k.T A_k + alpha I)^-1 A_k.T b`` computed in factor space."""
    b = as_vector(b)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t0 = time.perf_counter()
    coeff = approx.sigma * (approx.U.T @ b) / (approx.sigma**2 + alpha)
    return _result(approx.V @ coeff, "tikh_proj", alpha, approx.k, t0)


def rsvd_tikhonov_range(A, approx, b, alpha):
    """Range-preserving randomized Tikhonov
    ``A.T @ sum_i (u_i, b)/(sigma_i^2 + alpha) u_i``.

    Cost after the factorization is one product with ``A.T`` plus O(nk).
    """
    b = as_vector(b)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t0 = time.perf_counter()
    x = A.T @ solve_shifted_gram(approx.U, approx.sigma, alpha, b)
    return _result(x, "tikh_range", alpha, approx.k, t0)


def _ensure_bundle(A, L, bundle):
    return weighted_pinv(A, L) if bundle is None else bundle


def gen_tikhonov_direct(A, L, b, alpha, bundle=None):
    """General-penalty Tikhonov minimizer of
    ``||A x - b||^2 + alpha ||L x||^2``.

    Solved through the standard-form reduction: with ``B = A @ L_sharp``
    and ``Gamma = L_sharp L_sharp.T``,

        ``x = Gamma A.T (B B.T + alpha I)^-1 b + W (A W)^+ b``,

    where the second term resolves the penalty's null-space component
    exactly.  Agrees with a dense solve of the regularized normal
    equations ``(A.T A + alpha L.T L) x = A.T b``.
    """
    A = as_matrix(A)
    b = as_vector(b)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    bundle = _ensure_bundle(A, L, bundle)
    t0 = time.perf_counter()
    B = A @ bundle.L_sharp
    M = B @ B.T
    M[np.diag_indices_from(M)] += alpha
    xi = solve_spd(M, b, "shifted dual Gram matrix")
    x = bundle.sharp_apply(B.T @ xi) + bundle.w_term(b)
    return _result(x, "gtikh_direct", alpha, None, t0)


def rsvd_gen_tikhonov_projected(approx_A, L, b, alpha):
    """Projected comparison variant built from a randomized SVD of ``A``
    alone: restricts the solution to the captured right subspace and
    projects the penalty into it, solving the k-by-k system

        ``(diag(sigma^2) + alpha (L V_k).T (L V_k)) z = diag(sigma) U_k.T b``

    with ``x = V_k z``.  Cheap (everything happens in the reduced space)
    and identical to the projected standard solver when ``L`` is the
    identity, but the probed subspace is adapted to ``A`` only, so nothing
    preserves the structure the penalty imposes on the minimizer; that is
    precisely the failure mode the range-preserving variant avoids.
    """
    b = as_vector(b)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t0 = time.perf_counter()
    LV = L.apply(approx_A.V)
    M = alpha * (LV.T @ LV)
    M[np.diag_indices_from(M)] += approx_A.sigma**2
    rhs = approx_A.sigma * (approx_A.U.T @ b)
    try:
        z = scipy.linalg.solve(M, rhs, assume_a="pos")
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"projected general Tikhonov system of shape {M.shape} is "
            f"singular: {exc}"
        ) from exc
    return _result(approx_A.V @ z, "gtikh_proj", alpha, approx_A.k, t0)


def rsvd_gen_tikhonov_range(A, L, approx_B, b, alpha, bundle=None):
    """Range-preserving randomized general Tikhonov.

    ``approx_B`` must factor ``B = A @ L_sharp`` (see
    :func:`rsvdreg.smoothing.form_B`).  The smooth component is
    ``Gamma A.T @ sum_i (u_i, b)/(sigma_i^2 + alpha) u_i`` and the
    null-space term ``W (A W)^+ b`` is added exactly.
    """
    A = as_matrix(A)
    b = as_vector(b)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    bundle = _ensure_bundle(A, L, bundle)
    t0 = time.perf_counter()
    v = solve_shifted_gram(approx_B.U, approx_B.sigma, alpha, b)
    x = bundle.gamma_apply(A.T @ v) + bundle.w_term(b)
    return _result(x, "gtikh_range", alpha, approx_B.k, t0)
