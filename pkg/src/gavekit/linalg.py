"""Factorizations and iterative estimators on sparse matrices.

Everything here is deterministic: power iterations start from a fixed
alternating-sign vector, and the LU pivoting strategy is pinned (row
partial pivoting with threshold 1.0), so repeated runs produce identical
results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .errors import (
    ConvergenceFailure,
    DimensionError,
    NumericsError,
    ParameterError,
    SingularMatrixError,
)
from .sparse import as_vector, spmv, spmv_transpose

__all__ = [
    "Factorization",
    "lu_factorize",
    "LsqrOutcome",
    "lsqr",
    "spectral_norm",
    "min_singular_value",
    "symmetric_eig_extremes",
    "skew_spectral_radius",
]

# Pivots smaller than this times the infinity norm count as singular.
_PIVOT_TOL = 1e-14

# Relative improvement below which an LSQR iteration counts as stalled,
# and the number of consecutive stalled iterations that stop the solve.
_LSQR_STALL_RTOL = 1e-14
_LSQR_STALL_LIMIT = 20


class Factorization:
    """Sparse LU decomposition reusable across right-hand sides.

    Wraps a SuperLU factorization with partial pivoting; solves with the
    original matrix or its transpose.
    """

    __slots__ = ("_splu", "n")

    def __init__(self, splu_obj, n):
        self._splu = splu_obj
        self.n = n

    def solve(self, rhs, transpose=False):
        rhs = as_vector(rhs, self.n, "rhs")
        return self._splu.solve(rhs, trans="T" if transpose else "N")


def lu_factorize(A):
    """Factor a square sparse matrix with row partial pivoting.

    Raises
    ------
    SingularMatrixError
        If the matrix is structurally singular or a pivot falls below
        ``1e-14 * norm_inf(A)``.
    """
    if not A.is_square:
        raise DimensionError("lu_factorize requires a square matrix")
    norm_inf = A.inf_norm()
    if norm_inf == 0.0:
        raise SingularMatrixError("matrix has no nonzero entries")
    csc = A.to_scipy().tocsc()
    try:
        lu = scipy.sparse.linalg.splu(csc, diag_pivot_thresh=1.0)
    except RuntimeError as exc:
        raise SingularMatrixError(f"LU factorization failed: {exc}") from exc
    u_diag = np.abs(lu.U.diagonal())
    if u_diag.size and u_diag.min() < _PIVOT_TOL * norm_inf:
        raise SingularMatrixError(
            f"numerically singular: pivot {u_diag.min():.3e} below "
            f"{_PIVOT_TOL:.0e} * {norm_inf:.3e}"
        )
    return Factorization(lu, A.n_rows)


@dataclass(frozen=True)
class LsqrOutcome:
    """Result of an :func:`lsqr` run.

    ``residual_norm`` is always ``norm(A @ x - rhs)`` recomputed from the
    returned iterate, not the recurrence estimate.
    """

    x: np.ndarray
    residual_norm: float
    iterations: int
    stop_reason: str  # "target_met" | "max_iter" | "stagnation"


def lsqr(A, rhs, target_residual, max_iter, warm_start=None):
    """Golub-Kahan bidiagonalization least-squares solver.

    Iterates until ``norm(A @ x - rhs) <= target_residual``, the iteration
    budget is exhausted, or the residual estimate stalls (no relative
    improvement of 1e-14 over 20 consecutive iterations).

    Parameters
    ----------
    A : SparseMatrix
        System matrix, square or rectangular.
    rhs : array
        Right-hand side, length ``A.n_rows``.
    target_residual : float
        Absolute residual norm to reach; 0 means "as far as possible".
    max_iter : int
        Iteration budget.
    warm_start : array, optional
        Initial iterate; the solver works on the shifted system
        ``A d = rhs - A @ warm_start`` and returns ``warm_start + d``.

    Returns
    -------
    LsqrOutcome
        Hitting ``max_iter`` is reported in ``stop_reason``, not raised.
    """
    if target_residual < 0:
        raise ParameterError("target_residual must be nonnegative")
    if max_iter < 0:
        raise ParameterError("max_iter must be nonnegative")
    rhs = as_vector(rhs, A.n_rows, "rhs")
    n = A.n_cols
    if warm_start is None:
        x0 = np.zeros(n)
        u = rhs.copy()
    else:
        x0 = as_vector(warm_start, n, "warm_start").copy()
        u = rhs - spmv(A, x0)
    if not np.all(np.isfinite(u)):
        raise NumericsError("non-finite values in lsqr inputs")

    def _finish(d, iterations, reached_estimate):
        x = x0 + d
        actual = float(np.linalg.norm(spmv(A, x) - rhs))
        if actual <= target_residual:
            reason = "target_met"
        else:
            reason = reached_estimate
        return LsqrOutcome(x, actual, iterations, reason)

    beta = float(np.linalg.norm(u))
    if beta <= target_residual:
        return LsqrOutcome(x0, beta, 0, "target_met")
    if max_iter == 0:
        return LsqrOutcome(x0, beta, 0, "max_iter")
    u = u / beta
    v = spmv_transpose(A, u)
    alpha = float(np.linalg.norm(v))
    if alpha == 0.0:
        # rhs orthogonal to the range: x0 is already least-squares optimal
        return LsqrOutcome(x0, beta, 0, "stagnation")
    v = v / alpha
    w = v.copy()
    d = np.zeros(n)
    phibar, rhobar = beta, alpha
    est_best = beta
    est_stalled = 0
    recheck_below = np.inf
    # once the estimate claims progress below what float64 can represent for
    # this system, only the recomputed residual can certify further progress
    floor = np.finfo(float).eps * max(beta, float(np.linalg.norm(rhs)))
    true_best = beta
    true_stalled = 0
    for it in range(1, max_iter + 1):
        u = spmv(A, v) - alpha * u
        beta = float(np.linalg.norm(u))
        if beta > 0.0:
            u /= beta
        v = spmv_transpose(A, u) - beta * v
        alpha = float(np.linalg.norm(v))
        if alpha > 0.0:
            v /= alpha
        rho = float(np.hypot(rhobar, beta))
        if rho == 0.0:
            # Krylov breakdown: the recurrence cannot move further
            return _finish(d, it, "stagnation")
        c, s = rhobar / rho, beta / rho
        theta = s * alpha
        rhobar = -c * alpha
        phi = c * phibar
        phibar = s * phibar
        d += (phi / rho) * w
        w = v - (theta / rho) * w
        if not np.isfinite(phibar) or not np.isfinite(alpha):
            raise NumericsError(f"non-finite lsqr recurrence at iteration {it}")
        if phibar <= target_residual and phibar <= recheck_below:
            out = _finish(d, it, None)
            if out.stop_reason == "target_met":
                return out
            # estimate was optimistic; demand real progress before retrying
            recheck_below = phibar * 0.9
        if phibar < est_best * (1.0 - _LSQR_STALL_RTOL):
            est_best = phibar
            est_stalled = 0
        else:
            est_stalled += 1
            if est_stalled >= _LSQR_STALL_LIMIT:
                return _finish(d, it, "stagnation")
        if phibar <= floor:
            actual = float(np.linalg.norm(spmv(A, x0 + d) - rhs))
            if actual <= target_residual:
                return LsqrOutcome(x0 + d, actual, it, "target_met")
            if actual < true_best * (1.0 - _LSQR_STALL_RTOL):
                true_best = actual
                true_stalled = 0
            else:
                true_stalled += 1
                if true_stalled >= _LSQR_STALL_LIMIT:
                    return LsqrOutcome(x0 + d, actual, it, "stagnation")
    return _finish(d, max_iter, "max_iter")


def _start_vector(n):
    """Deterministic alternating-sign start vector, unit norm."""
    v = np.ones(n)
    v[1::2] = -1.0
    return v / np.linalg.norm(v)


def _perturbed_start(n):
    """Fallback start when the alternating vector lies in a null direction."""
    v = _start_vector(n) + 0.5 * (np.arange(1, n + 1) / n)
    return v / np.linalg.norm(v)


def spectral_norm(A, rel_tol=1e-8, max_iter=10000):
    """Largest singular value by power iteration on ``A.T @ A``.

    Convergence is declared once the squared-norm Rayleigh quotient changes
    by less than ``rel_tol`` (relatively) over 3 consecutive iterations.

    Raises
    ------
    ConvergenceFailure
        If the budget runs out; the best estimate rides along on the
        exception.
    """
    if rel_tol <= 0:
        raise ParameterError("rel_tol must be positive")
    if A.nnz == 0 or A.max_abs() == 0.0:
        return 0.0
    v = _start_vector(A.n_cols)
    if np.linalg.norm(spmv(A, v)) == 0.0:
        v = _perturbed_start(A.n_cols)
    s2_prev = None
    streak = 0
    s2 = 0.0
    restarted = False
    for _ in range(max_iter):
        w = spmv(A, v)
        s2 = float(w @ w)
        if not np.isfinite(s2):
            raise NumericsError("non-finite value in power iteration")
        if s2 == 0.0:
            # iterate fell into the null space; restart once, else give up
            if not restarted:
                restarted = True
                v = _perturbed_start(A.n_cols)
                s2_prev, streak = None, 0
                continue
            return 0.0
        t = spmv_transpose(A, w)
        nt = float(np.linalg.norm(t))
        if nt == 0.0:
            return float(np.sqrt(s2))
        v = t / nt
        if s2_prev is not None and abs(s2 - s2_prev) <= rel_tol * s2:
            streak += 1
            if streak >= 3:
                return float(np.sqrt(s2))
        else:
            streak = 0
        s2_prev = s2
    raise ConvergenceFailure(
        f"spectral_norm did not converge in {max_iter} iterations",
        best_estimate=float(np.sqrt(s2)),
    )


def min_singular_value(A, rel_tol=1e-10, max_iter=10000, dense_cutoff=500):
    """Smallest singular value of a square nonsingular matrix.

    Uses a dense SVD for ``n <= dense_cutoff`` and inverse power iteration
    on ``(A.T A)^{-1}`` through the LU factors otherwise.
    """
    if not A.is_square:
        raise DimensionError("min_singular_value requires a square matrix")
    n = A.n_rows
    if n <= dense_cutoff:
        svals = np.linalg.svd(A.to_dense(), compute_uv=False)
        smin = float(svals[-1]) if svals.size else 0.0
        smax = float(svals[0]) if svals.size else 0.0
        if smin <= _PIVOT_TOL * smax:
            raise SingularMatrixError(
                f"matrix is numerically singular (sigma_min = {smin:.3e})"
            )
        return smin
    factor = lu_factorize(A)  # raises SingularMatrixError when singular
    v = _start_vector(n)
    rho_prev = None
    streak = 0
    rho = 0.0
    for _ in range(max_iter):
        t = factor.solve(v, transpose=True)
        u = factor.solve(t)
        rho = float(v @ u)
        if not np.isfinite(rho):
            raise NumericsError("non-finite value in inverse iteration")
        nu = float(np.linalg.norm(u))
        if nu == 0.0 or rho <= 0.0:
            raise NumericsError("inverse iteration collapsed")
        v = u / nu
        if rho_prev is not None and abs(rho - rho_prev) <= rel_tol * rho:
            streak += 1
            if streak >= 3:
                return float(1.0 / np.sqrt(rho))
        else:
            streak = 0
        rho_prev = rho
    raise ConvergenceFailure(
        f"min_singular_value did not converge in {max_iter} iterations",
        best_estimate=float(1.0 / np.sqrt(rho)),
    )


def _check_symmetry(A, sign, rel_tol, what):
    """Require A.T == sign * A to within rel_tol of the largest entry."""
    if not A.is_square:
        raise DimensionError(f"{what} requires a square matrix")
    from .sparse import sparse_scale, sparse_sub

    defect = sparse_sub(A.transpose(), sparse_scale(sign, A)).max_abs()
    scale = A.max_abs()
    if defect > rel_tol * max(scale, 1e-300):
        kind = "symmetric" if sign > 0 else "antisymmetric"
        raise ParameterError(
            f"matrix is not {kind}: max deviation {defect:.3e} "
            f"exceeds {rel_tol:.0e} * {scale:.3e}"
        )


def _inverse_rayleigh(shifted, rel_tol, max_iter, what):
    """Inverse power iteration; returns the top Rayleigh quotient of the
    inverse of a positive definite matrix."""
    factor = lu_factorize(shifted)
    n = shifted.n_rows
    v = _start_vector(n)
    rho_prev = None
    streak = 0
    rho = 0.0
    for _ in range(max_iter):
        u = factor.solve(v)
        rho = float(v @ u)
        if not np.isfinite(rho):
            raise NumericsError(f"non-finite value in {what}")
        nu = float(np.linalg.norm(u))
        if nu == 0.0 or rho <= 0.0:
            raise NumericsError(f"{what} collapsed")
        v = u / nu
        if rho_prev is not None and abs(rho - rho_prev) <= rel_tol * rho:
            streak += 1
            if streak >= 3:
                return rho
        else:
            streak = 0
        rho_prev = rho
    raise ConvergenceFailure(
        f"{what} did not converge in {max_iter} iterations", best_estimate=rho
    )


def symmetric_eig_extremes(H, rel_tol=1e-11, max_iter=10000, dense_cutoff=500):
    """Extreme eigenvalues ``(lambda_min, lambda_max)`` of a symmetric matrix.

    Symmetry is checked to 1e-12 relative. Small matrices go through a
    dense solver. Larger ones use shifted inverse iteration: with the
    Gershgorin bound g >= spectral radius, ``sigma I - H`` and
    ``H + sigma I`` (sigma just beyond g) are positive definite and their
    inverses expose the extreme eigenvalues with a wide spectral gap.
    """
    _check_symmetry(H, 1.0, 1e-12, "symmetric_eig_extremes")
    n = H.n_rows
    if n <= dense_cutoff:
        eigs = np.linalg.eigvalsh(H.to_dense())
        return float(eigs[0]), float(eigs[-1])
    if H.nnz == 0 or H.max_abs() == 0.0:
        return 0.0, 0.0
    from .sparse import diag_matrix, sparse_scale, sparse_sub

    # per-row Gershgorin interval [lo, hi] containing the whole spectrum
    rows, cols, vals = H.coo_arrays()
    diag = np.zeros(n)
    radius = np.zeros(n)
    on_diag = rows == cols
    diag[rows[on_diag]] = vals[on_diag]
    np.add.at(radius, rows[~on_diag], np.abs(vals[~on_diag]))
    hi = float(np.max(diag + radius))
    lo = float(np.min(diag - radius))
    delta = 1e-9 * max(hi - lo, abs(hi), abs(lo)) + 1e-300

    sigma_hi = hi + delta
    rho_hi = _inverse_rayleigh(
        sparse_sub(diag_matrix(np.full(n, sigma_hi)), H),
        rel_tol,
        max_iter,
        "symmetric_eig_extremes (max)",
    )
    lam_max = sigma_hi - 1.0 / rho_hi
    sigma_lo = lo - delta
    rho_lo = _inverse_rayleigh(
        sparse_sub(H, diag_matrix(np.full(n, sigma_lo))),
        rel_tol,
        max_iter,
        "symmetric_eig_extremes (min)",
    )
    lam_min = sigma_lo + 1.0 / rho_lo
    return float(lam_min), float(lam_max)


def skew_spectral_radius(S, rel_tol=1e-8, max_iter=10000):
    """Largest eigenvalue modulus of an antisymmetric matrix.

    For antisymmetric ``S`` the eigenvalues are purely imaginary and the
    spectral radius equals the spectral norm.
    """
    _check_symmetry(S, -1.0, 1e-12, "skew_spectral_radius")
    return spectral_norm(S, rel_tol=rel_tol, max_iter=max_iter)
