"""LU factorization, LSQR, and the spectral estimators."""

import numpy as np
import pytest

from gavekit import (
    ConvergenceFailure,
    DimensionError,
    NumericsError,
    ParameterError,
    SingularMatrixError,
    SparseMatrix,
    diag_matrix,
    identity,
    lsqr,
    lu_factorize,
    min_singular_value,
    skew_spectral_radius,
    spectral_norm,
    spmv,
    symmetric_eig_extremes,
    zeros,
)

from conftest import random_dominant, random_sparse, tridiag


class TestLu:
    def test_identity_solve(self):
        f = lu_factorize(identity(4))
        rhs = np.array([1.0, -2.0, 3.0, 0.5])
        np.testing.assert_array_equal(f.solve(rhs), rhs)

    def test_tridiagonal_constructed_solution(self):
        A = tridiag(-1, 4, -1, 30)
        rhs = spmv(A, np.ones(30))
        x = lu_factorize(A).solve(rhs)
        np.testing.assert_allclose(x, np.ones(30), atol=1e-12)

    def test_zero_row_is_singular(self):
        A = SparseMatrix.from_coo(3, 3, [0, 0, 2], [0, 1, 2], [1.0, 2.0, 3.0])
        with pytest.raises(SingularMatrixError):
            lu_factorize(A)

    def test_tiny_pivot_is_singular(self):
        # exactly singular after rounding
        dense = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-16]])
        with pytest.raises(SingularMatrixError):
            lu_factorize(SparseMatrix.from_dense(dense))
        # pivot below 1e-14 * norm_inf trips the threshold check
        dense = np.array([[1.0, 1.0], [1.0, 1.0 + 5e-15]])
        with pytest.raises(SingularMatrixError, match="pivot"):
            lu_factorize(SparseMatrix.from_dense(dense))
        # just above the threshold still factors
        dense = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-13]])
        lu_factorize(SparseMatrix.from_dense(dense))

    def test_requires_square(self):
        with pytest.raises(DimensionError):
            lu_factorize(zeros(2, 3))

    def test_residual_bound_on_dominant_matrices(self, rng):
        for _ in range(10):
            n = int(rng.integers(5, 60))
            A = random_dominant(rng, n)
            b = rng.uniform(-1, 1, n)
            x = lu_factorize(A).solve(b)
            res = np.linalg.norm(spmv(A, x) - b)
            assert res <= 1e-12 * max(1.0, np.linalg.norm(b))

    def test_transpose_solve(self, rng):
        A = random_dominant(rng, 12)
        b = rng.uniform(-1, 1, 12)
        x = lu_factorize(A).solve(b, transpose=True)
        np.testing.assert_allclose(A.to_dense().T @ x, b, atol=1e-11)


class TestLsqr:
    def test_identity_one_iteration(self):
        b = np.array([1.0, 2.0, -3.0])
        out = lsqr(identity(3), b, 0.0, 10)
        assert out.iterations == 1
        assert out.stop_reason == "target_met"
        np.testing.assert_allclose(out.x, b, atol=1e-14)

    def test_slack_target_accepts_zero_vector(self):
        b = np.array([3.0, 4.0])
        out = lsqr(identity(2), b, np.linalg.norm(b), 10, warm_start=np.zeros(2))
        assert out.iterations == 0
        assert out.stop_reason == "target_met"
        np.testing.assert_array_equal(out.x, np.zeros(2))

    def test_matches_lu_solve(self, rng):
        A = random_dominant(rng, 50)
        b = rng.uniform(-1, 1, 50)
        direct = lu_factorize(A).solve(b)
        out = lsqr(A, b, 1e-10, 500)
        assert out.stop_reason == "target_met"
        np.testing.assert_allclose(out.x, direct, atol=1e-8)

    def test_zero_target_runs_to_stagnation(self, rng):
        A = random_dominant(rng, 40)
        b = rng.uniform(-1, 1, 40)
        out = lsqr(A, b, 0.0, 5 * 40)
        direct = lu_factorize(A).solve(b)
        assert out.stop_reason == "stagnation"
        np.testing.assert_allclose(out.x, direct, atol=1e-8)

    def test_residual_norm_is_recomputed(self, rng):
        A = random_dominant(rng, 25)
        b = rng.uniform(-1, 1, 25)
        out = lsqr(A, b, 1e-8, 200)
        actual = np.linalg.norm(spmv(A, out.x) - b)
        assert out.residual_norm == pytest.approx(actual, rel=1e-12)
        assert out.residual_norm <= 1e-8

    def test_max_iter_reported_not_raised(self, rng):
        A = random_dominant(rng, 30)
        b = rng.uniform(-1, 1, 30)
        out = lsqr(A, b, 1e-14, 2)
        assert out.stop_reason == "max_iter"
        assert out.iterations == 2

    def test_warm_start_contract(self, rng):
        A = random_dominant(rng, 20)
        b = rng.uniform(-1, 1, 20)
        w = rng.uniform(-1, 1, 20)
        out = lsqr(A, b, 1e-10, 200, warm_start=w)
        assert np.linalg.norm(spmv(A, out.x) - b) <= 1e-10

    def test_nan_input_raises(self):
        b = np.array([np.nan, 1.0])
        with pytest.raises(NumericsError):
            lsqr(identity(2), b, 0.0, 5)

    def test_rejects_negative_target(self):
        with pytest.raises(ParameterError):
            lsqr(identity(2), np.ones(2), -1.0, 5)


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(diag_matrix([1.0, -3.0, 2.0])) == pytest.approx(3.0, rel=1e-8)

    def test_identity(self):
        assert spectral_norm(identity(17)) == pytest.approx(1.0, rel=1e-12)

    def test_zero_matrix(self):
        assert spectral_norm(zeros(5)) == 0.0

    def test_matches_dense_svd(self, rng):
        for _ in range(15):
            A = random_sparse(rng, 30, 30, density=0.6)
            want = np.linalg.svd(A.to_dense(), compute_uv=False)[0]
            assert spectral_norm(A, rel_tol=1e-10) == pytest.approx(want, rel=1e-7)

    def test_dominates_rayleigh_quotients(self, rng):
        A = random_sparse(rng, 25, 25, density=0.5)
        s = spectral_norm(A, rel_tol=1e-10)
        for _ in range(20):
            x = rng.normal(size=25)
            x /= np.linalg.norm(x)
            assert np.linalg.norm(spmv(A, x)) <= s * (1 + 1e-6)

    def test_rank_one_with_null_start(self):
        # the alternating start vector is in the null space of this matrix
        A = SparseMatrix.from_dense(np.ones((2, 2)))
        assert spectral_norm(A) == pytest.approx(2.0, rel=1e-8)

    def test_budget_exhaustion_carries_estimate(self):
        A = diag_matrix([1.0, 0.999999])
        with pytest.raises(ConvergenceFailure) as info:
            spectral_norm(A, rel_tol=1e-15, max_iter=3)
        assert info.value.best_estimate == pytest.approx(1.0, rel=1e-3)


class TestMinSingularValue:
    def test_diagonal(self):
        assert min_singular_value(diag_matrix([1.0, -3.0, 2.0])) == pytest.approx(1.0)

    def test_permutation(self):
        P = SparseMatrix.from_coo(3, 3, [0, 1, 2], [1, 2, 0], [1.0, 1.0, 1.0])
        assert min_singular_value(P) == pytest.approx(1.0)

    def test_dense_and_iterative_paths_agree(self, rng):
        A = random_dominant(rng, 100)
        dense = min_singular_value(A)
        iterative = min_singular_value(A, dense_cutoff=0)
        assert iterative == pytest.approx(dense, rel=1e-6)

    def test_singular_raises(self):
        A = SparseMatrix.from_dense(np.array([[1.0, 2.0], [2.0, 4.0]]))
        with pytest.raises(SingularMatrixError):
            min_singular_value(A)

    def test_consistent_with_lu_inverse_norm(self, rng):
        for _ in range(5):
            n = int(rng.integers(5, 50))
            A = random_dominant(rng, n)
            f = lu_factorize(A)
            inv = np.column_stack([f.solve(col) for col in np.eye(n)])
            inv_norm = spectral_norm(SparseMatrix.from_dense(inv), rel_tol=1e-10)
            assert min_singular_value(A) * inv_norm == pytest.approx(1.0, rel=1e-6)


class TestSymmetricEigExtremes:
    def test_diagonal(self):
        lo, hi = symmetric_eig_extremes(diag_matrix([1.0, 2.0, 5.0]))
        assert (lo, hi) == (pytest.approx(1.0), pytest.approx(5.0))

    def test_identity(self):
        lo, hi = symmetric_eig_extremes(identity(8))
        assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)

    @pytest.mark.parametrize("m", [12, 40])
    def test_tridiagonal_formula(self, m):
        A = tridiag(-1, 4, -1, m)
        lo, hi = symmetric_eig_extremes(A)
        c = 2 * np.cos(np.pi / (m + 1))
        assert lo == pytest.approx(4 - c, rel=1e-10)
        assert hi == pytest.approx(4 + c, rel=1e-10)

    def test_iterative_path_matches_dense(self, rng):
        dense = np.zeros((120, 120))
        r = rng.uniform(-1, 1, (120, 120))
        dense = (r + r.T) / 2 + np.diag(rng.uniform(3, 6, 120))
        H = SparseMatrix.from_dense(dense)
        lo_d, hi_d = symmetric_eig_extremes(H)
        lo_i, hi_i = symmetric_eig_extremes(H, dense_cutoff=0)
        assert lo_i == pytest.approx(lo_d, rel=1e-7)
        assert hi_i == pytest.approx(hi_d, rel=1e-7)

    def test_large_tridiagonal_uses_power_path(self):
        m = 600  # above the dense cutoff
        A = tridiag(-1, 4, -1, m)
        lo, hi = symmetric_eig_extremes(A)
        c = 2 * np.cos(np.pi / (m + 1))
        assert lo == pytest.approx(4 - c, rel=1e-6)
        assert hi == pytest.approx(4 + c, rel=1e-6)

    def test_rejects_asymmetric(self, rng):
        A = random_sparse(rng, 6, 6)
        with pytest.raises(ParameterError, match="symmetric"):
            symmetric_eig_extremes(A)


class TestSkewSpectralRadius:
    def test_zero(self):
        assert skew_spectral_radius(zeros(4)) == 0.0

    def test_rotation_generator(self):
        S = SparseMatrix.from_dense(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert skew_spectral_radius(S) == pytest.approx(1.0, rel=1e-10)

    def test_matches_dense_eig(self, rng):
        for _ in range(10):
            r = rng.uniform(-1, 1, (30, 30))
            S = SparseMatrix.from_dense((r - r.T) / 2)
            want = np.abs(np.linalg.eigvals(S.to_dense())).max()
            got = skew_spectral_radius(S, rel_tol=1e-12)
            assert got == pytest.approx(want, rel=1e-8)

    def test_rejects_non_antisymmetric(self):
        A = tridiag(-1, 4, -1, 4)
        with pytest.raises(ParameterError, match="antisymmetric"):
            skew_spectral_radius(A)
