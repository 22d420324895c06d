#pragma once

#include <cstddef>
#include <optional>

#include "opkf/matrix.hpp"

namespace opkf {

/// Result of a power-iteration estimate. `converged` is false when the
/// iteration cap was reached; `value` then still holds the best estimate.
struct SpectralEstimate {
    double value = 0.0;
    bool converged = true;
    std::size_t iterations = 0;
};

/// Minimal polynomial a(s) = s^d - a_{d-1} s^{d-1} - ... - a_0 of a square
/// matrix, so that A^d = a_{d-1} A^{d-1} + ... + a_0 I holds within the
/// residual below.
struct MinimalPolynomial {
    std::size_t degree = 0;
    Vec coefficients;    // a_0 .. a_{d-1}
    double l1_norm = 0;  // 1 + sum |a_i|
    double l2_norm = 0;  // sqrt(1 + sum a_i^2)
    double residual = 0; // ||a(A)||_F / max(1, ||A^d||_F)
};

/// Lower-triangular Cholesky factor of a symmetric PD matrix.
/// Throws SingularMatrixError when a pivot is not strictly positive.
Matrix cholesky(const Matrix& a);

/// Cholesky for PSD matrices: retries with `jitter * max(1, max diagonal)`
/// added to the diagonal when the plain factorization hits a zero pivot.
/// Allows exactly singular covariance blocks (e.g. Q = 0).
Matrix cholesky_psd(const Matrix& a, double jitter = 1e-12);

/// Solves A X = B by LU with partial pivoting.
/// Throws SingularMatrixError when a pivot magnitude drops below
/// 1e-14 * ||A||_F.
Matrix solve_linear(const Matrix& a, const Matrix& b);

/// Symmetric-positive-definite fast path (Cholesky), for Gram matrices.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Solve with a precomputed Cholesky factor L (L L^T x = b).
Vec cholesky_solve(const Matrix& chol_lower, const Vec& b);
Matrix cholesky_solve(const Matrix& chol_lower, const Matrix& b);

/// Inverse of an SPD matrix via Cholesky.
Matrix invert_spd(const Matrix& a);

/// ln det of an SPD matrix via Cholesky.
double logdet_spd(const Matrix& a);

/// Largest singular value by power iteration on M^T M.
SpectralEstimate spectral_norm_estimate(const Matrix& m, double tol = 1e-10,
                                        std::size_t max_iter = 100000);
double spectral_norm(const Matrix& m);

/// Largest / smallest eigenvalue of a symmetric matrix, computed by power
/// iteration on a PSD shift of the matrix. Works for indefinite input.
double max_eigen_sym(const Matrix& s, double tol = 1e-10);
double min_eigen_sym(const Matrix& s, double tol = 1e-10);

/// Smallest eigenvalue of an SPD/PSD matrix by inverse power iteration on
/// its Cholesky factor; falls back to the symmetric shift method when the
/// factorization fails (singular Gram).
double min_eigen_spd(const Matrix& g, double tol = 1e-8);

/// Gelfand estimate ||M^k||_2^{1/k} of the spectral radius. Upper-biased.
/// Powers are formed by repeated squaring with rescaling once entries pass
/// 1e150, tracking the scale in log space.
SpectralEstimate spectral_radius_gelfand(const Matrix& m, std::size_t k = 512);

/// Least-squares minimal polynomial: smallest d <= n such that vec(A^d)
/// lies within relative residual `tol` of span{vec(I), ..., vec(A^{d-1})};
/// d = n (Cayley-Hamilton) is accepted unconditionally as a fallback.
MinimalPolynomial minimal_polynomial(const Matrix& a, double tol = 1e-8);

/// Evaluates a(A) = A^d - sum a_i A^i for a MinimalPolynomial.
Matrix evaluate_annihilator(const Matrix& a, const MinimalPolynomial& poly);

/// (M^T M)^{-1} M^T for a tall full-column-rank matrix.
/// Throws RankDeficientError when sigma_min(M^T M) <= 1e-12 * ||M||_2^2.
Matrix pseudo_inverse_tall(const Matrix& m);

/// True when every singular value of M is >= 1e-10 times the largest, and
/// there are cols(M) of them, i.e. M has full column rank.
bool full_column_rank(const Matrix& m, double rel_tol = 1e-10);

}  // namespace opkf
