#include "opkf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "opkf/kernels.hpp"

namespace opkf {

namespace {

// Fixed-seed xorshift64 fill for power-iteration start vectors: deterministic
// and almost surely not orthogonal to the leading eigenspace.
Vec start_vector(std::size_t n) {
    std::uint64_t s = 0x2545f4914f6cdd1dULL;
    Vec v(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        v[i] = static_cast<double>(s >> 11) * (1.0 / 9007199254740992.0) - 0.5;
        norm += v[i] * v[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        v.assign(n, 0.0);
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration with a
// Rayleigh-quotient estimate.
SpectralEstimate power_iteration_psd(const Matrix& s, double tol, std::size_t max_iter) {
    SpectralEstimate est;
    const std::size_t n = s.rows();
    if (n == 0) return est;
    Vec v = start_vector(n);
    double lambda = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        Vec w = s * v;
        const double rayleigh = dot(v, w);
        const double wn = norm2(w);
        est.iterations = it;
        if (wn == 0.0) {
            est.value = 0.0;
            est.converged = true;
            return est;
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
        if (std::abs(rayleigh - lambda) <= tol * std::max(1.0, std::abs(rayleigh))) {
            est.value = std::max(rayleigh, 0.0);
            est.converged = true;
            return est;
        }
        lambda = rayleigh;
    }
    est.value = std::max(lambda, 0.0);
    est.converged = false;
    return est;
}

Matrix sym_times(const Matrix& a, const Matrix& b) { return kernels::matmul(a, b); }

void check_square(const Matrix& a, const char* op) {
    if (!a.square()) throw DimensionError(std::string(op) + ": matrix must be square");
}

}  // namespace

Matrix cholesky(const Matrix& a) {
    check_square(a, "cholesky");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (sum <= 0.0 || !std::isfinite(sum))
                    throw SingularMatrixError("cholesky: non-positive pivot at row " +
                                              std::to_string(i));
                l(i, i) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return l;
}

Matrix cholesky_psd(const Matrix& a, double jitter) {
    try {
        return cholesky(a);
    } catch (const SingularMatrixError&) {
        double max_diag = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) max_diag = std::max(max_diag, a(i, i));
        Matrix shifted = a;
        const double eps = jitter * std::max(1.0, max_diag);
        for (std::size_t i = 0; i < a.rows(); ++i) shifted(i, i) += eps;
        return cholesky(shifted);
    }
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
    check_square(a, "solve_linear");
    if (b.rows() != a.rows()) throw DimensionError("solve_linear: rhs row count mismatch");
    const std::size_t n = a.rows();
    const std::size_t nrhs = b.cols();
    Matrix lu = a;
    Matrix x = b;
    const double pivot_floor = 1e-14 * a.frobenius_norm();

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(lu(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(lu(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < pivot_floor || best == 0.0)
            throw SingularMatrixError("solve_linear: pivot below threshold at column " +
                                      std::to_string(col));
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(pivot, j));
            for (std::size_t j = 0; j < nrhs; ++j) std::swap(x(col, j), x(pivot, j));
        }
        const double d = lu(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = lu(r, col) / d;
            if (f == 0.0) continue;
            lu(r, col) = f;
            for (std::size_t j = col + 1; j < n; ++j) lu(r, j) -= f * lu(col, j);
            for (std::size_t j = 0; j < nrhs; ++j) x(r, j) -= f * x(col, j);
        }
    }
    // back substitution
    for (std::size_t col = n; col-- > 0;) {
        const double d = lu(col, col);
        for (std::size_t j = 0; j < nrhs; ++j) {
            double sum = x(col, j);
            for (std::size_t k = col + 1; k < n; ++k) sum -= lu(col, k) * x(k, j);
            x(col, j) = sum / d;
        }
    }
    if (!x.all_finite()) throw NotFiniteError("solve_linear: non-finite solution");
    return x;
}

Vec cholesky_solve(const Matrix& l, const Vec& b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw DimensionError("cholesky_solve: length mismatch");
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
        y[i] = sum / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = y[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= l(k, i) * y[k];
        y[i] = sum / l(i, i);
    }
    return y;
}

Matrix cholesky_solve(const Matrix& l, const Matrix& b) {
    const std::size_t n = l.rows();
    if (b.rows() != n) throw DimensionError("cholesky_solve: rhs row count mismatch");
    Matrix x = b;
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = x(i, j);
            for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * x(k, j);
            x(i, j) = sum / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double sum = x(i, j);
            for (std::size_t k = i + 1; k < n; ++k) sum -= l(k, i) * x(k, j);
            x(i, j) = sum / l(i, i);
        }
    }
    return x;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
    const Matrix l = cholesky(a);
    Matrix x = cholesky_solve(l, b);
    if (!x.all_finite()) throw NotFiniteError("solve_spd: non-finite solution");
    return x;
}

Matrix invert_spd(const Matrix& a) { return solve_spd(a, Matrix::identity(a.rows())); }

double logdet_spd(const Matrix& a) {
    const Matrix l = cholesky(a);
    double ld = 0.0;
    for (std::size_t i = 0; i < l.rows(); ++i) ld += std::log(l(i, i));
    return 2.0 * ld;
}

SpectralEstimate spectral_norm_estimate(const Matrix& m, double tol, std::size_t max_iter) {
    if (m.empty()) throw DimensionError("spectral_norm: empty matrix");
    const double scale = m.max_abs();
    if (scale == 0.0) return {0.0, true, 0};
    // normalize first: the M^T M pipeline squares twice and underflows for
    // matrices with norms below ~1e-77 otherwise
    Matrix scaled = m;
    scaled *= 1.0 / scale;
    const Matrix gram = sym_times(scaled.transposed(), scaled);
    SpectralEstimate est = power_iteration_psd(gram, tol, max_iter);
    est.value = std::sqrt(std::max(est.value, 0.0)) * scale;
    return est;
}

double spectral_norm(const Matrix& m) { return spectral_norm_estimate(m).value; }

double max_eigen_sym(const Matrix& s, double tol) {
    check_square(s, "max_eigen_sym");
    const double shift = s.frobenius_norm();
    if (shift == 0.0) return 0.0;
    Matrix shifted = s;
    for (std::size_t i = 0; i < s.rows(); ++i) shifted(i, i) += shift;
    const SpectralEstimate est = power_iteration_psd(shifted, tol, 100000);
    return est.value - shift;
}

double min_eigen_sym(const Matrix& s, double tol) {
    Matrix neg = s;
    neg *= -1.0;
    return -max_eigen_sym(neg, tol);
}

double min_eigen_spd(const Matrix& g, double tol) {
    check_square(g, "min_eigen_spd");
    const std::size_t n = g.rows();
    if (n == 0) return 0.0;
    Matrix l;
    try {
        l = cholesky(g);
    } catch (const SingularMatrixError&) {
        return std::max(min_eigen_sym(g), 0.0);
    }
    Vec v = start_vector(n);
    double lambda = 0.0;
    for (std::size_t it = 0; it < 100000; ++it) {
        Vec w = cholesky_solve(l, v);
        const double wn = norm2(w);
        if (wn == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
        const double rayleigh = dot(v, g * v);
        if (std::abs(rayleigh - lambda) <= tol * std::max(1e-300, std::abs(rayleigh)))
            return rayleigh;
        lambda = rayleigh;
    }
    return lambda;
}

SpectralEstimate spectral_radius_gelfand(const Matrix& m, std::size_t k) {
    check_square(m, "spectral_radius_gelfand");
    if (k < 1) throw DimensionError("spectral_radius_gelfand: k must be >= 1");

    // keep entries near unit scale; powers of stable matrices underflow long
    // before k = 512 and marginally unstable ones overflow
    const auto rescale = [](Matrix& a, double& log_scale) {
        const double f = a.max_abs();
        if (f != 0.0 && (f > 1e150 || f < 1e-150)) {
            a *= 1.0 / f;
            log_scale += std::log(f);
        }
    };

    Matrix result = Matrix::identity(m.rows());
    Matrix base = m;
    double log_scale_result = 0.0;
    double log_scale_base = 0.0;
    std::size_t e = k;
    while (e > 0) {
        if (e & 1) {
            result = kernels::matmul(result, base);
            log_scale_result += log_scale_base;
            rescale(result, log_scale_result);
        }
        e >>= 1;
        if (e > 0) {
            base = kernels::matmul(base, base);
            log_scale_base *= 2.0;
            rescale(base, log_scale_base);
        }
    }
    SpectralEstimate est = spectral_norm_estimate(result);
    if (est.value == 0.0) {
        est.value = 0.0;
        return est;
    }
    est.value = std::exp((std::log(est.value) + log_scale_result) / static_cast<double>(k));
    return est;
}

MinimalPolynomial minimal_polynomial(const Matrix& a, double tol) {
    check_square(a, "minimal_polynomial");
    const std::size_t n = a.rows();
    if (n == 0) throw DimensionError("minimal_polynomial: empty matrix");

    // vec(A^0) .. vec(A^n) as columns, with per-column norms for scaling
    std::vector<Matrix> powers;
    powers.reserve(n + 1);
    powers.push_back(Matrix::identity(n));
    for (std::size_t i = 1; i <= n; ++i) powers.push_back(kernels::matmul(powers.back(), a));

    const std::size_t nn = n * n;
    std::vector<Vec> cols(n + 1, Vec(nn));
    Vec col_norm(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t e2 = 0; e2 < nn; ++e2) cols[i][e2] = powers[i].data()[e2];
        col_norm[i] = std::max(norm2(cols[i]), 1e-300);
    }

    MinimalPolynomial best;
    for (std::size_t d = 1; d <= n; ++d) {
        // normal equations on unit-scaled columns
        Matrix gram(d, d);
        Vec rhs(d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double g = dot(cols[i], cols[j]) / (col_norm[i] * col_norm[j]);
                gram(i, j) = g;
                gram(j, i) = g;
            }
            rhs[i] = dot(cols[i], cols[d]) / (col_norm[i] * col_norm[d]);
        }
        for (std::size_t i = 0; i < d; ++i) gram(i, i) += 1e-14;
        Vec scaled = cholesky_solve(cholesky(gram), rhs);
        Vec coeffs(d);
        for (std::size_t i = 0; i < d; ++i)
            coeffs[i] = scaled[i] * col_norm[d] / col_norm[i];

        Vec resid = cols[d];
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t e2 = 0; e2 < nn; ++e2) resid[e2] -= coeffs[i] * cols[i][e2];
        const double rel = norm2(resid) / std::max(1.0, norm2(cols[d]));

        if (rel <= tol || d == n) {
            best.degree = d;
            best.coefficients = coeffs;
            best.residual = rel;
            double l1 = 1.0, l2 = 1.0;
            for (double c : coeffs) {
                l1 += std::abs(c);
                l2 += c * c;
            }
            best.l1_norm = l1;
            best.l2_norm = std::sqrt(l2);
            return best;
        }
    }
    return best;  // unreachable: d == n always returns
}

Matrix evaluate_annihilator(const Matrix& a, const MinimalPolynomial& poly) {
    Matrix power = Matrix::identity(a.rows());
    Matrix acc(a.rows(), a.rows());
    for (std::size_t i = 0; i < poly.degree; ++i) {
        acc += poly.coefficients[i] * power;
        power = kernels::matmul(power, a);
    }
    return power - acc;  // A^d - sum a_i A^i
}

Matrix pseudo_inverse_tall(const Matrix& m) {
    if (m.rows() < m.cols()) throw DimensionError("pseudo_inverse_tall: matrix must be tall");
    const Matrix gram = kernels::matmul(m.transposed(), m);
    const double lmax = max_eigen_sym(gram);
    const double lmin = min_eigen_spd(gram);
    if (lmax <= 0.0 || lmin <= 1e-12 * lmax)
        throw RankDeficientError("pseudo_inverse_tall: rank-deficient matrix");
    return solve_spd(gram, m.transposed());
}

bool full_column_rank(const Matrix& m, double rel_tol) {
    if (m.rows() < m.cols()) return false;
    const Matrix gram = kernels::matmul(m.transposed(), m);
    const double lmax = max_eigen_sym(gram);
    if (lmax <= 0.0) return false;
    const double lmin = min_eigen_spd(gram);
    return lmin >= rel_tol * rel_tol * lmax;
}

}  // namespace opkf
