#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opkf/linalg.hpp"
#include "opkf/rng.hpp"

using namespace opkf;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    NormalRng rng(seed);
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.next();
    return m;
}

// diagonally dominant, hence comfortably conditioned
Matrix well_conditioned(std::size_t n, std::uint64_t seed) {
    Matrix m = random_matrix(n, n, seed);
    m *= 0.1;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 2.0;
    return m;
}

}  // namespace

TEST_CASE("solve_linear: identity and diagonal cases") {
    const Matrix b = random_matrix(3, 2, 1);
    const Matrix x = solve_linear(Matrix::identity(3), b);
    CHECK((x - b).frobenius_norm() == doctest::Approx(0.0).epsilon(1e-14));

    const Matrix d = Matrix::from_rows({{2.0, 0.0}, {0.0, 4.0}});
    const Matrix rhs = Matrix::from_rows({{1.0}, {1.0}});
    const Matrix sol = solve_linear(d, rhs);
    CHECK(sol(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sol(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("solve_linear: recovers a known solution of a well-conditioned system") {
    const Matrix a = well_conditioned(8, 21);
    const Matrix x0 = random_matrix(8, 3, 22);
    const Matrix b = a * x0;
    const Matrix x = solve_linear(a, b);
    CHECK((x - x0).frobenius_norm() <= 1e-9 * (1.0 + x0.frobenius_norm()));
}

TEST_CASE("solve_linear: residual bound on 100 random well-conditioned instances") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 2 + seed % 7;
        const Matrix a = well_conditioned(n, 1000 + seed);
        const Matrix b = random_matrix(n, 2, 2000 + seed);
        const Matrix x = solve_linear(a, b);
        const double resid = (a * x - b).frobenius_norm();
        CHECK(resid <= 1e-10 * (a.frobenius_norm() * x.frobenius_norm() + b.frobenius_norm()));
    }
}

TEST_CASE("solve_linear: singular matrix is rejected") {
    const Matrix singular = Matrix::from_rows({{1.0, 2.0}, {2.0, 4.0}});
    CHECK_THROWS_AS(solve_linear(singular, Matrix::identity(2)), SingularMatrixError);
}

TEST_CASE("solve_spd matches the general solver on Gram matrices") {
    const Matrix m = random_matrix(6, 4, 33);
    const Matrix gram = m.transposed() * m + 0.5 * Matrix::identity(4);
    const Matrix b = random_matrix(4, 2, 34);
    const Matrix x1 = solve_spd(gram, b);
    const Matrix x2 = solve_linear(gram, b);
    CHECK((x1 - x2).frobenius_norm() <= 1e-10 * (1.0 + x2.frobenius_norm()));
}

TEST_CASE("spectral_norm: fixed values") {
    CHECK(spectral_norm(Matrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(spectral_norm(Matrix::from_rows({{3.0, 0.0}, {0.0, -5.0}})) ==
          doctest::Approx(5.0).epsilon(1e-10));
    // nilpotent Jordan block: M^T M = diag(0, 1), largest singular value 1
    CHECK(spectral_norm(Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}})) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral_norm is transpose-invariant on random matrices") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix m = random_matrix(3 + seed % 5, 2 + seed % 7, 300 + seed);
        const double a = spectral_norm(m);
        const double b = spectral_norm(m.transposed());
        CHECK(std::abs(a - b) <= 1e-9 * (1.0 + a));
    }
}

TEST_CASE("spectral_radius_gelfand: diagonal, orthogonal and Jordan cases") {
    const Matrix d = Matrix::from_rows({{0.5, 0.0}, {0.0, 0.9}});
    for (std::size_t k : {1u, 7u, 64u, 512u})
        CHECK(spectral_radius_gelfand(d, k).value == doctest::Approx(0.9).epsilon(1e-9));

    const double th = 1.1;
    const Matrix rot =
        Matrix::from_rows({{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}});
    for (std::size_t k : {1u, 16u, 512u})
        CHECK(spectral_radius_gelfand(rot, k).value == doctest::Approx(1.0).epsilon(1e-9));

    // Jordan block at 1: ||M^k|| ~ k, so the estimate is k^{1/k}-ish; oracle
    // computes M^512 by direct multiplication
    const Matrix jordan = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
    Matrix power = Matrix::identity(2);
    for (int i = 0; i < 512; ++i) power = power * jordan;
    const double oracle = std::pow(spectral_norm(power), 1.0 / 512.0);
    const double est = spectral_radius_gelfand(jordan, 512).value;
    CHECK(est == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(est > 1.0);
    CHECK(est <= 1.03);
}

TEST_CASE("spectral_radius_gelfand survives extreme scales") {
    CHECK(spectral_radius_gelfand(Matrix::from_rows({{1e-8}}), 512).value ==
          doctest::Approx(1e-8).epsilon(1e-9));
    CHECK(spectral_radius_gelfand(Matrix::from_rows({{3.0}}), 512).value ==
          doctest::Approx(3.0).epsilon(1e-9));
    CHECK(spectral_radius_gelfand(Matrix(3, 3), 512).value == 0.0);
}

TEST_CASE("minimal_polynomial: identity, nilpotent, and repeated-eigenvalue cases") {
    const MinimalPolynomial id = minimal_polynomial(Matrix::identity(2));
    CHECK(id.degree == 1);
    CHECK(id.coefficients[0] == doctest::Approx(1.0).epsilon(1e-10));  // a(s) = s - 1

    const MinimalPolynomial nil =
        minimal_polynomial(Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}));
    CHECK(nil.degree == 2);  // a(s) = s^2
    CHECK(std::abs(nil.coefficients[0]) <= 1e-10);
    CHECK(std::abs(nil.coefficients[1]) <= 1e-10);

    // diag(0.5, 0.5, 0.9): (s-0.5)(s-0.9) = s^2 - 1.4 s + 0.45
    const Matrix a = Matrix::diagonal({0.5, 0.5, 0.9});
    const MinimalPolynomial poly = minimal_polynomial(a);
    CHECK(poly.degree == 2);
    CHECK(poly.coefficients[1] == doctest::Approx(1.4).epsilon(1e-9));
    CHECK(poly.coefficients[0] == doctest::Approx(-0.45).epsilon(1e-9));
    CHECK((evaluate_annihilator(a, poly)).frobenius_norm() <= 1e-10);
    CHECK(poly.l1_norm == doctest::Approx(1.0 + 1.4 + 0.45).epsilon(1e-9));
    CHECK(poly.l2_norm ==
          doctest::Approx(std::sqrt(1.0 + 1.4 * 1.4 + 0.45 * 0.45)).epsilon(1e-9));
}

namespace {

// Independent residual oracle: modified Gram-Schmidt on the vectorized powers
// I, A, ..., A^{d-1}, then the projection residual of vec(A^d).
double projection_residual_oracle(const Matrix& a, std::size_t d) {
    const std::size_t n = a.rows();
    std::vector<Vec> basis;
    Matrix power = Matrix::identity(n);
    Vec target;
    for (std::size_t i = 0; i <= d; ++i) {
        Vec v(power.data(), power.data() + n * n);
        if (i < d)
            basis.push_back(v);
        else
            target = v;
        power = power * a;
    }
    std::vector<Vec> ortho;
    for (Vec v : basis) {
        for (const Vec& q : ortho) {
            const double c = dot(q, v);
            for (std::size_t t = 0; t < v.size(); ++t) v[t] -= c * q[t];
        }
        const double nv = norm2(v);
        if (nv > 1e-13) {
            for (double& x : v) x /= nv;
            ortho.push_back(v);
        }
    }
    Vec resid = target;
    for (const Vec& q : ortho) {
        const double c = dot(q, resid);
        for (std::size_t t = 0; t < resid.size(); ++t) resid[t] -= c * q[t];
    }
    return norm2(resid) / std::max(1.0, norm2(target));
}

}  // namespace

TEST_CASE("minimal_polynomial: degree is minimal (exhaustive up to n = 6)") {
    struct Case {
        Matrix a;
        std::size_t expected_degree;
    };
    std::vector<Case> cases;
    cases.push_back({Matrix::diagonal({0.3, 0.3, 0.3, 0.3, 0.3, 0.3}), 1});
    cases.push_back({Matrix::diagonal({0.2, 0.7, 0.2, 0.7, 0.2, 0.7}), 2});
    cases.push_back({Matrix::diagonal({0.1, 0.4, 0.8, 0.1, 0.4, 0.8}), 3});
    {
        Matrix j(6, 6);  // two 3x3 Jordan blocks at 0.5: degree 3
        for (int b = 0; b < 2; ++b)
            for (int i = 0; i < 3; ++i) {
                j(b * 3 + i, b * 3 + i) = 0.5;
                if (i < 2) j(b * 3 + i, b * 3 + i + 1) = 1.0;
            }
        cases.push_back({j, 3});
    }
    cases.push_back({random_matrix(5, 5, 77), 5});  // generic: full degree

    for (const Case& c : cases) {
        const MinimalPolynomial poly = minimal_polynomial(c.a);
        CHECK(poly.degree == c.expected_degree);
        const double norm_a = c.a.frobenius_norm();
        CHECK(evaluate_annihilator(c.a, poly).frobenius_norm() <=
              1e-8 * std::max(1.0, std::pow(norm_a, static_cast<double>(poly.degree))));
        for (std::size_t lower = 1; lower < poly.degree; ++lower)
            CHECK(projection_residual_oracle(c.a, lower) > 1e-8);
    }
}

TEST_CASE("gaussian_sample: zero factor returns the mean exactly") {
    NormalRng rng(9);
    const Vec mean = {1.0, -2.0, 3.0};
    const Vec sample = gaussian_sample(mean, Matrix(3, 3), rng);
    CHECK(sample == mean);
}

TEST_CASE("gaussian_sample: identical seeds give identical sequences") {
    NormalRng a(1234), b(1234);
    const Matrix chol = cholesky(Matrix::from_rows({{2.0, 0.3}, {0.3, 1.0}}));
    for (int i = 0; i < 100; ++i) {
        const Vec sa = gaussian_sample({0.0, 0.0}, chol, a);
        const Vec sb = gaussian_sample({0.0, 0.0}, chol, b);
        CHECK(sa == sb);
    }
}

TEST_CASE("gaussian_sample: empirical moments over 1e5 draws") {
    const std::size_t draws = 100000;
    NormalRng rng(5);
    const Matrix eye = Matrix::identity(3);
    const Vec mean = {0.5, -1.0, 2.0};
    Vec sum(3, 0.0);
    std::vector<Vec> samples;
    samples.reserve(draws);
    for (std::size_t s = 0; s < draws; ++s) {
        samples.push_back(gaussian_sample(mean, eye, rng));
        for (std::size_t i = 0; i < 3; ++i) sum[i] += samples.back()[i];
    }
    const double band = 4.0 / std::sqrt(static_cast<double>(draws));
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::abs(sum[i] / draws - mean[i]) <= band);  // 4 sigma / sqrt(n)

    Matrix cov(3, 3);
    for (const Vec& s : samples) {
        Vec centered = s;
        for (std::size_t i = 0; i < 3; ++i) centered[i] -= sum[i] / draws;
        add_outer(cov, centered, centered);
    }
    cov *= 1.0 / static_cast<double>(draws);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)) <= 0.05);
}

TEST_CASE("pseudo_inverse_tall: identity, averaging column, and property check") {
    CHECK((pseudo_inverse_tall(Matrix::identity(3)) - Matrix::identity(3)).frobenius_norm() <=
          1e-10);

    const Matrix col = Matrix::from_rows({{1.0}, {1.0}});
    const Matrix pinv = pseudo_inverse_tall(col);
    CHECK(pinv.rows() == 1);
    CHECK(pinv(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pinv(0, 1) == doctest::Approx(0.5).epsilon(1e-12));

    const Matrix m = random_matrix(6, 3, 55);
    const Matrix check = pseudo_inverse_tall(m) * m;
    CHECK((check - Matrix::identity(3)).frobenius_norm() <= 1e-9);
}

TEST_CASE("pseudo_inverse_tall: rank-deficient input is rejected") {
    Matrix m(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        m(i, 0) = static_cast<double>(i + 1);
        m(i, 1) = 2.0 * static_cast<double>(i + 1);
    }
    CHECK_THROWS_AS(pseudo_inverse_tall(m), RankDeficientError);
}

TEST_CASE("min_eigen_spd and logdet agree with hand values") {
    const Matrix g = Matrix::from_rows({{4.0, 1.0}, {1.0, 3.0}});
    // eigenvalues (7 +- sqrt(5))/2, det 11
    CHECK(min_eigen_spd(g) == doctest::Approx((7.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-7));
    CHECK(max_eigen_sym(g) == doctest::Approx((7.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-7));
    CHECK(logdet_spd(g) == doctest::Approx(std::log(11.0)).epsilon(1e-12));
    CHECK(min_eigen_sym(Matrix::from_rows({{1.0, 0.0}, {0.0, -2.0}})) ==
          doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("full_column_rank distinguishes full and deficient") {
    CHECK(full_column_rank(random_matrix(5, 3, 91)));
    Matrix m(4, 2);
    for (std::size_t i = 0; i < 4; ++i) m(i, 0) = m(i, 1) = 1.0;
    CHECK_FALSE(full_column_rank(m));
    CHECK_FALSE(full_column_rank(Matrix(3, 2)));  // zero matrix
}
