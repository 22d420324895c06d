#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>

#include "opkf/kernels.hpp"
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

std::vector<Vec> random_windows(std::size_t count, std::size_t dim, std::uint64_t seed) {
    NormalRng rng(seed);
    std::vector<Vec> w(count);
    for (auto& z : w) z = rng.vector(dim);
    return w;
}

}  // namespace

TEST_CASE("parallel matmul is bitwise identical to the serial kernel") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        const Matrix a = random_matrix(57, 43, seed);
        const Matrix b = random_matrix(43, 61, seed + 100);
        Matrix serial, parallel;
        kernels::matmul_serial(a, b, serial);
        kernels::matmul_parallel(a, b, parallel);
        REQUIRE(serial.rows() == parallel.rows());
        for (std::size_t i = 0; i < serial.rows(); ++i)
            for (std::size_t j = 0; j < serial.cols(); ++j)
                CHECK(serial(i, j) == parallel(i, j));
    }
}

TEST_CASE("matmul dispatch handles rectangular shapes and identity") {
    const Matrix a = random_matrix(5, 9, 3);
    const Matrix id = Matrix::identity(9);
    const Matrix prod = kernels::matmul(a, id);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) CHECK(prod(i, j) == a(i, j));
    CHECK_THROWS_AS(kernels::matmul(a, random_matrix(5, 5, 4)), DimensionError);
}

TEST_CASE("chunked gram equals flat gram within roundoff") {
    const auto windows = random_windows(1000, 12, 42);
    const Matrix flat = kernels::gram_serial(windows, 0, windows.size());
    const Matrix chunked = kernels::gram_chunked(windows, 0, windows.size());
    const double scale = flat.frobenius_norm();
    CHECK((flat - chunked).frobenius_norm() <= 1e-13 * scale);
}

TEST_CASE("chunked gram does not depend on the range being chunk-aligned") {
    const auto windows = random_windows(700, 6, 5);
    // sub-range [13, 601): partials must still agree with flat accumulation
    const Matrix flat = kernels::gram_serial(windows, 13, 601);
    const Matrix chunked = kernels::gram_chunked(windows, 13, 601);
    CHECK((flat - chunked).frobenius_norm() <= 1e-13 * (1.0 + flat.frobenius_norm()));
}

TEST_CASE("chunked cross gram equals flat cross gram within roundoff") {
    const auto windows = random_windows(900, 10, 11);
    const auto targets = random_windows(900, 3, 12);
    const Matrix flat = kernels::cross_gram_serial(targets, windows, 0, windows.size());
    const Matrix chunked = kernels::cross_gram_chunked(targets, windows, 0, windows.size());
    CHECK((flat - chunked).frobenius_norm() <= 1e-13 * (1.0 + flat.frobenius_norm()));
}

TEST_CASE("gram of empty range is empty") {
    const auto windows = random_windows(4, 3, 1);
    CHECK(kernels::gram_serial(windows, 2, 2).empty());
    CHECK(kernels::gram_chunked(windows, 2, 2).empty());
}
