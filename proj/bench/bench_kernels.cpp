// Compares the serial reference kernels against the OpenMP variants on
// sizes typical of the epoch re-initialization (many small outer products)
// and on larger square matmuls.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "opkf/kernels.hpp"
#include "opkf/rng.hpp"

using namespace opkf;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    NormalRng rng(seed);
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.next();
    return m;
}

void bench_matmul(std::size_t n, int reps) {
    const Matrix a = random_matrix(n, n, 1);
    const Matrix b = random_matrix(n, n, 2);
    Matrix out;

    auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) kernels::matmul_serial(a, b, out);
    const double serial = seconds_since(t0) / reps;

    t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) kernels::matmul_parallel(a, b, out);
    const double parallel = seconds_since(t0) / reps;

    const double gflop = 2.0 * n * n * n * 1e-9;
    std::printf("matmul %4zu  serial %8.3f ms (%5.2f GF/s)  parallel %8.3f ms (%5.2f GF/s)  speedup %.2fx\n",
                n, serial * 1e3, gflop / serial, parallel * 1e3, gflop / parallel,
                serial / parallel);
}

void bench_gram(std::size_t count, std::size_t dim, int reps) {
    NormalRng rng(3);
    std::vector<Vec> windows(count);
    for (auto& z : windows) z = rng.vector(dim);

    auto t0 = clock_type::now();
    Matrix g;
    for (int r = 0; r < reps; ++r) g = kernels::gram_serial(windows, 0, count);
    const double serial = seconds_since(t0) / reps;

    t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) g = kernels::gram_chunked(windows, 0, count);
    const double parallel = seconds_since(t0) / reps;

    std::printf("gram %6zu x dim %3zu  serial %8.3f ms  chunked %8.3f ms  speedup %.2fx\n",
                count, dim, serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; both columns run the serial path\n");
#endif
    bench_matmul(64, 200);
    bench_matmul(256, 20);
    bench_matmul(512, 5);
    bench_gram(32768, 24, 10);   // epoch re-initialization shape
    bench_gram(32768, 64, 3);
    bench_gram(100000, 16, 10);
    return 0;
}
