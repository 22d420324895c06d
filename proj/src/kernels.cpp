#include "opkf/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace opkf::kernels {

namespace {

// Below this many multiply-adds the fork/join cost dominates any speedup.
constexpr std::size_t kParallelFlopThreshold = 1u << 16;

// Chunk length for deterministic reductions. Fixed so that the combination
// tree does not depend on the number of threads.
constexpr std::size_t kChunk = 256;

void matmul_rows(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i0, std::size_t i1) {
    const std::size_t n = a.cols();
    const std::size_t c = b.cols();
    const double* ad = a.data();
    const double* bd = b.data();
    double* od = out.data();
    for (std::size_t i = i0; i < i1; ++i) {
        double* orow = od + i * c;
        for (std::size_t j = 0; j < c; ++j) orow[j] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = ad[i * n + k];
            const double* brow = bd + k * c;
            for (std::size_t j = 0; j < c; ++j) orow[j] += aik * brow[j];
        }
    }
}

void check_matmul_shapes(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
}

}  // namespace

void matmul_serial(const Matrix& a, const Matrix& b, Matrix& out) {
    check_matmul_shapes(a, b);
    out = Matrix(a.rows(), b.cols());
    matmul_rows(a, b, out, 0, a.rows());
}

void matmul_parallel(const Matrix& a, const Matrix& b, Matrix& out) {
    check_matmul_shapes(a, b);
    out = Matrix(a.rows(), b.cols());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(a.rows()); ++i) {
        matmul_rows(a, b, out, static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1);
    }
#else
    matmul_rows(a, b, out, 0, a.rows());
#endif
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    const std::size_t flops = a.rows() * a.cols() * b.cols();
    if (flops >= kParallelFlopThreshold)
        matmul_parallel(a, b, out);
    else
        matmul_serial(a, b, out);
    return out;
}

void gram_accumulate_range(const std::vector<Vec>& windows, std::size_t first, std::size_t last,
                           Matrix& acc) {
    for (std::size_t t = first; t < last; ++t) {
        const Vec& z = windows[t];
        double* ad = acc.data();
        const std::size_t d = z.size();
        for (std::size_t i = 0; i < d; ++i) {
            const double zi = z[i];
            double* row = ad + i * d;
            for (std::size_t j = 0; j < d; ++j) row[j] += zi * z[j];
        }
    }
}

Matrix gram_serial(const std::vector<Vec>& windows, std::size_t first, std::size_t last) {
    if (first >= last) return Matrix();
    const std::size_t d = windows[first].size();
    Matrix acc(d, d);
    gram_accumulate_range(windows, first, last, acc);
    return acc;
}

Matrix gram_chunked(const std::vector<Vec>& windows, std::size_t first, std::size_t last) {
    if (first >= last) return Matrix();
    const std::size_t d = windows[first].size();
    const std::size_t count = last - first;
    const std::size_t nchunks = (count + kChunk - 1) / kChunk;
    std::vector<Matrix> partial(nchunks, Matrix(d, d));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (nchunks > 1)
#endif
    for (long c = 0; c < static_cast<long>(nchunks); ++c) {
        const std::size_t lo = first + static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = std::min(lo + kChunk, last);
        gram_accumulate_range(windows, lo, hi, partial[static_cast<std::size_t>(c)]);
    }
    Matrix acc(d, d);
    for (std::size_t c = 0; c < nchunks; ++c) acc += partial[c];
    return acc;
}

namespace {

void cross_accumulate_range(const std::vector<Vec>& targets, const std::vector<Vec>& windows,
                            std::size_t first, std::size_t last, Matrix& acc) {
    for (std::size_t t = first; t < last; ++t) add_outer(acc, targets[t], windows[t]);
}

}  // namespace

Matrix cross_gram_serial(const std::vector<Vec>& targets, const std::vector<Vec>& windows,
                         std::size_t first, std::size_t last) {
    if (first >= last) return Matrix();
    Matrix acc(targets[first].size(), windows[first].size());
    cross_accumulate_range(targets, windows, first, last, acc);
    return acc;
}

Matrix cross_gram_chunked(const std::vector<Vec>& targets, const std::vector<Vec>& windows,
                          std::size_t first, std::size_t last) {
    if (first >= last) return Matrix();
    const std::size_t rows = targets[first].size();
    const std::size_t cols = windows[first].size();
    const std::size_t count = last - first;
    const std::size_t nchunks = (count + kChunk - 1) / kChunk;
    std::vector<Matrix> partial(nchunks, Matrix(rows, cols));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (nchunks > 1)
#endif
    for (long c = 0; c < static_cast<long>(nchunks); ++c) {
        const std::size_t lo = first + static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = std::min(lo + kChunk, last);
        cross_accumulate_range(targets, windows, lo, hi, partial[static_cast<std::size_t>(c)]);
    }
    Matrix acc(rows, cols);
    for (std::size_t c = 0; c < nchunks; ++c) acc += partial[c];
    return acc;
}

}  // namespace opkf::kernels
