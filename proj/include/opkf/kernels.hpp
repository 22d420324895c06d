#pragma once

#include <cstddef>
#include <vector>

#include "opkf/matrix.hpp"

namespace opkf::kernels {

/// Plain triple-loop reference. Kept for testing and benchmarking against
/// the OpenMP variant.
void matmul_serial(const Matrix& a, const Matrix& b, Matrix& out);

/// Row-parallel matmul. Each output row is produced by exactly one thread
/// with the same inner-loop order as the serial kernel, so the result is
/// bitwise identical to matmul_serial for any thread count.
void matmul_parallel(const Matrix& a, const Matrix& b, Matrix& out);

/// Dispatching entry point: parallel above a flop threshold, serial below.
Matrix matmul(const Matrix& a, const Matrix& b);

/// sum_t z_t z_t^T over windows[first..last), flat accumulation order.
Matrix gram_serial(const std::vector<Vec>& windows, std::size_t first, std::size_t last);

/// Same sum computed in fixed-size chunks that are combined in chunk order.
/// Chunks may be evaluated by different threads; the combination order does
/// not depend on the thread count, so the result is reproducible across
/// --jobs settings (it differs from the flat order by roundoff only).
Matrix gram_chunked(const std::vector<Vec>& windows, std::size_t first, std::size_t last);

/// sum_t y_t z_t^T (y from targets, z from windows), chunked like gram_chunked.
Matrix cross_gram_chunked(const std::vector<Vec>& targets, const std::vector<Vec>& windows,
                          std::size_t first, std::size_t last);

/// Flat-order reference for cross_gram_chunked.
Matrix cross_gram_serial(const std::vector<Vec>& targets, const std::vector<Vec>& windows,
                         std::size_t first, std::size_t last);

}  // namespace opkf::kernels
