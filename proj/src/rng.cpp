#include "opkf/rng.hpp"

namespace opkf {

Vec gaussian_sample(const Vec& mean, const Matrix& cov_cholesky, NormalRng& rng) {
    if (cov_cholesky.rows() != mean.size() || cov_cholesky.cols() != mean.size())
        throw DimensionError("gaussian_sample: factor/mean dimension mismatch");
    const Vec z = rng.vector(mean.size());
    Vec out = mean;
    const std::size_t n = mean.size();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j <= i && j < n; ++j) sum += cov_cholesky(i, j) * z[j];
        out[i] += sum;
    }
    return out;
}

}  // namespace opkf
