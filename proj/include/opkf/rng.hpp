#pragma once

#include <cstdint>
#include <random>

#include "opkf/matrix.hpp"

namespace opkf {

/// splitmix64 step, used to derive independent stream seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic standard-normal generator.
///
/// Uniforms come from std::mt19937_64 (sequence fixed by the standard) and
/// are turned into normals by the Box-Muller transform:
///   u1 in (0,1], u2 in [0,1)
///   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)
/// with the second variate cached. The same seed therefore always yields the
/// same sample sequence within a build.
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 53-bit uniforms; u1 shifted away from 0 so log(u1) is finite.
        const double u1 =
            (static_cast<double>(engine_() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
        const double u2 = static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Vec vector(std::size_t n) {
        Vec v(n);
        for (double& x : v) x = next();
        return v;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// mean + L z with z a vector of independent standard normals from `rng`.
/// L is the (lower-triangular) Cholesky factor of the covariance; a zero L
/// returns the mean exactly.
Vec gaussian_sample(const Vec& mean, const Matrix& cov_cholesky, NormalRng& rng);

}  // namespace opkf
