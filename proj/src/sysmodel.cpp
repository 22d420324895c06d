#include "opkf/sysmodel.hpp"

#include <cmath>

#include "opkf/kalman.hpp"
#include "opkf/kernels.hpp"

namespace opkf {

namespace {

void check_symmetric(const Matrix& m, const char* name) {
    const Matrix diff = m - m.transposed();
    if (diff.frobenius_norm() > 1e-10 * (1.0 + m.frobenius_norm()))
        throw ConfigError(std::string(name) + " must be symmetric");
}

void check_psd(const Matrix& m, const char* name) {
    check_symmetric(m, name);
    const double lmin = min_eigen_sym(m);
    const double scale = std::max(std::abs(max_eigen_sym(m)), std::abs(lmin));
    if (lmin < -1e-10 * std::max(1.0, scale))
        throw ConfigError(std::string(name) + " must be positive semidefinite");
}

void check_pd(const Matrix& m, const char* name) {
    check_symmetric(m, name);
    if (min_eigen_sym(m) <= 0.0)
        throw ConfigError(std::string(name) + " must be positive definite");
}

}  // namespace

void StateSpaceModel::validate_structure() const {
    const std::size_t n = A.rows();
    const std::size_t m = C.rows();
    if (!A.square()) throw DimensionError("A must be square");
    if (C.cols() != n) throw DimensionError("C must be m x n");
    if (Q.rows() != n || Q.cols() != n) throw DimensionError("Q must be n x n");
    if (R.rows() != m || R.cols() != m) throw DimensionError("R must be m x m");
    if (Sigma0.rows() != n || Sigma0.cols() != n) throw DimensionError("Sigma0 must be n x n");
    if (n == 0 || m == 0) throw DimensionError("model dimensions must be positive");
    check_psd(Q, "Q");
    check_psd(Sigma0, "Sigma0");
    check_pd(R, "R");
}

ModelValidation validate(const StateSpaceModel& model, const KalmanSolution* kalman) {
    model.validate_structure();
    const std::size_t n = model.state_dim();

    ModelValidation v;
    v.observable = full_column_rank(observability_matrix(model.A, model.C, n));

    // rank([B, AB, ..., A^{n-1}B]) with B = Q: range(Q) = range(Q^{1/2}), so
    // the Krylov span matches the Q^{1/2} controllability matrix.
    const auto row_rank_full = [n](const Matrix& ctrb) {
        return full_column_rank(ctrb.transposed());
    };
    {
        Matrix ctrb(n, n * n);
        Matrix block = model.Q;
        for (std::size_t i = 0; i < n; ++i) {
            ctrb.set_block(0, i * n, block);
            block = model.A * block;
        }
        v.controllable_process = row_rank_full(ctrb);
    }
    if (kalman != nullptr) {
        const std::size_t m = model.obs_dim();
        Matrix ctrb(n, n * m);
        Matrix block = kalman->K;
        for (std::size_t i = 0; i < n; ++i) {
            ctrb.set_block(0, i * m, block);
            block = model.A * block;
        }
        v.controllable_gain = row_rank_full(ctrb);
        v.rho_closed_loop = kalman->rho_closed_loop;
    }
    v.rho_A = spectral_radius_gelfand(model.A).value;
    v.non_explosive = v.rho_A <= 1.0 + kRhoSlack;
    return v;
}

Trajectory simulate_with_factors(const StateSpaceModel& model, std::size_t N,
                                 std::uint64_t seed, const Matrix& sigma0_chol,
                                 const Matrix& q_chol, const Matrix& r_chol) {
    model.validate_structure();
    if (N < 1) throw LengthError("simulate: N must be >= 1");
    const std::size_t n = model.state_dim();
    const std::size_t m = model.obs_dim();

    NormalRng rng_x0(mix_seed(seed, 0));
    NormalRng rng_w(mix_seed(seed, 1));
    NormalRng rng_v(mix_seed(seed, 2));

    Trajectory traj;
    traj.seed = seed;
    traj.N = N;
    traj.states.reserve(N + 1);
    traj.observations.reserve(N + 1);

    const Vec zero_n(n, 0.0);
    const Vec zero_m(m, 0.0);
    Vec x = gaussian_sample(zero_n, sigma0_chol, rng_x0);
    for (std::size_t k = 0; k <= N; ++k) {
        traj.states.push_back(x);
        Vec y = model.C * x + gaussian_sample(zero_m, r_chol, rng_v);
        traj.observations.push_back(std::move(y));
        if (k < N) x = model.A * x + gaussian_sample(zero_n, q_chol, rng_w);
    }
    return traj;
}

Trajectory simulate(const StateSpaceModel& model, std::size_t N, std::uint64_t seed) {
    return simulate_with_factors(model, N, seed, cholesky_psd(model.Sigma0),
                                 cholesky_psd(model.Q), cholesky_psd(model.R));
}

Matrix observability_matrix(const Matrix& a, const Matrix& c, std::size_t k) {
    if (k < 1) throw DimensionError("observability_matrix: k must be >= 1");
    const std::size_t m = c.rows();
    const std::size_t n = c.cols();
    Matrix out(k * m, n);
    Matrix block = c;
    for (std::size_t i = 0; i < k; ++i) {
        out.set_block(i * m, 0, block);
        if (i + 1 < k) block = block * a;
    }
    return out;
}

Matrix closed_loop_responses(const Matrix& a, const Matrix& c, const Matrix& k, std::size_t p) {
    if (p < 1) throw DimensionError("closed_loop_responses: p must be >= 1");
    const std::size_t m = c.rows();
    const Matrix closed = a - k * c;
    Matrix out(m, m * p);
    // rightmost block is CK; each block to the left gains one factor of A-KC
    Matrix power_times_k = k;  // (A-KC)^i K
    for (std::size_t i = 0; i < p; ++i) {
        out.set_block(0, (p - 1 - i) * m, c * power_times_k);
        if (i + 1 < p) power_times_k = closed * power_times_k;
    }
    return out;
}

Matrix toeplitz_response(const Matrix& a, const Matrix& c, const Matrix& k, std::size_t f) {
    if (f < 1) throw DimensionError("toeplitz_response: f must be >= 1");
    const std::size_t m = c.rows();
    Matrix out(f * m, f * m);
    const Matrix eye = Matrix::identity(m);
    Matrix power_times_k = k;  // A^{j-1} K for the j-th sub-diagonal
    std::vector<Matrix> sub(f);
    for (std::size_t j = 1; j < f; ++j) {
        sub[j] = c * power_times_k;
        power_times_k = a * power_times_k;
    }
    for (std::size_t bi = 0; bi < f; ++bi) {
        out.set_block(bi * m, bi * m, eye);
        for (std::size_t bj = 0; bj < bi; ++bj) out.set_block(bi * m, bj * m, sub[bi - bj]);
    }
    return out;
}

Matrix kalman_controllability(const Matrix& a, const Matrix& c, const Matrix& k, std::size_t p) {
    if (p < 1) throw DimensionError("kalman_controllability: p must be >= 1");
    const std::size_t n = a.rows();
    const std::size_t m = c.rows();
    const Matrix closed = a - k * c;
    Matrix out(n, m * p);
    Matrix power_times_k = k;
    for (std::size_t i = 0; i < p; ++i) {
        out.set_block(0, (p - 1 - i) * m, power_times_k);
        if (i + 1 < p) power_times_k = closed * power_times_k;
    }
    return out;
}

namespace {

std::vector<Preset> build_catalog() {
    std::vector<Preset> catalog;

    {
        Preset p;
        p.name = "SCALAR_STABLE";
        p.model.A = Matrix::from_rows({{0.5}});
        p.model.C = Matrix::from_rows({{1.0}});
        p.model.Q = Matrix::from_rows({{1.0}});
        p.model.R = Matrix::from_rows({{1.0}});
        p.model.Sigma0 = p.model.Q;
        p.kappa = 0;
        p.kappa_max = 1;
        p.stable = true;
        catalog.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "ROTATION_MARGINAL";
        const double th = 0.7;
        p.model.A = Matrix::from_rows(
            {{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}});
        p.model.C = Matrix::from_rows({{1.0, 0.0}});
        p.model.Q = Matrix::identity(2);
        p.model.R = Matrix::from_rows({{1.0}});
        p.model.Sigma0 = p.model.Q;
        p.kappa = 1;
        p.kappa_max = 1;
        p.stable = false;
        catalog.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "INTEGRATOR2";
        p.model.A = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
        p.model.C = Matrix::from_rows({{1.0, 0.0}});
        p.model.Q = Matrix::identity(2);
        p.model.R = Matrix::from_rows({{1.0}});
        p.model.Sigma0 = p.model.Q;
        p.kappa = 2;
        p.kappa_max = 2;
        p.stable = false;
        catalog.push_back(std::move(p));
    }
    {
        // Fixed 4-state, 2-output stable system; rho(A) < 0.85 by Gershgorin.
        Preset p;
        p.name = "STABLE4";
        p.model.A = Matrix::from_rows({{0.55, 0.20, 0.00, 0.10},
                                       {-0.20, 0.50, 0.15, 0.00},
                                       {0.00, -0.10, 0.45, 0.20},
                                       {0.10, 0.00, -0.15, 0.35}});
        p.model.C = Matrix::from_rows({{1.0, 0.0, 0.5, 0.0}, {0.0, 1.0, 0.0, 0.5}});
        p.model.Q = Matrix::identity(4);
        p.model.R = Matrix::identity(2);
        p.model.Sigma0 = p.model.Q;
        p.kappa = 0;
        p.kappa_max = 1;
        p.stable = true;
        catalog.push_back(std::move(p));
    }
    return catalog;
}

}  // namespace

const std::vector<Preset>& preset_catalog() {
    static const std::vector<Preset> catalog = build_catalog();
    return catalog;
}

const Preset& find_preset(const std::string& name) {
    for (const Preset& p : preset_catalog())
        if (p.name == name) return p;
    throw ConfigError("unknown preset: " + name);
}

}  // namespace opkf
