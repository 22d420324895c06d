#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opkf/linalg.hpp"
#include "opkf/matrix.hpp"
#include "opkf/rng.hpp"

namespace opkf {

struct KalmanSolution;  // kalman.hpp

/// Linear-Gaussian state-space model
///   x_{k+1} = A x_k + w_k,   w_k ~ N(0, Q)
///   y_k     = C x_k + v_k,   v_k ~ N(0, R)
/// with x_0 ~ N(0, Sigma0).
struct StateSpaceModel {
    Matrix A;       // n x n
    Matrix C;       // m x n
    Matrix Q;       // n x n, symmetric PSD
    Matrix R;       // m x m, symmetric PD
    Matrix Sigma0;  // n x n, symmetric PSD

    std::size_t state_dim() const { return A.rows(); }
    std::size_t obs_dim() const { return C.rows(); }

    /// Checks dimension consistency, symmetry and (semi)definiteness.
    /// Throws DimensionError / ConfigError with the violated condition.
    void validate_structure() const;
};

struct ModelValidation {
    bool observable = false;            // rank O_n = n
    bool controllable_process = false;  // rank [Q, AQ, ..., A^{n-1}Q] = n
    std::optional<bool> controllable_gain;  // rank of (A, K) controllability, needs gain
    double rho_A = 0.0;                 // Gelfand estimate of rho(A)
    std::optional<double> rho_closed_loop;
    bool non_explosive = false;         // rho_A <= 1 + slack
};

/// Slack on the non-explosive flag: the Gelfand estimate is upper-biased
/// (Jordan blocks at rho = 1 report slightly above 1), so a small margin is
/// allowed before a model is flagged as explosive.
constexpr double kRhoSlack = 1e-6;

struct Trajectory {
    std::uint64_t seed = 0;
    std::size_t N = 0;           // last time index; vectors hold N+1 entries
    std::vector<Vec> states;        // x_0 .. x_N
    std::vector<Vec> observations;  // y_0 .. y_N
};

ModelValidation validate(const StateSpaceModel& model,
                         const KalmanSolution* kalman = nullptr);

/// Simulates the model for k = 0..N with noise drawn from three independent
/// seeded streams (initial state, process, measurement). Deterministic for a
/// given seed.
Trajectory simulate(const StateSpaceModel& model, std::size_t N, std::uint64_t seed);

/// Same recursion with caller-supplied Cholesky factors for Sigma0, Q, R.
/// Passing zero factors yields an exactly noise-free run.
Trajectory simulate_with_factors(const StateSpaceModel& model, std::size_t N,
                                 std::uint64_t seed, const Matrix& sigma0_chol,
                                 const Matrix& q_chol, const Matrix& r_chol);

/// Stacked [C; CA; ...; CA^{k-1}], km x n.
Matrix observability_matrix(const Matrix& a, const Matrix& c, std::size_t k);

/// G_p = [C(A-KC)^{p-1}K, ..., CK], m x mp.
Matrix closed_loop_responses(const Matrix& a, const Matrix& c, const Matrix& k, std::size_t p);

/// fm x fm lower-triangular block Toeplitz with I on the diagonal and
/// CA^{j-1}K on the j-th sub-diagonal.
Matrix toeplitz_response(const Matrix& a, const Matrix& c, const Matrix& k, std::size_t f);

/// K_p = [(A-KC)^{p-1}K, ..., K], n x mp. Satisfies C K_p = G_p.
Matrix kalman_controllability(const Matrix& a, const Matrix& c, const Matrix& k, std::size_t p);

// ---------------------------------------------------------------------------
// Preset catalog

struct Preset {
    std::string name;
    StateSpaceModel model;
    std::size_t kappa = 0;      // largest Jordan block on the unit circle
    std::size_t kappa_max = 1;  // largest Jordan block overall
    bool stable = false;        // rho(A) < 1
};

/// SCALAR_STABLE, ROTATION_MARGINAL, INTEGRATOR2, STABLE4.
const std::vector<Preset>& preset_catalog();
const Preset& find_preset(const std::string& name);

}  // namespace opkf
