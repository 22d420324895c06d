#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "opkf/kalman.hpp"
#include "opkf/linalg.hpp"
#include "opkf/matrix.hpp"

namespace opkf {

/// Regret of the online predictions against the Kalman baseline,
///   R_N = sum ||y_k - y_tilde_k||^2 - sum ||y_k - y_hat_k||^2,
/// together with its exact decomposition R_N = L_N + 2 * martingale where
/// L_N = sum ||y_hat_k - y_tilde_k||^2.
struct RegretReport {
    std::size_t start = 1;
    std::size_t N = 0;
    double regret = 0.0;
    double square_loss = 0.0;
    double martingale_term = 0.0;
    double identity_residual = 0.0;  // |R - L - 2*mart|
    Vec per_step_online;             // ||y_k - y_tilde_k||^2, k = start..N
    Vec per_step_kalman;             // ||y_k - y_hat_k||^2
};

RegretReport compute_regret(const std::vector<Vec>& observations, const FilterRun& kalman_run,
                            const std::vector<Vec>& online_predictions, std::size_t start = 1);

struct LogdetCheck {
    double lhs = 0.0;  // sum of Z^T V_bar^{-1} Z over the epoch
    double rhs = 0.0;  // ln det(V_bar_end) - ln det(V_bar_before)
    bool pass = false;
};

/// Checks sum_{j=split..end} Z_j^T V_bar_j^{-1} Z_j <= ln det(V_end V_before^{-1})
/// where V_bar is lambda I plus the running Gram of all windows seen so far;
/// windows[0..split) only prime the Gram. Slack 1e-9.
LogdetCheck check_logdet_lemma(const std::vector<Vec>& windows, std::size_t split,
                               double lambda);

struct ArmaDiagnostics {
    MinimalPolynomial poly;
    double delta_bound = 0.0;   // the Delta constant
    Vec residual_norms;         // ||delta_k|| for k = first_k..N
    std::size_t first_k = 0;
    double sup_innovation = 0.0;
    double max_ratio = 0.0;     // max ||delta_k|| / (Delta * sup_{i<k} ||e_i||)
    bool pass = false;
};

/// Verifies the window recursion Z_k = a_{d-1} Z_{k-1} + ... + a_0 Z_{k-d} + delta_k
/// with ||delta_k|| <= Delta * sup_{i<=k-1} ||e_i|| at every step, where
/// Delta = (d+1) ||a||_1 max(||C|| ||K|| max_{i<d} ||A^i||, 1) sqrt(p).
ArmaDiagnostics check_arma_bound(const std::vector<Vec>& observations,
                                 const StateSpaceModel& model, const KalmanSolution& solution,
                                 const FilterRun& run, std::size_t p);

struct PEReport {
    std::size_t p = 0;
    std::vector<std::size_t> grid;       // checked k values
    Vec min_eigs;                        // lambda_min of the Gram at each grid point
    double min_normalized_eig = 0.0;     // min over k of lambda_min / (k - p + 1)
    double sigma_r_quarter = 0.0;        // sigma_min(R) / 4
    std::optional<double> stable_bound_ratio;  // vs (k-p+1)/32 * Gamma_{Z,k}
    std::optional<std::size_t> n0_hat;   // smallest grid k after which the bound holds
};

/// Empirical persistency of excitation over a geometric grid of times:
/// lambda_min(sum_{j=p..k} Z_j Z_j^T) against (k-p+1) sigma_min(R)/4, and
/// optionally against the stable-case bound (k-p+1)/32 Gamma_{Z,k}.
PEReport check_persistency(const std::vector<Vec>& observations, std::size_t p,
                           const Matrix& noise_cov, double grid_ratio = 1.25,
                           const std::function<Matrix(std::size_t)>& gamma_z_at = nullptr);

struct AlternativeRegret {
    double kalman_loss = 0.0;   // sum ||y_k - y_hat_k||^2, k = 0..N
    double fir_loss = 0.0;      // unconstrained order-p* least-squares loss
    double difference = 0.0;    // kalman_loss - fir_loss
    bool decay_class_ok = false;  // fitted taps satisfy ||g_t|| <= L rho^t
    bool jittered = false;        // Gram needed a trace jitter
};

/// Best fixed FIR predictor of order p_star over the whole record (zero
/// padding before time 0), compared with the Kalman cumulative loss. The
/// decay-class membership is reported on the fitted taps, not imposed.
AlternativeRegret alternative_regret(const std::vector<Vec>& observations,
                                     const FilterRun& kalman_run, std::size_t p_star,
                                     double rho, double decay_scale);

/// R_{x,N} = sum ||x_k - x_tilde_k||^2 - sum ||x_k - x_hat_k||^2, k = start..N.
double state_regret(const std::vector<Vec>& true_states, const std::vector<Vec>& kalman_states,
                    const std::vector<Vec>& online_states, std::size_t start = 1);

/// ||a_k - b_k||^2 per index; used for regret curves at checkpoints.
Vec per_step_squared_errors(const std::vector<Vec>& a, const std::vector<Vec>& b);

}  // namespace opkf
