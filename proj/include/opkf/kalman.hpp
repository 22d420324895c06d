#pragma once

#include <optional>
#include <vector>

#include "opkf/matrix.hpp"
#include "opkf/sysmodel.hpp"

namespace opkf {

/// Steady-state Kalman filter quantities for a model:
/// Riccati solution P, gain K = A P C^T (C P C^T + R)^{-1}, innovation
/// covariance R_bar = C P C^T + R, and the stable closed loop A - KC.
struct KalmanSolution {
    Matrix P;
    Matrix K;
    Matrix R_bar;
    Matrix closed_loop;
    double rho_closed_loop = 0.0;
    std::size_t iterations = 0;
    /// ||P - (A-KC)P(A-KC)^T - Q - K R K^T||_F / ||P||_F
    double residual = 0.0;
};

/// One pass of the steady-state filter over a trajectory:
///   x_hat_0 = 0,  y_hat_k = C x_hat_k,  e_k = y_k - y_hat_k,
///   x_hat_{k+1} = A x_hat_k + K e_k.
struct FilterRun {
    std::vector<Vec> state_predictions;  // x_hat_0 .. x_hat_N
    std::vector<Vec> obs_predictions;    // y_hat_0 .. y_hat_N
    std::vector<Vec> innovations;        // e_0 .. e_N
};

struct CovarianceDiagnostics {
    std::vector<Matrix> gamma;          // Gamma_0 .. Gamma_kmax, E x_hat x_hat^T
    std::optional<Matrix> gamma_inf;    // Lyapunov fixed point; absent when marginal
};

struct WhitenessReport {
    std::size_t max_lag = 0;
    std::size_t sample_count = 0;
    double threshold = 0.0;              // 4 / sqrt(N)
    std::vector<Matrix> correlations;    // normalized cross-correlation, lags 1..max_lag
    double max_abs_correlation = 0.0;
    Matrix lag0_covariance;              // compare against R_bar
    bool pass = false;
};

/// Fixed-point iteration of P <- A P A^T - A P C^T (C P C^T + R)^{-1} C P A^T + Q
/// starting from P = Q, stopping on relative Frobenius change < tol.
KalmanSolution solve_riccati(const StateSpaceModel& model, double tol = 1e-12,
                             std::size_t max_iter = 1000000);

FilterRun run_filter(const KalmanSolution& solution, const StateSpaceModel& model,
                     const Trajectory& traj);

/// Gamma_0 = 0, Gamma_k = A Gamma_{k-1} A^T + K R_bar K^T. For a stable A the
/// Lyapunov fixed point is iterated to relative change < 1e-12 and reported;
/// on marginally stable systems it is reported as absent.
CovarianceDiagnostics state_covariances(const KalmanSolution& solution,
                                        const StateSpaceModel& model, std::size_t k_max);

/// Sigma_E = T_p diag(R_bar, ..., R_bar) T_p^T, the covariance of the
/// noise-driven part of a past-observation window.
Matrix sigma_e(const KalmanSolution& solution, const StateSpaceModel& model, std::size_t p);

/// Gamma_{Z,t} = O_p Gamma_{t-p} O_p^T + Sigma_E, the covariance of Z_{t,p}.
Matrix gamma_z(const KalmanSolution& solution, const StateSpaceModel& model,
               const CovarianceDiagnostics& diag, std::size_t p, std::size_t t);

/// Normalized empirical cross-correlations of the innovations at lags
/// 1..max_lag; pass when every entry is within 4/sqrt(N).
WhitenessReport innovation_whiteness(const FilterRun& run, std::size_t max_lag);

}  // namespace opkf
