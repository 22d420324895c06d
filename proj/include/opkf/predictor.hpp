#pragma once

#include <cstddef>
#include <vector>

#include "opkf/matrix.hpp"

namespace opkf {

/// Epoch-doubling schedule: epoch i covers times T_i .. 2 T_i - 1 with
/// T_i = 2^{i-1} T_init and past horizon p_i = ceil(beta ln T_i), clamped to
/// [1, T_i - 1]. Natural log; ceil keeps the horizon integral without
/// shrinking it.
struct EpochSchedule {
    std::size_t T_init = 32;
    double beta = 2.0;
    double lambda = 1.0;

    /// Throws ScheduleError unless T_init > beta ln(T_init) and lambda > 0.
    void validate() const;

    /// Past horizon for an epoch starting at T.
    std::size_t horizon(std::size_t T) const;
};

/// Online estimator state within one epoch: the response estimate G
/// (m x mp), the maintained inverse of V_bar = lambda I + sum Z Z^T, and the
/// incrementally tracked ln det V_bar.
struct PredictorState {
    std::size_t epoch = 0;
    std::size_t p = 0;
    std::size_t obs_dim = 0;
    Matrix G;           // m x mp
    Matrix V_inv;       // mp x mp, symmetric
    double logdet = 0;  // ln det V_bar
};

struct EpochInfo {
    std::size_t start = 0;    // first predicted index T
    std::size_t horizon = 0;  // p used in this epoch
};

struct PredictionLog {
    std::vector<Vec> predictions;   // y_tilde_0 .. (zeros through the warm-up)
    std::vector<EpochInfo> epochs;
    Matrix final_g;                 // estimate after the last processed step
    std::size_t final_p = 0;
};

struct BatchFit {
    Matrix G;
    Matrix V_inv;
    double logdet = 0;
};

/// Z_{k,p} = [y_{k-p}; ...; y_{k-1}] stacked oldest-first, length m*p.
Vec past_window(const std::vector<Vec>& observations, std::size_t k, std::size_t p);

/// All windows Z_{t,p} for t = first..last inclusive.
std::vector<Vec> collect_windows(const std::vector<Vec>& observations, std::size_t p,
                                 std::size_t first, std::size_t last);

/// Regularized least squares over t = p..k:
///   G = (sum y_t Z_t^T)(lambda I + sum Z_t Z_t^T)^{-1}
/// with the inverse and ln det obtained from one Cholesky factorization.
BatchFit batch_fit(const std::vector<Vec>& observations, std::size_t p, std::size_t k,
                   double lambda);

/// One observation step:
///   V_bar   += Z Z^T           (inverse via the rank-one update identity)
///   logdet  += ln(1 + Z^T V_bar_old^{-1} Z)
///   G       += (y - G_old Z)(Z^T V_bar_new^{-1})
void recursive_update(PredictorState& state, const Vec& y, const Vec& z);

/// G Z, no state mutation.
Vec predict_next(const PredictorState& state, const Vec& z);

/// The online prediction loop: zero predictions for k < T_init, then for
/// each epoch a batch re-initialization over the full past followed by
/// per-step recursive updates.
PredictionLog run_online(const std::vector<Vec>& observations, const EpochSchedule& schedule);

/// fm x mp estimate regressing stacked targets Y_t = [y_t; ...; y_{t+f-1}]
/// on Z_t over t = p..k-f (same ridge formula as batch_fit).
Matrix fit_multistep(const std::vector<Vec>& observations, std::size_t p, std::size_t f,
                     std::size_t k, double lambda);

/// Online f-step variant: predictions Y_tilde_k are formed at time k from an
/// estimate fitted through t = k-f, so each prediction uses only y_0..y_{k-1}.
struct MultistepLog {
    std::size_t f = 1;
    std::vector<Vec> predictions;  // stacked fm vectors, zeros through warm-up
    std::vector<EpochInfo> epochs;
};

MultistepLog run_online_multistep(const std::vector<Vec>& observations,
                                  const EpochSchedule& schedule, std::size_t f);

/// x_tilde = pinv(O_f) (G_f Z): hidden-state prediction through a known
/// observability matrix.
Vec predict_state(const Matrix& g_multistep, const Matrix& obs_matrix, const Vec& z);

}  // namespace opkf
