#include "opkf/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "opkf/errors.hpp"
#include "opkf/kernels.hpp"
#include "opkf/linalg.hpp"

namespace opkf {

void EpochSchedule::validate() const {
    if (T_init < 2) throw ScheduleError("schedule: T_init must be >= 2");
    if (beta <= 0.0) throw ScheduleError("schedule: beta must be positive");
    if (lambda <= 0.0) throw ScheduleError("schedule: lambda must be positive");
    if (static_cast<double>(T_init) <= beta * std::log(static_cast<double>(T_init)))
        throw ScheduleError("schedule: T_init must exceed beta*ln(T_init)");
}

std::size_t EpochSchedule::horizon(std::size_t T) const {
    const double raw = std::ceil(beta * std::log(static_cast<double>(T)));
    std::size_t p = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
    p = std::max<std::size_t>(p, 1);
    p = std::min(p, T - 1);
    return p;
}

Vec past_window(const std::vector<Vec>& observations, std::size_t k, std::size_t p) {
    if (k < p) throw IndexError("past_window: k < p");
    if (k > observations.size())
        throw IndexError("past_window: window reaches past the observation record");
    const std::size_t m = observations.front().size();
    Vec z(m * p);
    for (std::size_t j = 0; j < p; ++j) {
        const Vec& y = observations[k - p + j];
        for (std::size_t i = 0; i < m; ++i) z[j * m + i] = y[i];
    }
    return z;
}

std::vector<Vec> collect_windows(const std::vector<Vec>& observations, std::size_t p,
                                 std::size_t first, std::size_t last) {
    std::vector<Vec> windows;
    if (last < first) return windows;
    windows.reserve(last - first + 1);
    for (std::size_t t = first; t <= last; ++t) windows.push_back(past_window(observations, t, p));
    return windows;
}

BatchFit batch_fit(const std::vector<Vec>& observations, std::size_t p, std::size_t k,
                   double lambda) {
    if (lambda <= 0.0) throw ScheduleError("batch_fit: lambda must be positive");
    if (k < p) throw IndexError("batch_fit: k < p");
    const std::size_t m = observations.front().size();
    const std::size_t dim = m * p;

    const std::vector<Vec> windows = collect_windows(observations, p, p, k);
    Matrix vbar = kernels::gram_chunked(windows, 0, windows.size());
    for (std::size_t i = 0; i < dim; ++i) vbar(i, i) += lambda;

    std::vector<Vec> targets(windows.size());
    for (std::size_t t = 0; t < windows.size(); ++t) targets[t] = observations[p + t];
    const Matrix sy = kernels::cross_gram_chunked(targets, windows, 0, windows.size());

    Matrix chol;
    try {
        chol = cholesky(vbar);
    } catch (const SingularMatrixError&) {
        throw SingularMatrixError(
            "batch_fit: Gram factorization failed; lambda too small for the data scale");
    }
    BatchFit fit;
    fit.logdet = 0.0;
    for (std::size_t i = 0; i < dim; ++i) fit.logdet += 2.0 * std::log(chol(i, i));
    fit.V_inv = cholesky_solve(chol, Matrix::identity(dim));
    // symmetrize against roundoff so the rank-one updates stay symmetric
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (fit.V_inv(i, j) + fit.V_inv(j, i));
            fit.V_inv(i, j) = v;
            fit.V_inv(j, i) = v;
        }
    fit.G = kernels::matmul(sy, fit.V_inv);
    return fit;
}

void recursive_update(PredictorState& state, const Vec& y, const Vec& z) {
    if (z.size() != state.V_inv.rows())
        throw DimensionError("recursive_update: window length mismatch");
    if (y.size() != state.G.rows())
        throw DimensionError("recursive_update: observation length mismatch");

    const Vec w = state.V_inv * z;       // V_bar_old^{-1} Z
    const double s = 1.0 + dot(z, w);    // 1 + Z^T V_bar_old^{-1} Z
    add_outer(state.V_inv, w, w, -1.0 / s);
    state.logdet += std::log(s);

    const Vec y_pred = state.G * z;
    Vec residual = y;
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= y_pred[i];
    // V_bar_new^{-1} Z = w / s by the rank-one inverse-update identity
    add_outer(state.G, residual, w, 1.0 / s);
}

Vec predict_next(const PredictorState& state, const Vec& z) { return state.G * z; }

PredictionLog run_online(const std::vector<Vec>& observations, const EpochSchedule& schedule) {
    schedule.validate();
    const std::size_t len = observations.size();
    if (len < schedule.T_init)
        throw ScheduleError("run_online: need at least T_init observations");
    const std::size_t m = observations.front().size();

    PredictionLog log;
    log.predictions.assign(len, Vec(m, 0.0));

    PredictorState state;
    bool have_state = false;
    std::size_t epoch = 1;
    for (std::size_t T = schedule.T_init; T < len; T *= 2, ++epoch) {
        const std::size_t p = schedule.horizon(T);
        const BatchFit fit = batch_fit(observations, p, T - 1, schedule.lambda);
        state.epoch = epoch;
        state.p = p;
        state.obs_dim = m;
        state.G = fit.G;
        state.V_inv = fit.V_inv;
        state.logdet = fit.logdet;
        have_state = true;
        log.epochs.push_back({T, p});

        const std::size_t stop = std::min(2 * T - 1, len - 1);
        for (std::size_t k = T; k <= stop; ++k) {
            const Vec z = past_window(observations, k, p);
            log.predictions[k] = predict_next(state, z);
            recursive_update(state, observations[k], z);
        }
    }
    if (have_state) {
        log.final_g = state.G;
        log.final_p = state.p;
    }
    return log;
}

namespace {

Vec stacked_targets(const std::vector<Vec>& observations, std::size_t t, std::size_t f) {
    const std::size_t m = observations.front().size();
    Vec y(f * m);
    for (std::size_t j = 0; j < f; ++j)
        for (std::size_t i = 0; i < m; ++i) y[j * m + i] = observations[t + j][i];
    return y;
}

}  // namespace

Matrix fit_multistep(const std::vector<Vec>& observations, std::size_t p, std::size_t f,
                     std::size_t k, double lambda) {
    if (f < 1) throw IndexError("fit_multistep: f must be >= 1");
    if (k < p + f) throw IndexError("fit_multistep: k - f must be >= p");
    const std::size_t m = observations.front().size();
    const std::size_t dim = m * p;
    const std::size_t last_t = k - f;

    const std::vector<Vec> windows = collect_windows(observations, p, p, last_t);
    Matrix vbar = kernels::gram_chunked(windows, 0, windows.size());
    for (std::size_t i = 0; i < dim; ++i) vbar(i, i) += lambda;

    std::vector<Vec> targets(windows.size());
    for (std::size_t t = 0; t < windows.size(); ++t)
        targets[t] = stacked_targets(observations, p + t, f);
    const Matrix sy = kernels::cross_gram_chunked(targets, windows, 0, windows.size());

    Matrix chol;
    try {
        chol = cholesky(vbar);
    } catch (const SingularMatrixError&) {
        throw SingularMatrixError(
            "fit_multistep: Gram factorization failed; lambda too small for the data scale");
    }
    return kernels::matmul(sy, cholesky_solve(chol, Matrix::identity(dim)));
}

MultistepLog run_online_multistep(const std::vector<Vec>& observations,
                                  const EpochSchedule& schedule, std::size_t f) {
    schedule.validate();
    if (f < 1) throw IndexError("run_online_multistep: f must be >= 1");
    const std::size_t len = observations.size();
    if (len < schedule.T_init)
        throw ScheduleError("run_online_multistep: need at least T_init observations");
    const std::size_t m = observations.front().size();

    MultistepLog log;
    log.f = f;
    log.predictions.assign(len, Vec(f * m, 0.0));

    for (std::size_t T = schedule.T_init; T < len; T *= 2) {
        const std::size_t p = schedule.horizon(T);
        if (T < p + f) continue;  // not enough room for a single target yet

        // fit through t = T - f, so predictions at k = T use only y_{< T}
        const std::size_t dim = m * p;
        const std::vector<Vec> windows = collect_windows(observations, p, p, T - f);
        Matrix vbar = kernels::gram_chunked(windows, 0, windows.size());
        for (std::size_t i = 0; i < dim; ++i) vbar(i, i) += schedule.lambda;
        std::vector<Vec> targets(windows.size());
        for (std::size_t t = 0; t < windows.size(); ++t)
            targets[t] = stacked_targets(observations, p + t, f);
        const Matrix sy = kernels::cross_gram_chunked(targets, windows, 0, windows.size());
        const Matrix chol = cholesky(vbar);

        PredictorState state;
        state.p = p;
        state.obs_dim = m;
        state.V_inv = cholesky_solve(chol, Matrix::identity(dim));
        state.G = kernels::matmul(sy, state.V_inv);
        state.logdet = 0.0;

        const std::size_t stop = std::min(2 * T - 1, len - 1);
        for (std::size_t k = T; k <= stop; ++k) {
            const Vec z = past_window(observations, k, p);
            log.predictions[k] = predict_next(state, z);
            // y_k completes the target Y_{k-f+1}
            const std::size_t t = k - f + 1;
            if (t >= p) recursive_update(state, stacked_targets(observations, t, f),
                                         past_window(observations, t, p));
        }
        log.epochs.push_back({T, p});
    }
    return log;
}

Vec predict_state(const Matrix& g_multistep, const Matrix& obs_matrix, const Vec& z) {
    if (obs_matrix.rows() != g_multistep.rows())
        throw DimensionError("predict_state: O_f rows must match the stacked prediction");
    return pseudo_inverse_tall(obs_matrix) * (g_multistep * z);
}

}  // namespace opkf
