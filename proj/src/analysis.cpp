#include "opkf/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "opkf/kernels.hpp"
#include "opkf/predictor.hpp"

namespace opkf {

namespace {

double squared_norm_diff(const Vec& a, const Vec& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

Matrix lower_solve(const Matrix& l, const Matrix& b) {
    Matrix x = b;
    const std::size_t n = l.rows();
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t i = 0; i < n; ++i) {
            double sum = x(i, j);
            for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * x(k, j);
            x(i, j) = sum / l(i, i);
        }
    return x;
}

}  // namespace

Vec per_step_squared_errors(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    if (a.size() != b.size()) throw LengthError("per_step_squared_errors: length mismatch");
    Vec out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = squared_norm_diff(a[k], b[k]);
    return out;
}

RegretReport compute_regret(const std::vector<Vec>& observations, const FilterRun& kalman_run,
                            const std::vector<Vec>& online_predictions, std::size_t start) {
    const std::size_t len = observations.size();
    if (kalman_run.obs_predictions.size() != len || online_predictions.size() != len)
        throw LengthError("compute_regret: sequences are not aligned");
    if (start >= len) throw LengthError("compute_regret: start beyond the record");

    RegretReport report;
    report.start = start;
    report.N = len - 1;
    report.per_step_online.reserve(len - start);
    report.per_step_kalman.reserve(len - start);

    double online_sum = 0.0, kalman_sum = 0.0, square_loss = 0.0, mart = 0.0;
    for (std::size_t k = start; k < len; ++k) {
        const Vec& y = observations[k];
        const Vec& y_hat = kalman_run.obs_predictions[k];
        const Vec& y_tilde = online_predictions[k];
        const double lo = squared_norm_diff(y, y_tilde);
        const double lk = squared_norm_diff(y, y_hat);
        online_sum += lo;
        kalman_sum += lk;
        square_loss += squared_norm_diff(y_hat, y_tilde);
        for (std::size_t i = 0; i < y.size(); ++i)
            mart += (y[i] - y_hat[i]) * (y_hat[i] - y_tilde[i]);
        report.per_step_online.push_back(lo);
        report.per_step_kalman.push_back(lk);
    }
    report.regret = online_sum - kalman_sum;
    report.square_loss = square_loss;
    report.martingale_term = mart;
    report.identity_residual =
        std::abs(report.regret - report.square_loss - 2.0 * report.martingale_term);
    return report;
}

LogdetCheck check_logdet_lemma(const std::vector<Vec>& windows, std::size_t split,
                               double lambda) {
    if (split > windows.size()) throw LengthError("check_logdet_lemma: split beyond stream");
    LogdetCheck check;
    if (windows.empty()) {
        check.pass = true;
        return check;
    }
    const std::size_t dim = windows.front().size();

    Matrix vbar = kernels::gram_chunked(windows, 0, split);
    if (vbar.empty()) vbar = Matrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) vbar(i, i) += lambda;
    const double logdet_before = logdet_spd(vbar);

    Matrix v_inv = invert_spd(vbar);
    for (std::size_t j = split; j < windows.size(); ++j) {
        const Vec& z = windows[j];
        const Vec w = v_inv * z;
        const double s = 1.0 + dot(z, w);
        add_outer(v_inv, w, w, -1.0 / s);
        check.lhs += (s - 1.0) / s;  // Z^T V_bar_new^{-1} Z
        add_outer(vbar, z, z);
    }
    check.rhs = logdet_spd(vbar) - logdet_before;
    check.pass = check.lhs <= check.rhs + 1e-9;
    return check;
}

ArmaDiagnostics check_arma_bound(const std::vector<Vec>& observations,
                                 const StateSpaceModel& model, const KalmanSolution& solution,
                                 const FilterRun& run, std::size_t p) {
    ArmaDiagnostics diag;
    diag.poly = minimal_polynomial(model.A);
    const std::size_t d = diag.poly.degree;

    double max_power = 1.0;  // max ||A^i||_2 over i = 0..d-1
    Matrix power = Matrix::identity(model.state_dim());
    for (std::size_t i = 0; i < d; ++i) {
        if (i > 0) max_power = std::max(max_power, spectral_norm(power));
        power = power * model.A;
    }
    const double ck = spectral_norm(model.C) * spectral_norm(solution.K) * max_power;
    diag.delta_bound = static_cast<double>(d + 1) * diag.poly.l1_norm *
                       std::max(ck, 1.0) * std::sqrt(static_cast<double>(p));

    const std::size_t len = observations.size();
    diag.first_k = p + d;
    diag.pass = true;

    double sup_e = 0.0;
    std::size_t sup_through = 0;  // innovations 0..sup_through-1 folded into sup_e
    for (std::size_t k = diag.first_k; k < len; ++k) {
        while (sup_through < k) {
            sup_e = std::max(sup_e, norm2(run.innovations[sup_through]));
            ++sup_through;
        }
        Vec delta = past_window(observations, k, p);
        for (std::size_t i = 0; i < d; ++i) {
            const Vec past = past_window(observations, k - d + i, p);
            const double ai = diag.poly.coefficients[i];
            for (std::size_t j = 0; j < delta.size(); ++j) delta[j] -= ai * past[j];
        }
        const double dn = norm2(delta);
        diag.residual_norms.push_back(dn);
        const double bound = diag.delta_bound * sup_e;
        diag.max_ratio = std::max(diag.max_ratio, bound > 0.0 ? dn / bound : (dn > 0.0 ? 1e300 : 0.0));
        if (dn > bound) diag.pass = false;
    }
    diag.sup_innovation = sup_e;
    return diag;
}

PEReport check_persistency(const std::vector<Vec>& observations, std::size_t p,
                           const Matrix& noise_cov, double grid_ratio,
                           const std::function<Matrix(std::size_t)>& gamma_z_at) {
    const std::size_t len = observations.size();
    const std::size_t last_k = len - 1;
    const std::size_t m = observations.front().size();
    const std::size_t dim = m * p;
    if (last_k < p) throw LengthError("check_persistency: record shorter than the horizon");

    PEReport report;
    report.p = p;
    report.sigma_r_quarter = std::max(min_eigen_sym(noise_cov), 0.0) / 4.0;

    // geometric grid from the first k with an invertible Gram candidate
    std::size_t k = std::min(p + dim, last_k);
    while (true) {
        report.grid.push_back(k);
        if (k >= last_k) break;
        const std::size_t next =
            std::max(k + 1, static_cast<std::size_t>(std::ceil(static_cast<double>(k) * grid_ratio)));
        k = std::min(next, last_k);
    }

    Matrix gram(dim, dim);
    std::size_t t = p;  // next window index to fold in
    report.min_normalized_eig = 1e300;
    double stable_ratio = 1e300;
    std::vector<bool> holds(report.grid.size(), false);
    for (std::size_t gi = 0; gi < report.grid.size(); ++gi) {
        const std::size_t k_point = report.grid[gi];
        for (; t <= k_point; ++t) {
            const Vec z = past_window(observations, t, p);
            add_outer(gram, z, z);
        }
        const double lmin = min_eigen_spd(gram);
        const double count = static_cast<double>(k_point - p + 1);
        report.min_eigs.push_back(lmin);
        report.min_normalized_eig = std::min(report.min_normalized_eig, lmin / count);
        holds[gi] = lmin >= count * report.sigma_r_quarter;

        if (gamma_z_at) {
            // Lemma restated at k+1: Gram over p..k against (k-p+2)/32 Gamma_{Z,k+1}
            const Matrix gz = gamma_z_at(k_point + 1);
            const Matrix l = cholesky(gz);
            const Matrix normalized =
                lower_solve(l, lower_solve(l, gram).transposed());
            const double lm = min_eigen_spd(normalized);
            stable_ratio = std::min(stable_ratio, lm * 32.0 / (count + 1.0));
        }
    }
    if (gamma_z_at) report.stable_bound_ratio = stable_ratio;

    for (std::size_t gi = 0; gi < report.grid.size(); ++gi) {
        bool all = true;
        for (std::size_t gj = gi; gj < report.grid.size(); ++gj) all = all && holds[gj];
        if (all) {
            report.n0_hat = report.grid[gi];
            break;
        }
    }
    return report;
}

AlternativeRegret alternative_regret(const std::vector<Vec>& observations,
                                     const FilterRun& kalman_run, std::size_t p_star,
                                     double rho, double decay_scale) {
    if (p_star < 1) throw IndexError("alternative_regret: p_star must be >= 1");
    const std::size_t len = observations.size();
    if (p_star >= len) throw IndexError("alternative_regret: p_star must be < N");
    const std::size_t m = observations.front().size();
    const std::size_t dim = m * p_star;

    // zero-padded past windows over the full record
    std::vector<Vec> windows(len, Vec(dim, 0.0));
    for (std::size_t k = 0; k < len; ++k)
        for (std::size_t j = 0; j < p_star; ++j) {
            if (k < p_star - j) continue;  // y before time 0 is zero
            const Vec& y = observations[k - p_star + j];
            for (std::size_t i = 0; i < m; ++i) windows[k][j * m + i] = y[i];
        }

    Matrix gram = kernels::gram_chunked(windows, 0, len);
    const Matrix cross = kernels::cross_gram_chunked(observations, windows, 0, len);

    AlternativeRegret result;
    Matrix chol;
    try {
        chol = cholesky(gram);
    } catch (const SingularMatrixError&) {
        result.jittered = true;
        double trace = 0.0;
        for (std::size_t i = 0; i < dim; ++i) trace += gram(i, i);
        for (std::size_t i = 0; i < dim; ++i) gram(i, i) += 1e-10 * std::max(trace, 1.0);
        chol = cholesky(gram);
    }
    const Matrix fir = kernels::matmul(cross, cholesky_solve(chol, Matrix::identity(dim)));

    double fir_loss = 0.0;
    for (std::size_t k = 0; k < len; ++k)
        fir_loss += squared_norm_diff(observations[k], fir * windows[k]);
    double kalman_loss = 0.0;
    for (std::size_t k = 0; k < len; ++k)
        kalman_loss += squared_norm_diff(observations[k], kalman_run.obs_predictions[k]);

    result.fir_loss = fir_loss;
    result.kalman_loss = kalman_loss;
    result.difference = kalman_loss - fir_loss;

    // a posteriori membership in the exponential-decay class:
    // the tap multiplying y_{k-t} is block p_star - t (windows are oldest-first)
    result.decay_class_ok = true;
    for (std::size_t lag = 1; lag <= p_star; ++lag) {
        const Matrix tap = fir.block(0, (p_star - lag) * m, m, m);
        if (spectral_norm(tap) > decay_scale * std::pow(rho, static_cast<double>(lag))) {
            result.decay_class_ok = false;
            break;
        }
    }
    return result;
}

double state_regret(const std::vector<Vec>& true_states, const std::vector<Vec>& kalman_states,
                    const std::vector<Vec>& online_states, std::size_t start) {
    const std::size_t len = true_states.size();
    if (kalman_states.size() != len || online_states.size() != len)
        throw LengthError("state_regret: sequences are not aligned");
    double online = 0.0, kalman = 0.0;
    for (std::size_t k = start; k < len; ++k) {
        online += squared_norm_diff(true_states[k], online_states[k]);
        kalman += squared_norm_diff(true_states[k], kalman_states[k]);
    }
    return online - kalman;
}

}  // namespace opkf
