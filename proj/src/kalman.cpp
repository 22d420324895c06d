#include "opkf/kalman.hpp"

#include <cmath>

#include "opkf/linalg.hpp"

namespace opkf {

KalmanSolution solve_riccati(const StateSpaceModel& model, double tol, std::size_t max_iter) {
    model.validate_structure();
    if (min_eigen_sym(model.R) <= 0.0)
        throw ConfigError("solve_riccati: R must be positive definite");

    const Matrix& a = model.A;
    const Matrix& c = model.C;
    const Matrix at = a.transposed();
    const Matrix ct = c.transposed();

    Matrix p = model.Q;
    KalmanSolution sol;
    bool converged = false;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        // P+ = A P A^T - A P C^T (C P C^T + R)^{-1} C P A^T + Q
        const Matrix pct = p * ct;             // n x m
        const Matrix s = c * pct + model.R;    // innovation covariance at this iterate
        const Matrix apct = a * pct;           // n x m
        const Matrix gain_term = apct * solve_spd(s, apct.transposed());
        Matrix next = a * p * at - gain_term + model.Q;
        // enforce symmetry against roundoff drift
        for (std::size_t i = 0; i < next.rows(); ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double v = 0.5 * (next(i, j) + next(j, i));
                next(i, j) = v;
                next(j, i) = v;
            }
        const double change = (next - p).frobenius_norm();
        const double scale = std::max(next.frobenius_norm(), 1e-300);
        p = std::move(next);
        sol.iterations = it;
        if (change <= tol * scale) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("solve_riccati: no convergence after " +
                               std::to_string(max_iter) + " iterations");

    sol.P = p;
    const Matrix pct = p * ct;
    sol.R_bar = c * pct + model.R;
    sol.K = a * pct * invert_spd(sol.R_bar);
    sol.closed_loop = a - sol.K * c;
    sol.rho_closed_loop = spectral_radius_gelfand(sol.closed_loop).value;

    const Matrix recon = sol.closed_loop * p * sol.closed_loop.transposed() + model.Q +
                         sol.K * model.R * sol.K.transposed();
    sol.residual = (p - recon).frobenius_norm() / std::max(p.frobenius_norm(), 1e-300);
    if (!sol.P.all_finite() || !sol.K.all_finite())
        throw NotFiniteError("solve_riccati: non-finite solution");
    return sol;
}

FilterRun run_filter(const KalmanSolution& solution, const StateSpaceModel& model,
                     const Trajectory& traj) {
    const std::size_t n = model.state_dim();
    const std::size_t m = model.obs_dim();
    if (solution.K.rows() != n || solution.K.cols() != m)
        throw DimensionError("run_filter: gain dimension mismatch");

    FilterRun run;
    const std::size_t count = traj.observations.size();
    run.state_predictions.reserve(count);
    run.obs_predictions.reserve(count);
    run.innovations.reserve(count);

    Vec x_hat(n, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        Vec y_hat = model.C * x_hat;
        Vec e = traj.observations[k] - y_hat;
        run.state_predictions.push_back(x_hat);
        run.obs_predictions.push_back(std::move(y_hat));
        x_hat = model.A * x_hat + solution.K * e;
        run.innovations.push_back(std::move(e));
    }
    return run;
}

CovarianceDiagnostics state_covariances(const KalmanSolution& solution,
                                        const StateSpaceModel& model, std::size_t k_max) {
    if (k_max < 1) throw LengthError("state_covariances: k_max must be >= 1");
    const Matrix& a = model.A;
    const Matrix at = a.transposed();
    const Matrix drive = solution.K * solution.R_bar * solution.K.transposed();

    CovarianceDiagnostics diag;
    diag.gamma.reserve(k_max + 1);
    diag.gamma.push_back(Matrix(a.rows(), a.rows()));  // Gamma_0 = 0 (x_hat_0 = 0)
    for (std::size_t k = 1; k <= k_max; ++k)
        diag.gamma.push_back(a * diag.gamma.back() * at + drive);

    const double rho = spectral_radius_gelfand(a).value;
    if (rho < 1.0 - 1e-6) {
        Matrix g = diag.gamma.back();
        for (std::size_t it = 0; it < 1000000; ++it) {
            Matrix next = a * g * at + drive;
            const double change = (next - g).frobenius_norm();
            const double scale = std::max(next.frobenius_norm(), 1e-300);
            g = std::move(next);
            if (change <= 1e-12 * scale) {
                diag.gamma_inf = g;
                break;
            }
        }
        if (!diag.gamma_inf)
            throw ConvergenceError("state_covariances: Lyapunov iteration stalled");
    }
    return diag;
}

Matrix sigma_e(const KalmanSolution& solution, const StateSpaceModel& model, std::size_t p) {
    const std::size_t m = model.obs_dim();
    const Matrix toep = toeplitz_response(model.A, model.C, solution.K, p);
    Matrix rbar_diag(p * m, p * m);
    for (std::size_t b = 0; b < p; ++b) rbar_diag.set_block(b * m, b * m, solution.R_bar);
    return toep * rbar_diag * toep.transposed();
}

Matrix gamma_z(const KalmanSolution& solution, const StateSpaceModel& model,
               const CovarianceDiagnostics& diag, std::size_t p, std::size_t t) {
    if (t < p) throw IndexError("gamma_z: t must be >= p");
    if (t - p >= diag.gamma.size())
        throw IndexError("gamma_z: Gamma_{t-p} not available, increase k_max");
    const Matrix obs = observability_matrix(model.A, model.C, p);
    return obs * diag.gamma[t - p] * obs.transposed() + sigma_e(solution, model, p);
}

WhitenessReport innovation_whiteness(const FilterRun& run, std::size_t max_lag) {
    const std::size_t count = run.innovations.size();
    if (max_lag < 1) throw LengthError("innovation_whiteness: max_lag must be >= 1");
    if (count < 100 * max_lag)
        throw LengthError("innovation_whiteness: need at least 100*max_lag innovations");
    const std::size_t m = run.innovations.front().size();

    WhitenessReport report;
    report.max_lag = max_lag;
    report.sample_count = count;
    report.threshold = 4.0 / std::sqrt(static_cast<double>(count));

    Matrix c0(m, m);
    for (const Vec& e : run.innovations) add_outer(c0, e, e);
    c0 *= 1.0 / static_cast<double>(count);
    report.lag0_covariance = c0;

    Vec norm(m);
    for (std::size_t i = 0; i < m; ++i) norm[i] = std::sqrt(std::max(c0(i, i), 1e-300));

    report.pass = true;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        Matrix cl(m, m);
        for (std::size_t k = 0; k + lag < count; ++k)
            add_outer(cl, run.innovations[k + lag], run.innovations[k]);
        cl *= 1.0 / static_cast<double>(count - lag);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                cl(i, j) /= norm[i] * norm[j];
                report.max_abs_correlation =
                    std::max(report.max_abs_correlation, std::abs(cl(i, j)));
            }
        report.correlations.push_back(std::move(cl));
    }
    if (report.max_abs_correlation > report.threshold) report.pass = false;
    return report;
}

}  // namespace opkf
