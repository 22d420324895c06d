#include "opkf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace opkf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw ConfigError("field '" + field + "' must be a nested array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols) throw ConfigError("field '" + field + "' has ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number())
                throw ConfigError("field '" + field + "' has a non-numeric entry");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

std::size_t default_t_init(double beta) {
    std::size_t t = 2;
    while (static_cast<double>(t) <= 8.0 * beta) t *= 2;
    return t;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct PhaseTimer {
    json& sink;
    std::string key;
    double start;
    PhaseTimer(json& sink_, std::string key_) : sink(sink_), key(std::move(key_)),
                                                start(now_seconds()) {}
    ~PhaseTimer() { sink[key] = now_seconds() - start; }
};

void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
    }
    fs::rename(tmp, path);
}

}  // namespace

void ExperimentConfig::validate() const {
    model.validate_structure();
    schedule.validate();
    if (N < schedule.T_init)
        throw ConfigError("N must be at least schedule.T_init");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (checkpoints.empty()) throw ConfigError("at least one checkpoint is required");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > N)
            throw ConfigError("checkpoints must lie in [1, N]");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw ConfigError("checkpoints must be strictly increasing");
    }
    if (diagnostics.state_prediction) {
        if (diagnostics.f_step < model.state_dim())
            throw ConfigError("state_prediction requires f_step >= state dimension");
    }
    if (diagnostics.alternative_regret && diagnostics.p_star_factor <= 0.0)
        throw ConfigError("p_star_factor must be positive");
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be an object");
    ExperimentConfig config;

    if (!j.contains("model")) throw ConfigError("missing field 'model'");
    const json& jm = j.at("model");
    if (jm.is_string() || (jm.is_object() && jm.contains("preset"))) {
        config.preset = jm.is_string() ? jm.get<std::string>()
                                       : jm.at("preset").get<std::string>();
        config.model = find_preset(config.preset).model;
    } else if (jm.is_object()) {
        for (const char* f : {"A", "C", "Q", "R"})
            if (!jm.contains(f))
                throw ConfigError(std::string("inline model: missing matrix '") + f + "'");
        config.model.A = matrix_from_json(jm.at("A"), "model.A");
        config.model.C = matrix_from_json(jm.at("C"), "model.C");
        config.model.Q = matrix_from_json(jm.at("Q"), "model.Q");
        config.model.R = matrix_from_json(jm.at("R"), "model.R");
        config.model.Sigma0 = jm.contains("Sigma0")
                                  ? matrix_from_json(jm.at("Sigma0"), "model.Sigma0")
                                  : config.model.Q;
    } else {
        throw ConfigError("field 'model' must be a preset name or inline matrices");
    }

    if (!j.contains("N")) throw ConfigError("missing field 'N'");
    config.N = j.at("N").get<std::size_t>();

    config.schedule.beta = 2.0;
    config.schedule.lambda = 1.0;
    if (j.contains("schedule")) {
        const json& js = j.at("schedule");
        if (js.contains("beta")) config.schedule.beta = js.at("beta").get<double>();
        if (js.contains("lambda")) config.schedule.lambda = js.at("lambda").get<double>();
        config.schedule.T_init = js.contains("T_init")
                                     ? js.at("T_init").get<std::size_t>()
                                     : default_t_init(config.schedule.beta);
    } else {
        config.schedule.T_init = default_t_init(config.schedule.beta);
    }

    if (j.contains("seeds")) {
        for (const auto& s : j.at("seeds")) config.seeds.push_back(s.get<std::uint64_t>());
    } else {
        config.seeds = {1};
    }

    if (j.contains("diagnostics")) {
        const json& jd = j.at("diagnostics");
        auto flag = [&jd](const char* key, bool fallback) {
            return jd.contains(key) ? jd.at(key).get<bool>() : fallback;
        };
        config.diagnostics.logdet = flag("logdet", false);
        config.diagnostics.arma = flag("arma", false);
        config.diagnostics.pe = flag("pe", false);
        config.diagnostics.whiteness = flag("whiteness", false);
        config.diagnostics.alternative_regret = flag("alternative_regret", false);
        config.diagnostics.state_prediction = flag("state_prediction", false);
        if (jd.contains("p_star_factor"))
            config.diagnostics.p_star_factor = jd.at("p_star_factor").get<double>();
        if (jd.contains("f_step"))
            config.diagnostics.f_step = jd.at("f_step").get<std::size_t>();
    }

    if (j.contains("checkpoints")) {
        for (const auto& c : j.at("checkpoints"))
            config.checkpoints.push_back(c.get<std::size_t>());
    } else {
        config.checkpoints = {config.N};
    }
    if (j.contains("output")) config.output = j.at("output").get<std::string>();

    try {
        config.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("config validation: ") + e.what());
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    return parse_config(j);
}

json canonical_json(const ExperimentConfig& config) {
    json j;
    if (!config.preset.empty()) {
        j["model"] = {{"preset", config.preset}};
    } else {
        j["model"] = {{"A", matrix_to_json(config.model.A)},
                      {"C", matrix_to_json(config.model.C)},
                      {"Q", matrix_to_json(config.model.Q)},
                      {"R", matrix_to_json(config.model.R)},
                      {"Sigma0", matrix_to_json(config.model.Sigma0)}};
    }
    j["N"] = config.N;
    j["seeds"] = config.seeds;
    j["schedule"] = {{"T_init", config.schedule.T_init},
                     {"beta", config.schedule.beta},
                     {"lambda", config.schedule.lambda}};
    j["diagnostics"] = {{"logdet", config.diagnostics.logdet},
                        {"arma", config.diagnostics.arma},
                        {"pe", config.diagnostics.pe},
                        {"whiteness", config.diagnostics.whiteness},
                        {"alternative_regret", config.diagnostics.alternative_regret},
                        {"p_star_factor", config.diagnostics.p_star_factor},
                        {"f_step", config.diagnostics.f_step},
                        {"state_prediction", config.diagnostics.state_prediction}};
    j["checkpoints"] = config.checkpoints;
    j["output"] = config.output;
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string canon = canonical_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return std::string(buf);
}

namespace {

json run_one_seed(const ExperimentConfig& config, const StateSpaceModel& model,
                  const KalmanSolution& sol, std::uint64_t seed, const std::string& hash) {
    json record;
    record["seed"] = seed;
    record["config_hash"] = hash;
    record["riccati"] = {{"residual", sol.residual},
                         {"rho_closed_loop", sol.rho_closed_loop},
                         {"iterations", sol.iterations}};
    json timings;

    Trajectory traj;
    {
        PhaseTimer t(timings, "simulate_s");
        traj = simulate(model, config.N, seed);
    }
    FilterRun kalman_run;
    {
        PhaseTimer t(timings, "filter_s");
        kalman_run = run_filter(sol, model, traj);
    }
    PredictionLog log;
    {
        PhaseTimer t(timings, "online_s");
        log = run_online(traj.observations, config.schedule);
    }

    RegretReport regret;
    {
        PhaseTimer t(timings, "regret_s");
        regret = compute_regret(traj.observations, kalman_run, log.predictions, 1);
    }
    record["regret"] = {{"N", regret.N},
                        {"R_N", regret.regret},
                        {"square_loss", regret.square_loss},
                        {"martingale_term", regret.martingale_term},
                        {"identity_residual", regret.identity_residual}};

    json curve = json::array();
    {
        double cum = 0.0;
        std::size_t next = 0;
        for (std::size_t k = 1; k <= regret.N && next < config.checkpoints.size(); ++k) {
            cum += regret.per_step_online[k - 1] - regret.per_step_kalman[k - 1];
            while (next < config.checkpoints.size() && config.checkpoints[next] == k) {
                curve.push_back({{"N", k}, {"R_N", cum}});
                ++next;
            }
        }
    }
    record["regret_curve"] = std::move(curve);

    json diagnostics;
    const DiagnosticsConfig& toggles = config.diagnostics;
    PhaseTimer t_diag(timings, "diagnostics_s");

    if (toggles.whiteness) {
        const WhitenessReport w = innovation_whiteness(kalman_run, 5);
        diagnostics["whiteness"] = {{"max_lag", w.max_lag},
                                    {"threshold", w.threshold},
                                    {"max_abs_correlation", w.max_abs_correlation},
                                    {"pass", w.pass}};
    }
    if (toggles.logdet && !log.epochs.empty()) {
        json items = json::array();
        bool all_pass = true;
        for (const EpochInfo& e : log.epochs) {
            const std::size_t stop = std::min(2 * e.start - 1, traj.observations.size() - 1);
            const std::vector<Vec> windows =
                collect_windows(traj.observations, e.horizon, e.horizon, stop);
            const LogdetCheck check =
                check_logdet_lemma(windows, e.start - e.horizon, config.schedule.lambda);
            items.push_back({{"epoch_start", e.start},
                             {"p", e.horizon},
                             {"lhs", check.lhs},
                             {"rhs", check.rhs},
                             {"pass", check.pass}});
            all_pass = all_pass && check.pass;
        }
        diagnostics["logdet"] = {{"epochs", std::move(items)}, {"all_pass", all_pass}};
    }
    if (toggles.arma && !log.epochs.empty()) {
        const ArmaDiagnostics arma =
            check_arma_bound(traj.observations, model, sol, kalman_run, log.final_p);
        diagnostics["arma"] = {{"degree", arma.poly.degree},
                               {"l1_norm", arma.poly.l1_norm},
                               {"delta", arma.delta_bound},
                               {"sup_innovation", arma.sup_innovation},
                               {"max_ratio", arma.max_ratio},
                               {"pass", arma.pass}};
    }
    if (toggles.pe && !log.epochs.empty()) {
        const std::size_t p = log.final_p;
        std::function<Matrix(std::size_t)> gamma_at;
        CovarianceDiagnostics cov;
        if (spectral_radius_gelfand(model.A).value < 1.0 - 1e-6) {
            cov = state_covariances(sol, model, config.N);
            gamma_at = [&sol, &model, &cov, p](std::size_t t) {
                return gamma_z(sol, model, cov, p, t);
            };
        }
        const PEReport pe = check_persistency(traj.observations, p, model.R, 1.25, gamma_at);
        json jpe = {{"p", pe.p},
                    {"sigma_r_quarter", pe.sigma_r_quarter},
                    {"min_normalized_eig", pe.min_normalized_eig},
                    {"grid_points", pe.grid.size()}};
        if (pe.n0_hat) jpe["n0_hat"] = *pe.n0_hat;
        if (pe.stable_bound_ratio) jpe["stable_bound_ratio"] = *pe.stable_bound_ratio;
        diagnostics["pe"] = std::move(jpe);
    }
    if (toggles.alternative_regret) {
        const std::size_t p_star = static_cast<std::size_t>(
            std::ceil(toggles.p_star_factor * std::log(static_cast<double>(config.N))));
        const double rho = 0.5 * (1.0 + sol.rho_closed_loop);
        const double scale =
            4.0 * std::max(1.0, spectral_norm(model.C) * spectral_norm(sol.K));
        const AlternativeRegret alt =
            alternative_regret(traj.observations, kalman_run, p_star, rho, scale);
        diagnostics["alternative_regret"] = {{"p_star", p_star},
                                             {"kalman_loss", alt.kalman_loss},
                                             {"fir_loss", alt.fir_loss},
                                             {"difference", alt.difference},
                                             {"decay_class_ok", alt.decay_class_ok},
                                             {"jittered", alt.jittered}};
    }
    if (toggles.f_step >= 1) {
        const MultistepLog mlog =
            run_online_multistep(traj.observations, config.schedule, toggles.f_step);
        json jf = {{"f", toggles.f_step}, {"epochs", mlog.epochs.size()}};
        if (toggles.state_prediction) {
            const Matrix obs_f = observability_matrix(model.A, model.C, toggles.f_step);
            const Matrix pinv = pseudo_inverse_tall(obs_f);
            std::vector<Vec> x_tilde(mlog.predictions.size());
            for (std::size_t k = 0; k < mlog.predictions.size(); ++k)
                x_tilde[k] = pinv * mlog.predictions[k];
            jf["state_regret"] =
                state_regret(traj.states, kalman_run.state_predictions, x_tilde, 1);
            json sr_curve = json::array();
            const Vec online_err = per_step_squared_errors(traj.states, x_tilde);
            const Vec kalman_err =
                per_step_squared_errors(traj.states, kalman_run.state_predictions);
            double cum = 0.0;
            std::size_t next = 0;
            for (std::size_t k = 1; k < online_err.size() && next < config.checkpoints.size();
                 ++k) {
                cum += online_err[k] - kalman_err[k];
                while (next < config.checkpoints.size() && config.checkpoints[next] == k) {
                    sr_curve.push_back({{"N", k}, {"R_x_N", cum}});
                    ++next;
                }
            }
            jf["state_regret_curve"] = std::move(sr_curve);
        }
        diagnostics["f_step"] = std::move(jf);
    }

    record["diagnostics"] = std::move(diagnostics);
    record["timings"] = std::move(timings);
    return record;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, int jobs,
                                      std::uint64_t seed_offset) {
    config.validate();
    const std::string hash = config_hash(config);

    KalmanSolution sol;
    try {
        sol = solve_riccati(config.model);
    } catch (const Error& e) {
        throw Error(std::string("phase riccati: ") + e.what());
    }
    StateSpaceModel model = config.model;
    model.Sigma0 = sol.P;  // steady-state initial covariance

    const std::size_t count = config.seeds.size();
    std::vector<RunRecord> records(count);
    std::vector<std::string> failures(count);

#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long i = 0; i < static_cast<long>(count); ++i) {
        const std::uint64_t seed = config.seeds[static_cast<std::size_t>(i)] + seed_offset;
        try {
            records[static_cast<std::size_t>(i)] = {
                seed, run_one_seed(config, model, sol, seed, hash)};
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] =
                "seed " + std::to_string(seed) + ": " + e.what();
        }
    }
    for (const std::string& f : failures)
        if (!f.empty()) throw Error(f);
    return records;
}

double quantile_sorted(const Vec& sorted_values, double q) {
    if (sorted_values.empty()) throw LengthError("quantile of empty set");
    const std::size_t n = sorted_values.size();
    if (n == 1) return sorted_values[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    if (records.empty()) throw LengthError("summarize: no records");
    std::map<std::size_t, Vec> by_checkpoint;
    for (const RunRecord& r : records)
        for (const auto& point : r.payload.at("regret_curve"))
            by_checkpoint[point.at("N").get<std::size_t>()].push_back(
                point.at("R_N").get<double>());

    std::vector<SummaryRow> rows;
    std::map<std::size_t, double> medians;
    for (auto& [cp, values] : by_checkpoint) {
        std::sort(values.begin(), values.end());
        const double med = quantile_sorted(values, 0.5);
        medians[cp] = med;
        rows.push_back({cp, "median", med});
        rows.push_back({cp, "q25", quantile_sorted(values, 0.25)});
        rows.push_back({cp, "q75", quantile_sorted(values, 0.75)});
        rows.push_back({cp, "count", static_cast<double>(values.size())});
    }
    for (const auto& [cp, med] : medians) {
        const auto base = medians.find(cp / 8);
        if (cp % 8 == 0 && base != medians.end() && base->second != 0.0)
            rows.push_back({cp, "median_ratio_8x", med / base->second});
    }
    return rows;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "checkpoint_N,stat,value\n";
    char buf[64];
    for (const SummaryRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.value);
        out += std::to_string(r.checkpoint) + "," + r.stat + "," + buf + "\n";
    }
    return out;
}

json summary_to_json(const std::vector<SummaryRow>& rows) {
    json j = json::array();
    for (const SummaryRow& r : rows)
        j.push_back({{"checkpoint_N", r.checkpoint}, {"stat", r.stat}, {"value", r.value}});
    return j;
}

std::string write_records(const ExperimentConfig& config,
                          const std::vector<RunRecord>& records) {
    const fs::path dir = fs::path(config.output) / config_hash(config);
    fs::create_directories(dir / "runs");
    atomic_write(dir / "config.json", canonical_json(config).dump(2) + "\n");
    for (const RunRecord& r : records)
        atomic_write(dir / "runs" / (std::to_string(r.seed) + ".json"),
                     r.payload.dump(2) + "\n");
    const std::vector<SummaryRow> rows = summarize(records);
    atomic_write(dir / "summary.csv", summary_to_csv(rows));
    atomic_write(dir / "summary.json", summary_to_json(rows).dump(2) + "\n");
    return dir.string();
}

std::vector<RunRecord> read_records(const std::string& run_dir) {
    const fs::path runs = fs::path(run_dir) / "runs";
    if (!fs::is_directory(runs))
        throw ConfigError("no runs/ directory under " + run_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(runs))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<RunRecord> records;
    for (const fs::path& f : files) {
        std::ifstream in(f);
        RunRecord r;
        r.payload = json::parse(in);
        r.seed = r.payload.at("seed").get<std::uint64_t>();
        records.push_back(std::move(r));
    }
    if (records.empty()) throw ConfigError("no run records under " + run_dir);
    return records;
}

}  // namespace opkf
