// Experiment runner for the online observation predictor and its Kalman
// baseline. Subcommands: run, summarize, presets, validate.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "opkf/experiment.hpp"
#include "opkf/kalman.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int cmd_run(const std::string& config_path, int jobs, const std::string& output_override,
            std::uint64_t seed_offset) {
    opkf::ExperimentConfig config;
    try {
        config = opkf::load_config(config_path);
        if (!output_override.empty()) config.output = output_override;
    } catch (const opkf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto records = opkf::run_experiment(config, jobs, seed_offset);
        const std::string dir = opkf::write_records(config, records);
        std::cout << "wrote " << records.size() << " run(s) to " << dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}

int cmd_summarize(const std::string& dir) {
    try {
        const auto records = opkf::read_records(dir);
        const auto rows = opkf::summarize(records);
        std::cout << opkf::summary_to_csv(rows);
    } catch (const opkf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}

int cmd_presets() {
    std::printf("%-18s %3s %3s %6s %6s %10s %10s %12s\n", "name", "n", "m", "kappa",
                "kmax", "rho(A)", "rho(A-KC)", "beta_floor");
    for (const opkf::Preset& p : opkf::preset_catalog()) {
        double rho_a = 0.0, rho_cl = 0.0, beta_floor = 0.0;
        try {
            rho_a = opkf::spectral_radius_gelfand(p.model.A).value;
            const opkf::KalmanSolution sol = opkf::solve_riccati(p.model);
            rho_cl = sol.rho_closed_loop;
            // Theoretical horizon-growth floor: kappa / ln(1/rho(A-KC)) for
            // non-explosive systems, 1 / ln(1/rho(A-KC)) for stable ones.
            const double denom = std::log(1.0 / rho_cl);
            beta_floor = (p.kappa >= 1 ? static_cast<double>(p.kappa) : 1.0) / denom;
        } catch (const std::exception& e) {
            std::cerr << p.name << ": " << e.what() << "\n";
            return kExitNumerical;
        }
        std::printf("%-18s %3zu %3zu %6zu %6zu %10.6f %10.6f %12.4f\n", p.name.c_str(),
                    p.model.state_dim(), p.model.obs_dim(), p.kappa, p.kappa_max, rho_a,
                    rho_cl, beta_floor);
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    try {
        const opkf::ExperimentConfig config = opkf::load_config(config_path);
        std::cout << opkf::canonical_json(config).dump(2) << "\n";
        std::cout << "hash: " << opkf::config_hash(config) << "\n";
    } catch (const opkf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online least-squares prediction vs. the steady-state Kalman filter"};
    app.require_subcommand(1);

    std::string config_path;
    std::string dir;
    std::string output_override;
    int jobs = 0;  // 0 = all hardware threads
    std::uint64_t seed_offset = 0;

    CLI::App* run = app.add_subcommand("run", "run a config across its seeds");
    run->add_option("config", config_path, "config file (JSON)")->required();
    run->add_option("--jobs", jobs, "max parallel seeds (default: hardware)");
    run->add_option("--output", output_override, "override the output directory");
    run->add_option("--seed-offset", seed_offset, "offset added to every seed");

    CLI::App* summ = app.add_subcommand("summarize", "recompute the summary for a run directory");
    summ->add_option("dir", dir, "directory containing runs/")->required();

    app.add_subcommand("presets", "list the preset catalog");

    CLI::App* val = app.add_subcommand("validate", "parse a config and print its canonical form");
    val->add_option("config", config_path, "config file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand("run")) return cmd_run(config_path, jobs, output_override, seed_offset);
    if (app.got_subcommand("summarize")) return cmd_summarize(dir);
    if (app.got_subcommand("presets")) return cmd_presets();
    return cmd_validate(config_path);
}
