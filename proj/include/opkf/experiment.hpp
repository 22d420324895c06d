#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opkf/analysis.hpp"
#include "opkf/predictor.hpp"
#include "opkf/sysmodel.hpp"

#include "json.hpp"

namespace opkf {

struct DiagnosticsConfig {
    bool logdet = false;
    bool arma = false;
    bool pe = false;
    bool whiteness = false;
    bool alternative_regret = false;
    double p_star_factor = 3.0;  // p* = ceil(p_star_factor * ln N)
    std::size_t f_step = 0;      // 0 disables the f-step predictor
    bool state_prediction = false;
};

/// A fully resolved experiment: model, horizon, seeds, schedule, diagnostics
/// toggles and the checkpoint grid for the regret curve.
struct ExperimentConfig {
    std::string preset;      // empty when the model is inline
    StateSpaceModel model;   // resolved either way
    std::size_t N = 0;       // last time index; the record holds N+1 observations
    std::vector<std::uint64_t> seeds;
    EpochSchedule schedule;
    DiagnosticsConfig diagnostics;
    std::vector<std::size_t> checkpoints;
    std::string output = "out";

    void validate() const;
};

/// Parses a config file (JSON with explicit keys; see README), fills
/// defaults, validates. ParseErrors carry the offending field.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j);

/// Canonical serialized form: every field present, keys sorted. Reloading
/// the canonical form yields an identical config; the hash is FNV-1a over
/// this string.
nlohmann::json canonical_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

struct RunRecord {
    std::uint64_t seed = 0;
    nlohmann::json payload;
};

/// Simulate -> Riccati (Sigma0 := P) -> Kalman filter -> online predictor ->
/// regret at checkpoints -> enabled diagnostics, for every seed. Seeds run
/// in parallel up to `jobs`; results are deterministic per seed regardless
/// of the thread count.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, int jobs = 1,
                                      std::uint64_t seed_offset = 0);

/// Writes runs/<seed>.json, summary.csv and summary.json under
/// <output>/<config-hash>/ (atomic: temp file + rename). Returns the
/// directory written.
std::string write_records(const ExperimentConfig& config,
                          const std::vector<RunRecord>& records);

struct SummaryRow {
    std::size_t checkpoint = 0;
    std::string stat;
    double value = 0.0;
};

/// Per-checkpoint median and quartiles of the regret across seeds, plus
/// median-regret ratios for checkpoint pairs (c, 8c). Quantiles use linear
/// interpolation on the sorted values (position q*(n-1)).
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

std::string summary_to_csv(const std::vector<SummaryRow>& rows);
nlohmann::json summary_to_json(const std::vector<SummaryRow>& rows);

/// Reads runs/<seed>.json files back from a directory (for the summarize verb).
std::vector<RunRecord> read_records(const std::string& run_dir);

/// Linear-interpolation quantile on sorted data, q in [0, 1].
double quantile_sorted(const Vec& sorted_values, double q);

}  // namespace opkf
