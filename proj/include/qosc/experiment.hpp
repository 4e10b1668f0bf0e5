#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qosc/fields.hpp"
#include "qosc/modes.hpp"

namespace qosc {

/// Names accepted in the "experiment" field.
const std::vector<std::string>& experiment_names();

/**
 * One experiment, parsed from a JSON document:
 *
 *   { "experiment": "hegerfeldt",
 *     "grid": {"dim": 1, "n": 4096, "box_length": 4096},
 *     "constants": {"c": 1, "eps0": 1, "hbar": 1},
 *     "source": {"type": "none"},
 *     "time": {"dt": 1, "steps": 1000, "sample_every": 100},
 *     "output_dir": "out", "seed": 1,
 *     "params": {...}, "tolerances": {...} }
 *
 * Every section is optional; missing entries take the experiment's defaults.
 * Unknown keys are rejected.
 */
struct ExperimentConfig {
    std::string experiment;
    int dim = 1;
    int n = 2;
    double box_length = 1.0;
    PhysicalConstants constants;
    nlohmann::json source;
    double dt = 0.0;
    int steps = 0;
    int sample_every = 1;
    std::string output_dir;
    std::uint64_t seed = 0;
    nlohmann::json params;
    nlohmann::json tolerances;

    /// Merge with defaults and validate; throws ConfigError naming the offending field.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    static ExperimentConfig load(const std::filesystem::path& path);
    /// Full echo, defaults included.
    nlohmann::json to_json() const;
};

/// Default document for an experiment.
nlohmann::json default_config(const std::string& experiment);

/// Build a current from a "source" section.
CurrentSource make_source(GridPtr grid, const nlohmann::json& section);

struct Check {
    std::string name;
    double value = 0.0;
    std::string comparison;  // "<", "<=", ">", "in"
    double threshold = 0.0;
    double threshold_high = 0.0;  // upper end for "in"
    bool pass = false;
};

struct RunReport {
    std::string experiment;
    nlohmann::json config;
    nlohmann::json metrics = nlohmann::json::object();
    std::vector<Check> checks;
    bool pass = false;
    nlohmann::json timings = nlohmann::json::object();
    std::vector<std::string> artifacts;
    std::string error;

    nlohmann::json to_json() const;
};

/// Run one experiment. Field dumps go to config.output_dir (skipped when empty).
/// Numerical failures are recorded in the report rather than thrown.
RunReport run_experiment(const ExperimentConfig& config);

}  // namespace qosc
