#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "qosc/error.hpp"
#include "qosc/experiment.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_violation = 1;
constexpr int exit_usage = 2;

int run(const std::string& config_path, const std::optional<std::string>& out, const std::optional<std::uint64_t>& seed) {
    auto cfg = qosc::ExperimentConfig::load(config_path);
    if (out) cfg.output_dir = *out;
    if (seed) cfg.seed = *seed;

    const auto report = qosc::run_experiment(cfg);
    const auto doc = report.to_json().dump(2);
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        const auto path = std::filesystem::path(cfg.output_dir) / "report.json";
        std::ofstream f(path);
        f << doc << '\n';
        if (!f) throw qosc::FormatError("write to '" + path.string() + "' failed");
    }
    std::cout << doc << '\n';
    for (const auto& c : report.checks)
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << '\n';
    if (!report.error.empty()) std::cerr << "error: " << report.error << '\n';
    return report.pass ? exit_pass : exit_violation;
}

int validate(const std::string& config_path) {
    const auto cfg = qosc::ExperimentConfig::load(config_path);
    std::cout << cfg.to_json().dump(2) << '\n';
    return exit_pass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-oscillator field lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;

    auto* run_cmd = app.add_subcommand("run", "Run one experiment and write report.json");
    run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run_cmd->add_option("--out", out, "Output directory (overrides output_dir)");
    run_cmd->add_option("--seed", seed, "Random seed (overrides seed)");

    auto* validate_cmd = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
    validate_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_usage;
    }

    try {
        if (run_cmd->parsed()) return run(config_path, out, seed);
        return validate(config_path);
    } catch (const qosc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const qosc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_violation;
    }
}
