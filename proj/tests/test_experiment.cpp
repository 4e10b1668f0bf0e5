#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "qosc/error.hpp"
#include "qosc/experiment.hpp"
#include "qosc/field_io.hpp"

using namespace qosc;
using nlohmann::json;

namespace {

std::string config_error(const json& doc) {
    try {
        ExperimentConfig::from_json(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const Check& find_check(const RunReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    FAIL("missing check " << name);
    return r.checks.front();
}

RunReport run_quiet(json doc) {
    doc["output_dir"] = "";
    return run_experiment(ExperimentConfig::from_json(doc));
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("qosc_test_experiment_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(QOSC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const std::filesystem::path& p, const json& doc) { std::ofstream(p) << doc.dump(); }

}  // namespace

TEST_CASE("defaults_validate_for_every_experiment") {
    for (const auto& name : experiment_names()) {
        CAPTURE(name);
        const auto cfg = ExperimentConfig::from_json({{"experiment", name}});
        CHECK(cfg.experiment == name);
        CHECK(cfg.to_json() == default_config(name));
        CHECK_FALSE(cfg.tolerances.empty());
    }
}

TEST_CASE("config_errors_name_the_field") {
    CHECK(config_error({{"experiment", "nope"}}).find("experiment") != std::string::npos);
    CHECK(config_error(json::object()).find("experiment") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"grid", {{"depth", 3}}}}).find("grid.depth") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"grid", {{"n", 2.5}}}}).find("grid.n") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"grid", {{"dim", 2}}}}).find("grid.dim") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"time", {{"dt", -1.0}}}}).find("time.dt") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"constants", {{"c", 0.0}}}}).find("constants.c") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"tolerances", {{"energy_drift", -1.0}}}})
              .find("tolerances.energy_drift") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"seed", -3}}).find("seed") != std::string::npos);
    CHECK(config_error({{"experiment", "kernel"}, {"params", {{"times", {1.5}}}}}).find("params.times[0]") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "kernel"}, {"params", {{"times", {3000.0}}}}}).find("params.times[0]") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "kernel"}, {"grid", {{"dim", 3}, {"n", 8}}}}).find("grid.dim") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "hegerfeldt"}, {"time", {{"steps", 5000}}}}).find("time.steps") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "biprism"}, {"params", {{"modes", {{1, 1}, {1, 1}}}}}}).find("params.modes") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "biprism"}, {"params", {{"modes", {{1, 0}, {1, 1}}}}}}).find("params.modes[0]") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "coherent"}, {"params", {{"lambda", 0}}}}).find("params.lambda") !=
          std::string::npos);
}

TEST_CASE("source_errors_name_the_field") {
    const json wave = {{"type", "plane_wave"}, {"mode", {1, 0, 0}}, {"envelope", {{"type", "square"}}}};
    CHECK(config_error({{"experiment", "evolve"}, {"source", wave}}).find("source.envelope.type") != std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"source", {{"type", "laser"}}}}).find("source.type") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "evolve"}, {"source", {{"type", "gaussian"}, {"width", 0.1}}}})
              .find("source.center") != std::string::npos);
    CHECK(config_error({{"experiment", "se-maxwell-consistency"}, {"source", {{"type", "none"}}}}).find("source") !=
          std::string::npos);
}

TEST_CASE("config_loads_from_file") {
    const auto dir = scratch("load");
    write_file(dir / "c.json", {{"experiment", "biprism"}, {"seed", 7}});
    CHECK(ExperimentConfig::load(dir / "c.json").seed == 7);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(ExperimentConfig::load(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load(dir / "missing.json"), ConfigError);
}

TEST_CASE("fock_check_echoes_commutator_defect") {
    const auto r = run_quiet({{"experiment", "fock-check"}});
    CHECK(r.pass);
    CHECK(r.metrics["commutator_defect_diag"] == json({1.0, 1.0, 1.0, -3.0}));
    CHECK(find_check(r, "commutator_defect_error").value == 0.0);
}

TEST_CASE("biprism_one_photon_has_no_coincidences") {
    const auto r = run_quiet({{"experiment", "biprism"}});
    CHECK(r.pass);
    CHECK(find_check(r, "coincidence_probability").value < 1e-14);
    CHECK(r.metrics["singles_sum"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.metrics["coherent_g2"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("hegerfeldt_reports_both_leakages") {
    const auto r = run_quiet({{"experiment", "hegerfeldt"}});
    CHECK(r.pass);
    CHECK(find_check(r, "leakage_real").value < 1e-8);
    CHECK(find_check(r, "leakage_posfreq").value > 1e-3);
}

TEST_CASE("runs_are_deterministic") {
    const json doc = {{"experiment", "omega-check"}, {"grid", {{"n", 8}, {"box_length", 8.0}}}, {"seed", 11}};
    const auto a = run_quiet(doc), b = run_quiet(doc);
    CHECK(a.metrics == b.metrics);
    auto other = doc;
    other["seed"] = 12;
    CHECK(run_quiet(other).metrics != a.metrics);
}

TEST_CASE("report_schema") {
    const auto r = run_quiet({{"experiment", "se-maxwell-consistency"}, {"time", {{"steps", 200}, {"sample_every", 50}}}});
    const auto j = r.to_json();
    for (const char* key : {"experiment", "config", "metrics", "checks", "pass", "timings", "artifacts", "error"})
        CHECK(j.contains(key));
    CHECK(j["error"].is_null());
    CHECK(j["config"]["tolerances"]["consistency"] == 1e-6);
    const auto& ratio = find_check(r, "convergence_ratio");
    CHECK(ratio.comparison == "in");
    CHECK(ratio.threshold == 3.5);
    CHECK(ratio.threshold_high == 4.5);
    CHECK(j["timings"].contains("total_s"));
}

TEST_CASE("every_check_appears_once") {
    const auto r = run_quiet({{"experiment", "fock-check"}});
    for (std::size_t i = 0; i < r.checks.size(); ++i)
        for (std::size_t j = i + 1; j < r.checks.size(); ++j) CHECK(r.checks[i].name != r.checks[j].name);
}

TEST_CASE("evolve_writes_loadable_dumps") {
    const auto dir = scratch("dumps");
    auto cfg = ExperimentConfig::from_json({{"experiment", "evolve"}, {"time", {{"steps", 20}, {"sample_every", 10}}}});
    cfg.output_dir = dir.string();
    const auto r = run_experiment(cfg);
    CHECK(r.pass);
    REQUIRE(r.artifacts.size() == 3);
    const auto A = load_field(dir / "A_final.qf");
    CHECK(A.kind == FieldKind::A_perp);
    CHECK(A.time == doctest::Approx(0.2));
}

TEST_CASE("blow_up_is_recorded_in_report") {
    const json src = {{"type", "plane_wave"},
                      {"mode", {1, 0, 0}},
                      {"amplitude", 1e306},
                      {"envelope", {{"type", "constant"}}}};
    const auto r = run_quiet({{"experiment", "evolve"}, {"source", src}, {"time", {{"steps", 10}, {"sample_every", 1}}}});
    CHECK_FALSE(r.pass);
    CHECK(r.error.find("non-finite") != std::string::npos);
}

TEST_CASE("cli_exit_codes") {
    const auto dir = scratch("cli");
    write_file(dir / "ok.json", {{"experiment", "biprism"}});
    write_file(dir / "strict.json", {{"experiment", "biprism"}, {"tolerances", {{"coherent", 0.0}}}});
    write_file(dir / "bad.json", {{"experiment", "biprism"}, {"grid", {{"n", "eight"}}}});
    const std::string out = " --out " + (dir / "out").string();

    CHECK(cli("validate --config " + (dir / "ok.json").string()) == 0);
    CHECK(cli("validate --config " + (dir / "bad.json").string()) == 2);
    CHECK(cli("run --config " + (dir / "ok.json").string() + out) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "report.json"));
    CHECK(cli("run --config " + (dir / "strict.json").string() + out) == 1);
    CHECK(cli("run --config " + (dir / "missing.json").string()) == 2);
    CHECK(cli("run") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("run --config " + (dir / "ok.json").string() + out + " --seed 5") == 0);
    std::ifstream in(dir / "out" / "report.json");
    CHECK(json::parse(in)["config"]["seed"] == 5);
}
