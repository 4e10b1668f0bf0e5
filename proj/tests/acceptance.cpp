// Acceptance gate: one PASS/FAIL line per criterion with pinned tolerances and wall-clock limits.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qosc/error.hpp"
#include "qosc/experiment.hpp"

using namespace qosc;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<void(Outcome&)> body;
};

/// Run one config and require the named checks to pass.
void require(Outcome& out, json doc, const std::vector<std::string>& checks) {
    doc["output_dir"] = "";
    const auto report = run_experiment(ExperimentConfig::from_json(doc));
    if (!report.error.empty()) {
        out.pass = false;
        out.detail += " error=" + report.error;
    }
    for (const auto& name : checks) {
        const Check* found = nullptr;
        for (const auto& c : report.checks)
            if (c.name == name) found = &c;
        char buf[160];
        if (!found) {
            out.pass = false;
            std::snprintf(buf, sizeof buf, " %s=missing", name.c_str());
        } else {
            out.pass = out.pass && found->pass;
            if (found->comparison == "in")
                std::snprintf(buf, sizeof buf, " %s=%.3g in [%g,%g]", name.c_str(), found->value, found->threshold,
                              found->threshold_high);
            else
                std::snprintf(buf, sizeof buf, " %s=%.3g %s %g", name.c_str(), found->value, found->comparison.c_str(),
                              found->threshold);
        }
        out.detail += buf;
    }
}

json grid(int dim, int n, double box) { return {{"dim", dim}, {"n", n}, {"box_length", box}}; }

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "ladder_algebra", 1.0,
         [](Outcome& o) {
             for (int n_max : {1, 2, 3, 4, 8, 16, 30}) {
                 Outcome one;
                 require(one,
                         {{"experiment", "fock-check"},
                          {"params", {{"n_max", n_max}, {"ladder_levels", 30}}},
                          {"tolerances", {{"commutator_defect", 0.0}, {"matmul_agreement", 1e-12}, {"ladder", 1e-14}}}},
                         {"commutator_defect_error", "commutator_matmul_agreement", "ladder_max_error"});
                 o.pass = o.pass && one.pass;
                 if (n_max == 30 || !one.pass) o.detail = " n_max=" + std::to_string(n_max) + one.detail;
             }
         }},
        {2, "coherent_statistics", 1.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "fock-check"},
                      {"params", {{"alpha", {1.0, 0.0}}, {"coherent_n_max", 20}}},
                      {"tolerances", {{"coherent_p0", 1e-9}, {"coherent_mean", 1e-9}, {"coherent_sum", 1e-10}}}},
                     {"coherent_p0_error", "coherent_mean_error", "coherent_sum_error"});
         }},
        {3, "frequency_operator", 5.0,
         [](Outcome& o) {
             const json tol = {{"laplacian", 1e-10}, {"self_adjoint", 1e-12}, {"inverse", 1e-12}};
             const std::vector<std::string> names = {"laplacian_rel_error", "self_adjoint_defect",
                                                     "inverse_identity_error", "positivity_min"};
             o.detail = " [32^3]";
             require(o, {{"experiment", "omega-check"}, {"grid", grid(3, 32, 32.0)}, {"params", {{"pairs", 1}}},
                         {"tolerances", tol}},
                     names);
             o.detail += " [1D 4096]";
             require(o, {{"experiment", "omega-check"}, {"grid", grid(1, 4096, 4096.0)}, {"params", {{"pairs", 1}}},
                         {"tolerances", tol}},
                     names);
         }},
        {4, "parseval_100_pairs_32cubed", 10.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "omega-check"},
                      {"grid", grid(3, 32, 32.0)},
                      {"params", {{"pairs", 100}, {"trials", 1}}},
                      {"tolerances", {{"parseval", 1e-10}}}},
                     {"parseval_max_error"});
         }},
        {5, "free_conservation_1000_steps", 10.0,
         [](Outcome& o) {
             const json tol = {{"energy_drift", 1e-12}, {"norm_drift", 1e-12}};
             const json time = {{"dt", 0.01}, {"steps", 1000}, {"sample_every", 50}};
             o.detail = " [8^3]";
             require(o, {{"experiment", "evolve"}, {"grid", grid(3, 8, 1.0)}, {"time", time}, {"tolerances", tol}},
                     {"energy_drift", "norm_drift"});
             o.detail += " [1D 256]";
             require(o, {{"experiment", "evolve"}, {"grid", grid(1, 256, 1.0)}, {"time", time}, {"tolerances", tol}},
                     {"energy_drift", "norm_drift"});
         }},
        {6, "se_maxwell_consistency", 30.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "se-maxwell-consistency"},
                      {"time", {{"dt", 1e-3}, {"steps", 1000}, {"sample_every", 100}}},
                      {"tolerances", {{"consistency", 1e-6}, {"ratio_low", 3.5}, {"ratio_high", 4.5}}}},
                     {"consistency_rel_error", "convergence_ratio"});
         }},
        {7, "causality_vs_antilocality_1d_4096", 30.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "hegerfeldt"},
                      {"grid", grid(1, 4096, 4096.0)},
                      {"tolerances", {{"leakage_real", 1e-8}, {"leakage_posfreq_min", 1e-3}}}},
                     {"leakage_real", "leakage_posfreq"});
         }},
        {8, "equal_time_localization", 5.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "kernel"},
                      {"grid", grid(1, 4096, 4096.0)},
                      {"params", {{"times", {1.0}}}},
                      {"tolerances", {{"equal_time_offsite", 1e-10}}}},
                     {"equal_time_offsite_ratio"});
         }},
        {9, "commutator_identity_100_pairs", 10.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "omega-check"},
                      {"grid", grid(3, 16, 16.0)},
                      {"params", {{"pairs", 100}, {"trials", 1}, {"band", 0.0}}},
                      {"tolerances", {{"ad_commutator", 1e-10}}}},
                     {"ad_commutator_max_error"});
         }},
        {10, "coherent_response", 30.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "coherent"},
                      {"grid", grid(3, 8, 2.0 * 3.141592653589793)},
                      {"tolerances", {{"slope", 1e-6}, {"imag", 1e-12}, {"retarded", 1e-6}}}},
                     {"slope_rel_error", "expectation_imag_residue", "retarded_rel_error"});
         }},
        {11, "biprism_no_coincidence", 1.0,
         [](Outcome& o) {
             require(o,
                     {{"experiment", "biprism"},
                      {"tolerances", {{"coincidence_one_photon", 1e-14}, {"singles_sum", 1e-14}, {"coherent", 1e-8}}}},
                     {"coincidence_probability", "singles_sum_error", "coherent_coincidence_rel_error"});
         }},
    };
    return list;
}

}  // namespace

int main() {
    int failed = 0;
    for (const auto& c : criteria()) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const Error& e) {
            o.pass = false;
            o.detail += std::string(" exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s %2d %-36s %7.3f s (limit %g s%s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                    c.limit_s, in_time ? "" : ", too slow", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria().size()) - failed, criteria().size());
    return failed == 0 ? 0 : 1;
}
