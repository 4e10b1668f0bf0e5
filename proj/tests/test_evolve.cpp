#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qosc/error.hpp"
#include "qosc/evolve.hpp"
#include "qosc/fields.hpp"

using namespace qosc;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs(const std::vector<cplx>& a) {
    double m = 0.0;
    for (const auto& v : a) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Closed-form integral of sin(w (t - s)) sin(pi s / T) ds over [0, t], t <= T.
double duhamel_sin(double w, double T, double t) {
    const double p = pi / T;
    // sin(w(t-s)) sin(p s) = [cos(w t - (w + p) s) - cos(w t - (w - p) s)] / 2
    auto part = [&](double q) {
        if (q == 0.0) return t * std::cos(w * t);
        return (std::sin(w * t) - std::sin(w * t - q * t)) / q;
    };
    return 0.5 * (part(w + p) - part(w - p));
}

}  // namespace

TEST_CASE("free_single_mode_is_closed_form_cosine") {
    const PhysicalConstants K{1.3, 0.6, 1.0};
    const auto g = make_grid(1, 64, 2.0 * pi, K);
    const int m = 3;
    const double a0 = 0.8, w = K.c * m, dt = 0.013;
    FieldSnapshot A(FieldKind::A_perp, 0.0, g), D(FieldKind::D, 0.0, g);
    for (std::size_t x = 0; x < g->size(); ++x) A.at(0, x) = a0 * std::cos(m * g->position(x)[0]);
    const auto traj = evolve_maxwell(A, D, {dt, 1000, 100});
    REQUIRE(traj.size() == 11);
    for (const auto& s : traj) {
        const double t = s.step * dt;
        CHECK(s.A.time == doctest::Approx(t));
        double err = 0.0;
        for (std::size_t x = 0; x < g->size(); ++x) {
            const double px = g->position(x)[0];
            err = std::max(err, std::abs(s.A.at(0, x) - a0 * std::cos(m * px) * std::cos(w * t)));
            err = std::max(err, std::abs(s.D.at(0, x) - K.eps0 * w * a0 * std::cos(m * px) * std::sin(w * t)));
        }
        CHECK(err < 1e-12);
    }
}

TEST_CASE("free_evolution_conserves_energy_and_stays_real") {
    std::mt19937_64 rng(21);
    const auto g = make_grid(3, 8, 1.0, {1.0, 1.7, 0.9});
    const auto f = fields_from_amplitudes(random_amplitudes(g, rng), 0.0);
    const auto traj = evolve_maxwell(f.A.real_part(), f.D.real_part(), {0.01, 1000, 250});
    const double e0 = em_energy(traj.front().A, traj.front().D);
    for (const auto& s : traj) {
        CHECK(std::abs(em_energy(s.A, s.D) - e0) < 1e-12 * e0);
        CHECK(s.A.imag_residue() < 1e-12);
        CHECK(s.D.imag_residue() < 1e-12);
        CHECK(divergence_ratio(to_spectral(s.A)) < 1e-10);
    }
}

TEST_CASE("free_se_conserves_norm") {
    std::mt19937_64 rng(22);
    const auto g = make_grid(3, 8, 1.0);
    const auto psi = psi_from_amplitudes(random_amplitudes(g, rng), 0.0);
    const auto traj = evolve_se(psi, {0.02, 1000, 500});
    const double n0 = scalar_product_x(psi, psi).real();
    REQUIRE(traj.size() == 3);
    for (const auto& p : traj) CHECK(std::abs(scalar_product_x(p, p).real() - n0) < 1e-12 * n0);
}

TEST_CASE("free_se_matches_exact_phases") {
    std::mt19937_64 rng(23);
    const auto g = make_grid(1, 128, 3.0);
    const auto c = random_amplitudes(g, rng);
    const auto traj = evolve_se(psi_from_amplitudes(c, 0.0), {0.05, 40, 40});
    const auto expect = psi_from_amplitudes(c, 2.0);
    CHECK(max_abs_diff(traj.back().data, expect.data) < 1e-11 * max_abs(expect.data));
}

TEST_CASE("sourced_maxwell_matches_duhamel_integral_at_second_order") {
    // 1D single mode driven by j = j0 cos(k x) sin(pi t / T); A(T) = j0 cos(k x) I(T) / (eps0 w).
    const PhysicalConstants K{1.0, 2.0, 1.0};
    const auto g = make_grid(1, 32, 2.0 * pi, K);
    const int m = 2;
    const double T = 3.0, j0 = 0.5, w = K.c * m;
    FieldSnapshot profile(FieldKind::j_perp, 0.0, g);
    for (std::size_t x = 0; x < g->size(); ++x) profile.at(0, x) = j0 * std::cos(m * g->position(x)[0]);
    const auto src = CurrentSource::from_profile(profile, TemporalProfile::sine_pulse(T));
    const FieldSnapshot A0(FieldKind::A_perp, 0.0, g), D0(FieldKind::D, 0.0, g);

    const double amp = j0 * duhamel_sin(w, T, T) / (K.eps0 * w);
    std::vector<double> errors;
    for (int steps : {200, 400, 800}) {
        const auto traj = evolve_maxwell(A0, D0, src, {T / steps, steps, steps});
        double err = 0.0;
        for (std::size_t x = 0; x < g->size(); ++x)
            err = std::max(err, std::abs(traj.back().A.at(0, x) - amp * std::cos(m * g->position(x)[0])));
        errors.push_back(err / std::abs(amp));
    }
    CHECK(errors[0] < 1e-4);
    CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(errors[1] / errors[2] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("sourced_se_agrees_with_build_psi_of_maxwell") {
    std::mt19937_64 rng(24);
    const auto g = make_grid(3, 8, 1.0, {1.0, 0.7, 1.3});
    const auto bump = [](const Vec3& r) {
        const double d2 = std::pow(r[0] - 0.5, 2) + std::pow(r[1] - 0.4, 2) + std::pow(r[2] - 0.6, 2);
        return std::exp(-d2 / 0.03);
    };
    const auto src = CurrentSource::separable(g, bump, {1.0, 0.5, 0.0}, TemporalProfile::sine_pulse(1.0));
    const auto f = fields_from_amplitudes(random_amplitudes(g, rng), 0.0);
    const EvolveOptions opt{0.01, 150, 50};
    const auto mx = evolve_maxwell(f.A.real_part(), f.D.real_part(), src, opt);
    const auto se = evolve_se(build_psi(f.A.real_part(), f.D.real_part()), src, opt);
    REQUIRE(mx.size() == se.size());
    for (std::size_t i = 0; i < se.size(); ++i) {
        const auto rebuilt = build_psi(mx[i].A.real_part(), mx[i].D.real_part());
        CHECK(max_abs_diff(rebuilt.data, se[i].data) < 1e-12 * max_abs(se[i].data));
        CHECK(mx[i].A.imag_residue() < 1e-12);
    }
}

TEST_CASE("evolution_rejects_bad_input") {
    const auto g = make_grid(1, 16, 1.0);
    FieldSnapshot A(FieldKind::A_perp, 0.0, g), D(FieldKind::D, 0.0, g);
    CHECK_THROWS_AS(evolve_maxwell(A, D, {0.0, 10}), DomainError);
    CHECK_THROWS_AS(evolve_maxwell(A, D, {0.1, -1}), DomainError);
    CHECK_THROWS_AS(evolve_se(A, {0.1, 1}), DomainError);
    FieldSnapshot later(FieldKind::D, 1.0, g);
    CHECK_THROWS_AS(evolve_maxwell(A, later, {0.1, 1}), DomainError);
    A.at(0, 3) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(evolve_maxwell(A, D, {0.1, 1}), PropagationError);

    // growth to overflow is caught
    FieldSnapshot profile(FieldKind::j_perp, 0.0, g);
    profile.at(0, 1) = 1.0;
    const auto huge = CurrentSource::from_profile(profile, TemporalProfile::constant(1e308));
    CHECK_THROWS_AS(evolve_maxwell(FieldSnapshot(FieldKind::A_perp, 0.0, g), D, huge, {1.0, 50}), PropagationError);
}

TEST_CASE("zero_steps_returns_initial_state") {
    const auto g = make_grid(1, 16, 1.0);
    FieldSnapshot psi(FieldKind::psi, 0.5, g);
    const auto traj = evolve_se(psi, {0.1, 0});
    REQUIRE(traj.size() == 1);
    CHECK(traj[0].time == 0.5);
}
