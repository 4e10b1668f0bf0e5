#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "qosc/error.hpp"
#include "qosc/modes.hpp"

using namespace qosc;

namespace {

double norm3(const Vec3& v) { return std::sqrt(dot(v, v)); }

}  // namespace

TEST_CASE("kgrid_1d_two_points_standard_ordering") {
    const auto g = build_kgrid(1, 2, 2.0 * std::numbers::pi);
    REQUIRE(g.size() == 2);
    CHECK(g.k(0)[0] == 0.0);
    CHECK(g.k(1)[0] == doctest::Approx(-1.0));
    CHECK(g.omega(1) == doctest::Approx(1.0));
}

TEST_CASE("kgrid_1d_four_points_omega") {
    const auto g = build_kgrid(1, 4, 2.0 * std::numbers::pi);
    const double expected[] = {0.0, 1.0, 2.0, 1.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.omega(i) == doctest::Approx(expected[i]).epsilon(1e-15));
}

TEST_CASE("kgrid_3d_zero_mode_count") {
    const auto g = build_kgrid(3, 4, 1.0);
    int zero = 0, positive = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_zero_mode(i)) {
            ++zero;
            CHECK(g.weight(i) == 0.0);
        } else if (g.weight(i) > 0.0 && std::isfinite(g.weight(i))) {
            ++positive;
        }
    }
    CHECK(zero == 1);
    CHECK(positive == 63);
}

TEST_CASE("kgrid_weight_is_covariant_measure") {
    const auto g = build_kgrid(3, 6, 3.0, {2.0, 1.0, 1.0});
    const double dk = 2.0 * std::numbers::pi / 3.0;
    for (std::size_t i = 1; i < g.size(); ++i)
        CHECK(g.weight(i) == doctest::Approx(std::pow(dk, 3) / (std::pow(2.0 * std::numbers::pi, 3) * g.omega(i))));
}

TEST_CASE("kgrid_closed_under_negation") {
    for (int n : {4, 5}) {
        const auto g = build_kgrid(3, n, 2.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto j = g.negated_index(i);
            const auto mi = g.integer_index(i), mj = g.integer_index(j);
            for (int a = 0; a < 3; ++a) CHECK(((mi[a] + mj[a]) % n + n) % n == 0);
            CHECK(g.negated_index(j) == i);
            CHECK(g.omega(i) == g.omega(j));
        }
    }
}

TEST_CASE("kgrid_rejects_bad_sizes") {
    CHECK_THROWS_AS(build_kgrid(1, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(build_kgrid(1, 8, 0.0), ConfigError);
    CHECK_THROWS_AS(build_kgrid(2, 8, 1.0), ConfigError);
    CHECK_THROWS_AS(build_kgrid(1, 8, 1.0, {1.0, -1.0, 1.0}), ConfigError);
}

TEST_CASE("kgrid_is_deterministic") {
    const auto a = build_kgrid(3, 8, 1.7), b = build_kgrid(3, 8, 1.7);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec3 ka = a.k(i), kb = b.k(i);
        for (int d = 0; d < 3; ++d) CHECK(std::bit_cast<std::uint64_t>(ka[d]) == std::bit_cast<std::uint64_t>(kb[d]));
        CHECK(std::bit_cast<std::uint64_t>(a.weight(i)) == std::bit_cast<std::uint64_t>(b.weight(i)));
    }
}

TEST_CASE("covariant_weight_band_sum_converges_under_refinement") {
    // Modes inside a fixed spectral band are the same lattice points when n doubles at fixed L.
    const double band = 5.0;
    double previous = -1.0;
    for (int n : {16, 32, 64}) {
        const auto g = build_kgrid(3, n, 2.0 * std::numbers::pi);
        double sum = 0.0;
        for (std::size_t i = 1; i < g.size(); ++i)
            if (g.k_norm(i) <= band) sum += g.weight(i);
        if (previous > 0.0) CHECK(std::abs(sum - previous) / previous < 1e-3);
        previous = sum;
    }
}

TEST_CASE("spherical_triad_pole_convention") {
    const auto t = spherical_unit_vectors({0.0, 0.0, 1.0});
    CHECK(t.e_theta == Vec3{1.0, 0.0, 0.0});
    CHECK(t.e_phi == Vec3{0.0, 1.0, 0.0});
    CHECK(t.e_k == Vec3{0.0, 0.0, 1.0});

    const auto s = spherical_unit_vectors({0.0, 0.0, -2.0});
    CHECK(s.e_theta[0] == doctest::Approx(-1.0));
    CHECK(s.e_phi[1] == doctest::Approx(1.0));
    CHECK(s.e_k[2] == doctest::Approx(-1.0));
}

TEST_CASE("spherical_triad_along_x") {
    // theta = pi/2, phi = 0 in the ISO formulas.
    const auto t = spherical_unit_vectors({1.0, 0.0, 0.0});
    CHECK(t.e_k[0] == doctest::Approx(1.0));
    CHECK(t.e_theta[2] == doctest::Approx(-1.0));
    CHECK(std::abs(t.e_theta[0]) < 1e-15);
    CHECK(t.e_phi[1] == doctest::Approx(1.0));
}

TEST_CASE("spherical_triad_rejects_zero") { CHECK_THROWS_AS(spherical_unit_vectors({0.0, 0.0, 0.0}), DomainError); }

TEST_CASE("spherical_triad_random_orthonormal_right_handed") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 500; ++trial) {
        const Vec3 k{nd(rng), nd(rng), nd(rng)};
        const auto t = spherical_unit_vectors(k);
        CHECK(std::abs(norm3(t.e_theta) - 1.0) < 1e-12);
        CHECK(std::abs(norm3(t.e_phi) - 1.0) < 1e-12);
        CHECK(std::abs(norm3(t.e_k) - 1.0) < 1e-12);
        CHECK(std::abs(dot(t.e_theta, t.e_phi)) < 1e-12);
        CHECK(std::abs(dot(t.e_theta, t.e_k)) < 1e-12);
        CHECK(std::abs(dot(t.e_phi, t.e_k)) < 1e-12);
        CHECK(dot(t.e_theta, cross(t.e_phi, t.e_k)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("helicity_vector_along_z") {
    const auto e = helicity_vector({0.0, 0.0, 1.0}, +1);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(e[0] - cplx(s, 0.0)) < 1e-15);
    CHECK(std::abs(e[1] - cplx(0.0, s)) < 1e-15);
    CHECK(std::abs(e[2]) < 1e-15);
}

TEST_CASE("helicity_vector_rejects_bad_lambda") {
    CHECK_THROWS_AS(helicity_vector({1.0, 0.0, 0.0}, 0), DomainError);
    CHECK_THROWS_AS(helicity_vector({1.0, 0.0, 0.0}, 2), DomainError);
}

TEST_CASE("polarization_basis_on_lattice_is_orthonormal_and_transverse") {
    const auto g = build_kgrid(3, 8, 2.0);
    const PolarizationBasis basis(g);
    double worst = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        const Vec3& k = g.k(i);
        for (int l : {1, -1}) {
            const CVec3& e = basis.e(i, l);
            const cplx ek = e[0] * k[0] + e[1] * k[1] + e[2] * k[2];
            worst = std::max(worst, std::abs(ek));
            for (int lp : {1, -1}) {
                const double expect = l == lp ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(dotc(e, basis.e(i, lp)) - expect));
            }
            // conjugation flips helicity
            const CVec3& f = basis.e(i, -l);
            for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(std::conj(e[j]) - f[j]));
        }
    }
    CHECK(worst < 1e-12);
}
