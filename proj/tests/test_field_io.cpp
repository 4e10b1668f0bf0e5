#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "qosc/error.hpp"
#include "qosc/field_io.hpp"

using namespace qosc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "qosc_field_io_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
}

std::uint64_t header_length(const std::string& bytes) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[8 + i]);
    return v;
}

/// Rewrite the JSON header with `edit` applied, fixing the length prefix.
void patch_header(const fs::path& p, const std::string& from, const std::string& to) {
    std::string bytes = read_all(p);
    const auto h = header_length(bytes);
    std::string header = bytes.substr(16, h);
    const auto pos = header.find(from);
    REQUIRE(pos != std::string::npos);
    header.replace(pos, from.size(), to);
    std::string out = bytes.substr(0, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((header.size() >> (8 * i)) & 0xff));
    out += header + bytes.substr(16 + h);
    write_all(p, out);
}

bool bitwise_equal(const FieldSnapshot& a, const FieldSnapshot& b) {
    if (a.data.size() != b.data.size()) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a.data[i].real()) != std::bit_cast<std::uint64_t>(b.data[i].real()))
            return false;
        if (std::bit_cast<std::uint64_t>(a.data[i].imag()) != std::bit_cast<std::uint64_t>(b.data[i].imag()))
            return false;
    }
    return true;
}

FieldSnapshot random_snapshot(GridPtr g, FieldKind kind, bool complex, std::mt19937_64& rng) {
    FieldSnapshot f(kind, 0.123456789, g);
    std::normal_distribution<double> nd;
    for (auto& v : f.data) v = cplx(nd(rng), complex ? nd(rng) : 0.0);
    return f;
}

}  // namespace

TEST_CASE("dump_load_round_trip_is_bitwise") {
    std::mt19937_64 rng(41);
    const auto g = make_grid(3, 5, 1.25, {2.0, 0.5, 3.0});
    for (auto [kind, complex] : {std::pair{FieldKind::psi, true}, std::pair{FieldKind::A_perp, false},
                                  std::pair{FieldKind::D, true}}) {
        const auto f = random_snapshot(g, kind, complex, rng);
        const auto p = scratch("round_trip.qf");
        dump_field(f, p);
        const auto back = load_field(p);
        CHECK(back.kind == f.kind);
        CHECK(std::bit_cast<std::uint64_t>(back.time) == std::bit_cast<std::uint64_t>(f.time));
        CHECK(back.lattice().same_lattice(f.lattice()));
        CHECK(back.lattice().constants() == f.lattice().constants());
        CHECK(bitwise_equal(back, f));
    }
}

TEST_CASE("real_snapshot_stores_one_double_per_value") {
    std::mt19937_64 rng(42);
    const auto g = make_grid(1, 64, 3.0);
    const auto p = scratch("real.qf");
    dump_field(random_snapshot(g, FieldKind::B, false, rng), p);
    const auto bytes = read_all(p);
    CHECK(bytes.substr(0, 8) == "QOSCFLD\n");
    CHECK(bytes.size() == 16 + header_length(bytes) + 64 * 8);
    CHECK(bytes.find("\"value_type\":\"real\"") != std::string::npos);
}

TEST_CASE("negative_zero_imaginary_parts_survive") {
    const auto g = make_grid(1, 4, 1.0);
    FieldSnapshot f(FieldKind::psi, 0.0, g);
    f.data[2] = cplx(1.0, -0.0);
    const auto p = scratch("negzero.qf");
    dump_field(f, p);
    CHECK(bitwise_equal(load_field(p), f));
}

TEST_CASE("corrupted_header_names_the_field") {
    std::mt19937_64 rng(43);
    const auto g = make_grid(1, 8, 1.0);
    const auto p = scratch("corrupt.qf");

    dump_field(random_snapshot(g, FieldKind::A_perp, false, rng), p);
    patch_header(p, "\"kind\":\"A_perp\"", "\"kind\":\"Q\"");
    try {
        load_field(p);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("'kind'") != std::string::npos);
    }

    dump_field(random_snapshot(g, FieldKind::A_perp, false, rng), p);
    patch_header(p, "\"box_length\"", "\"box_lenght\"");
    try {
        load_field(p);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("box_length") != std::string::npos);
    }

    dump_field(random_snapshot(g, FieldKind::A_perp, false, rng), p);
    patch_header(p, "\"dim\":1", "\"dim\":\"one\"");
    try {
        load_field(p);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("'dim'") != std::string::npos);
    }
}

TEST_CASE("version_mismatch_is_explicit") {
    std::mt19937_64 rng(44);
    const auto g = make_grid(1, 8, 1.0);
    const auto p = scratch("version.qf");
    dump_field(random_snapshot(g, FieldKind::A_perp, false, rng), p);
    patch_header(p, "\"version\":1", "\"version\":2");
    CHECK_THROWS_AS(load_field(p), VersionError);
}

TEST_CASE("bad_files_are_rejected_with_path_context") {
    const auto missing = scratch("does_not_exist.qf");
    fs::remove(missing);
    try {
        load_field(missing);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("does_not_exist.qf") != std::string::npos);
    }

    const auto junk = scratch("junk.qf");
    write_all(junk, "NOTAFIELD-------------------");
    CHECK_THROWS_AS(load_field(junk), FormatError);

    std::mt19937_64 rng(45);
    const auto g = make_grid(1, 8, 1.0);
    const auto p = scratch("truncated.qf");
    dump_field(random_snapshot(g, FieldKind::A_perp, false, rng), p);
    auto bytes = read_all(p);
    write_all(p, bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(load_field(p), FormatError);
}

TEST_CASE("unwritable_path_is_reported") {
    const auto g = make_grid(1, 8, 1.0);
    CHECK_THROWS_AS(dump_field(FieldSnapshot(FieldKind::A_perp, 0.0, g), "/nonexistent_dir/x/y.qf"), FormatError);
}
