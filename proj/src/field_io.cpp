#include "qosc/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qosc/error.hpp"

namespace qosc {

namespace {

constexpr char kMagic[8] = {'Q', 'O', 'S', 'C', 'F', 'L', 'D', '\n'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }
double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

template <class T>
T header_field(const nlohmann::json& h, const char* key, const std::filesystem::path& path) {
    if (!h.contains(key)) throw FormatError(path.string() + ": malformed header, missing field '" + key + "'");
    try {
        return h.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(path.string() + ": malformed header field '" + std::string(key) + "'");
    }
}

}  // namespace

void dump_field(const FieldSnapshot& snapshot, const std::filesystem::path& path) {
    const auto& g = snapshot.lattice();
    bool is_real = true;
    for (const auto& v : snapshot.data)
        if (std::bit_cast<std::uint64_t>(v.imag()) != 0) {
            is_real = false;
            break;
        }

    nlohmann::json header;
    header["format"] = "qosc-field";
    header["version"] = kFieldFormatVersion;
    header["dim"] = g.dim();
    header["shape"] = std::vector<int>(static_cast<std::size_t>(g.dim()), g.n_points());
    header["box_length"] = g.box_length();
    header["constants"] = {{"c", g.constants().c}, {"eps0", g.constants().eps0}, {"hbar", g.constants().hbar}};
    header["kind"] = to_string(snapshot.kind);
    header["time"] = snapshot.time;
    header["components"] = snapshot.components;
    header["value_type"] = is_real ? "real" : "complex";
    header["endianness"] = "little";
    header["layout"] = "component-major, row-major sites (last axis fastest), complex interleaved re/im";
    const std::string text = header.dump();

    std::string buf(kMagic, sizeof kMagic);
    put_u64(buf, text.size());
    buf += text;
    buf.reserve(buf.size() + snapshot.data.size() * (is_real ? 8 : 16));
    for (const auto& v : snapshot.data) {
        put_f64(buf, v.real());
        if (!is_real) put_f64(buf, v.imag());
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

FieldSnapshot load_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw FormatError(path.string() + ": not a qosc field dump (bad magic)");
    const std::uint64_t hlen = get_u64(p + 8);
    if (hlen > bytes.size() - 16) throw FormatError(path.string() + ": truncated header");

    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(16, hlen));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": header is not valid JSON (" + e.what() + ")");
    }
    if (!h.is_object()) throw FormatError(path.string() + ": header is not a JSON object");

    if (header_field<std::string>(h, "format", path) != "qosc-field")
        throw FormatError(path.string() + ": malformed header field 'format'");
    const int version = header_field<int>(h, "version", path);
    if (version != kFieldFormatVersion)
        throw VersionError(path.string() + ": incompatible field dump version " + std::to_string(version) +
                           " (this build reads version " + std::to_string(kFieldFormatVersion) + ")");
    if (header_field<std::string>(h, "endianness", path) != "little")
        throw FormatError(path.string() + ": malformed header field 'endianness'");

    const int dim = header_field<int>(h, "dim", path);
    const auto shape = header_field<std::vector<int>>(h, "shape", path);
    if (shape.size() != static_cast<std::size_t>(dim) || shape.empty())
        throw FormatError(path.string() + ": malformed header field 'shape'");
    for (int s : shape)
        if (s != shape.front()) throw FormatError(path.string() + ": malformed header field 'shape' (non-cubic)");
    const double box_length = header_field<double>(h, "box_length", path);
    const auto consts = header_field<nlohmann::json>(h, "constants", path);
    PhysicalConstants K;
    K.c = header_field<double>(consts, "c", path);
    K.eps0 = header_field<double>(consts, "eps0", path);
    K.hbar = header_field<double>(consts, "hbar", path);
    FieldKind kind;
    try {
        kind = field_kind_from_string(header_field<std::string>(h, "kind", path));
    } catch (const DomainError&) {
        throw FormatError(path.string() + ": malformed header field 'kind'");
    }
    const double time = header_field<double>(h, "time", path);
    const int components = header_field<int>(h, "components", path);
    const auto value_type = header_field<std::string>(h, "value_type", path);
    if (value_type != "real" && value_type != "complex")
        throw FormatError(path.string() + ": malformed header field 'value_type'");

    GridPtr grid;
    try {
        grid = make_grid(dim, shape.front(), box_length, K);
    } catch (const ConfigError& e) {
        throw FormatError(path.string() + ": malformed grid in header (" + e.what() + ")");
    }
    FieldSnapshot snap(kind, time, grid);
    if (components != snap.components) throw FormatError(path.string() + ": malformed header field 'components'");

    const bool is_real = value_type == "real";
    const std::size_t need = snap.data.size() * (is_real ? 8 : 16);
    const std::size_t offset = 16 + hlen;
    if (bytes.size() - offset != need)
        throw FormatError(path.string() + ": payload has " + std::to_string(bytes.size() - offset) +
                          " bytes, expected " + std::to_string(need));
    const unsigned char* q = p + offset;
    for (auto& v : snap.data) {
        const double re = get_f64(q);
        q += 8;
        double im = 0.0;
        if (!is_real) {
            im = get_f64(q);
            q += 8;
        }
        v = cplx(re, im);
    }
    return snap;
}

}  // namespace qosc
