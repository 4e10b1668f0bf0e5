#pragma once

#include <filesystem>

#include "qosc/fields.hpp"

namespace qosc {

inline constexpr int kFieldFormatVersion = 1;

/**
 * Field dump layout:
 *   8 bytes   magic "QOSCFLD\n"
 *   8 bytes   header length H, unsigned little-endian
 *   H bytes   JSON header (dim, shape, box_length, constants, kind, time,
 *             components, value_type, endianness, layout, version)
 *   payload   little-endian IEEE-754 doubles, component-major, sites row-major;
 *             complex values interleaved (re, im), real values stored alone.
 * A snapshot is written as "real" only when every imaginary part is exactly zero,
 * so load(dump(s)) reproduces s bit for bit.
 */
void dump_field(const FieldSnapshot& snapshot, const std::filesystem::path& path);
FieldSnapshot load_field(const std::filesystem::path& path);

}  // namespace qosc
