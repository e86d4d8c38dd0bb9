#pragma once

// "GEHM" grid files:
//   magic "GEHM" | version u16 | width u16 | height u16 | cell_size_mm f32 | payload
// Heightmap payload: row-major f32 heights in metres.
// BitMask payload:   row-major packed bits, LSB first, ceil(w*h/8) bytes.
// ActionMask payload: two packed bit planes (nonzero, value == 1.0).
// All multi-byte fields are little-endian.

#include "gegrasp/grid.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace gegrasp {

inline constexpr std::uint16_t kGridFormatVersion = 1;

class FormatError : public Error {
public:
    using Error::Error;
};

namespace le {

void write_u8(std::ostream& os, std::uint8_t v);
void write_u16(std::ostream& os, std::uint16_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_f32(std::ostream& os, float v);
void write_magic(std::ostream& os, const char (&magic)[5]);

std::uint8_t read_u8(std::istream& is);
std::uint16_t read_u16(std::istream& is);
std::uint32_t read_u32(std::istream& is);
float read_f32(std::istream& is);
void expect_magic(std::istream& is, const char (&magic)[5]);

} // namespace le

void write_heightmap(std::ostream& os, const Heightmap& hm);
void write_bitmask(std::ostream& os, const BitMask& mask);
void write_action_mask(std::ostream& os, const ActionMask& mask);

[[nodiscard]] Heightmap read_heightmap(std::istream& is);
[[nodiscard]] BitMask read_bitmask(std::istream& is);
/// Pixel values only; the geometry is recovered with decode_geometry().
[[nodiscard]] ActionMask read_action_mask(std::istream& is, ActionKind kind);

void save_heightmap(const std::string& path, const Heightmap& hm);
[[nodiscard]] Heightmap load_heightmap(const std::string& path);

} // namespace gegrasp
