#include "gegrasp/grid_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace gegrasp {

namespace le {

void write_u8(std::ostream& os, std::uint8_t v)
{
    os.put(static_cast<char>(v));
}

void write_u16(std::ostream& os, std::uint16_t v)
{
    const std::array<char, 2> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
    os.write(b.data(), 2);
}

void write_u32(std::ostream& os, std::uint32_t v)
{
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) {
        b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    os.write(b.data(), 4);
}

void write_f32(std::ostream& os, float v)
{
    write_u32(os, std::bit_cast<std::uint32_t>(v));
}

void write_magic(std::ostream& os, const char (&magic)[5])
{
    os.write(magic, 4);
}

namespace {

void read_exact(std::istream& is, char* out, std::size_t n)
{
    is.read(out, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
        throw FormatError("unexpected end of file");
    }
}

} // namespace

std::uint8_t read_u8(std::istream& is)
{
    char c = 0;
    read_exact(is, &c, 1);
    return static_cast<std::uint8_t>(c);
}

std::uint16_t read_u16(std::istream& is)
{
    std::array<char, 2> b{};
    read_exact(is, b.data(), 2);
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[0]) | (static_cast<std::uint8_t>(b[1]) << 8));
}

std::uint32_t read_u32(std::istream& is)
{
    std::array<char, 4> b{};
    read_exact(is, b.data(), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)])) << (8 * i);
    }
    return v;
}

float read_f32(std::istream& is)
{
    return std::bit_cast<float>(read_u32(is));
}

void expect_magic(std::istream& is, const char (&magic)[5])
{
    std::array<char, 4> b{};
    read_exact(is, b.data(), 4);
    if (std::memcmp(b.data(), magic, 4) != 0) {
        throw FormatError(std::string("bad magic, expected ") + magic);
    }
}

} // namespace le

namespace {

void write_header(std::ostream& os, double cell_size_mm)
{
    le::write_magic(os, "GEHM");
    le::write_u16(os, kGridFormatVersion);
    le::write_u16(os, kGridSize);
    le::write_u16(os, kGridSize);
    le::write_f32(os, static_cast<float>(cell_size_mm));
}

float read_header(std::istream& is)
{
    le::expect_magic(is, "GEHM");
    const auto version = le::read_u16(is);
    if (version != kGridFormatVersion) {
        throw FormatError("unsupported GEHM version " + std::to_string(version));
    }
    const auto w = le::read_u16(is);
    const auto h = le::read_u16(is);
    if (w != kGridSize || h != kGridSize) {
        throw FormatError("GEHM grid must be 224x224");
    }
    return le::read_f32(is);
}

template <typename Bit>
void write_bits(std::ostream& os, Bit&& bit)
{
    for (int base = 0; base < kGridCells; base += 8) {
        std::uint8_t byte = 0;
        for (int i = 0; i < 8 && base + i < kGridCells; ++i) {
            if (bit(base + i)) {
                byte = static_cast<std::uint8_t>(byte | (1U << i));
            }
        }
        le::write_u8(os, byte);
    }
}

std::vector<std::uint8_t> read_bits(std::istream& is)
{
    std::vector<std::uint8_t> bits(kGridCells, 0);
    for (int base = 0; base < kGridCells; base += 8) {
        const std::uint8_t byte = le::read_u8(is);
        for (int i = 0; i < 8 && base + i < kGridCells; ++i) {
            bits[static_cast<std::size_t>(base + i)] = (byte >> i) & 1U;
        }
    }
    return bits;
}

} // namespace

void write_heightmap(std::ostream& os, const Heightmap& hm)
{
    write_header(os, hm.cell_size_mm());
    for (Tenths t : hm.cells()) {
        le::write_f32(os, static_cast<float>(static_cast<double>(t) / 10000.0));
    }
}

void write_bitmask(std::ostream& os, const BitMask& mask)
{
    write_header(os, kCellSizeMm);
    write_bits(os, [&](int i) { return mask.test(i); });
}

void write_action_mask(std::ostream& os, const ActionMask& mask)
{
    write_header(os, kCellSizeMm);
    const std::vector<float> dense = mask.to_dense();
    write_bits(os, [&](int i) { return dense[static_cast<std::size_t>(i)] > 0.0F; });
    write_bits(os, [&](int i) { return dense[static_cast<std::size_t>(i)] >= 1.0F; });
}

Heightmap read_heightmap(std::istream& is)
{
    const float cell = read_header(is);
    std::vector<Tenths> cells(kGridCells);
    for (auto& c : cells) {
        const float metres = le::read_f32(is);
        if (!std::isfinite(metres)) {
            throw FormatError("non-finite height");
        }
        c = static_cast<Tenths>(std::lround(static_cast<double>(metres) * 10000.0));
    }
    try {
        return Heightmap(std::move(cells), cell);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

BitMask read_bitmask(std::istream& is)
{
    read_header(is);
    const auto bits = read_bits(is);
    BitMask mask;
    for (int i = 0; i < kGridCells; ++i) {
        if (bits[static_cast<std::size_t>(i)] != 0) {
            mask.set(i);
        }
    }
    return mask;
}

ActionMask read_action_mask(std::istream& is, ActionKind kind)
{
    read_header(is);
    const auto nonzero = read_bits(is);
    const auto full = read_bits(is);
    std::vector<ActionMask::Entry> entries;
    for (int i = 0; i < kGridCells; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (nonzero[u] != 0) {
            entries.push_back({i, static_cast<std::uint8_t>(full[u] != 0 ? 2 : 1)});
        } else if (full[u] != 0) {
            throw FormatError("action mask value plane set outside nonzero plane");
        }
    }
    const int nominal = kind == ActionKind::Push ? kPushMaskPixels : kGraspMaskPixels;
    ActionGeometry g;
    g.kind = kind;
    return ActionMask(g, std::move(entries), nominal);
}

void save_heightmap(const std::string& path, const Heightmap& hm)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("cannot open " + path + " for writing");
    }
    write_heightmap(os, hm);
}

Heightmap load_heightmap(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("cannot open " + path);
    }
    return read_heightmap(is);
}

} // namespace gegrasp
