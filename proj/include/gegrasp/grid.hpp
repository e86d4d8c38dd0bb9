#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gegrasp {

inline constexpr int kGridSize = 224;
inline constexpr int kGridCells = kGridSize * kGridSize;
inline constexpr double kCellSizeMm = 2.0;
inline constexpr double kPi = 3.14159265358979323846;

// Action geometry in pixels.
inline constexpr int kPushLengthPx = 62;
inline constexpr int kPushHalfPx = 31;
inline constexpr int kGraspLengthPx = 60;
inline constexpr int kGripperWidthPx = 12;
inline constexpr int kFingerZonePx = 12;
inline constexpr int kPushMaskPixels = kPushLengthPx * kGripperWidthPx;   // 744
inline constexpr int kGraspMaskPixels = kGraspLengthPx * kGripperWidthPx; // 720
inline constexpr int kGraspOrientations = 16;
inline constexpr double kOrientationStep = kPi / 8.0; // 22.5 degrees

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyMaskError : public Error {
public:
    EmptyMaskError() : Error("mask has no set pixel") {}
};

/// Integer pixel coordinate; x is the column, y the row.
struct Pixel {
    int x = 0;
    int y = 0;

    auto operator<=>(const Pixel&) const = default;
    [[nodiscard]] int index() const { return y * kGridSize + x; }
};

[[nodiscard]] inline bool in_bounds(Pixel p)
{
    return p.x >= 0 && p.y >= 0 && p.x < kGridSize && p.y < kGridSize;
}

[[nodiscard]] inline Pixel pixel_of_index(int index) { return {index % kGridSize, index / kGridSize}; }

/// Heights are kept in integer tenths of a millimetre so that every height
/// comparison is exact.
using Tenths = std::int32_t;

inline constexpr Tenths kMaxHeightTenths = 10000; // 1000 mm, exclusive

[[nodiscard]] inline Tenths to_tenths(double mm) { return static_cast<Tenths>(std::lround(mm * 10.0)); }
[[nodiscard]] inline double to_mm(Tenths t) { return static_cast<double>(t) / 10.0; }

class Heightmap {
public:
    Heightmap() : cells_(kGridCells, 0) {}

    /// Takes ownership of row-major cells; throws std::invalid_argument when
    /// the size is wrong or a height is outside [0, 1000) mm.
    explicit Heightmap(std::vector<Tenths> cells, double cell_size_mm = kCellSizeMm);

    [[nodiscard]] Tenths at(Pixel p) const { return cells_[static_cast<std::size_t>(p.index())]; }
    [[nodiscard]] Tenths at(int x, int y) const { return cells_[static_cast<std::size_t>(y * kGridSize + x)]; }
    [[nodiscard]] double height_mm(Pixel p) const { return to_mm(at(p)); }
    void set(Pixel p, Tenths value);

    [[nodiscard]] std::span<const Tenths> cells() const { return cells_; }
    [[nodiscard]] double cell_size_mm() const { return cell_size_mm_; }
    /// World coordinate (m) of the corner of pixel (0,0).
    [[nodiscard]] std::array<double, 2> origin_m() const { return origin_m_; }
    [[nodiscard]] Tenths max() const;

    bool operator==(const Heightmap&) const = default;

private:
    std::vector<Tenths> cells_;
    double cell_size_mm_ = kCellSizeMm;
    std::array<double, 2> origin_m_{0.0, 0.0};
};

class BitMask {
public:
    BitMask() : bits_(kGridCells, 0) {}

    [[nodiscard]] bool test(Pixel p) const { return bits_[static_cast<std::size_t>(p.index())] != 0; }
    [[nodiscard]] bool test(int index) const { return bits_[static_cast<std::size_t>(index)] != 0; }
    void set(Pixel p, bool on = true) { bits_[static_cast<std::size_t>(p.index())] = on ? 1 : 0; }
    void set(int index, bool on = true) { bits_[static_cast<std::size_t>(index)] = on ? 1 : 0; }

    [[nodiscard]] int popcount() const;
    [[nodiscard]] bool empty() const { return popcount() == 0; }
    [[nodiscard]] std::span<const std::uint8_t> bytes() const { return bits_; }

    /// Pixels set here but not in `other`.
    [[nodiscard]] BitMask minus(const BitMask& other) const;
    [[nodiscard]] bool subset_of(const BitMask& other) const;

    bool operator==(const BitMask&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

enum class ActionKind : std::uint8_t { Push = 0, Grasp = 1 };

/// Where an action mask came from: a push start (or grasp centre) corner
/// point and a heading in radians, measured from +x towards +y.
struct ActionGeometry {
    ActionKind kind = ActionKind::Push;
    Pixel anchor;
    double angle = 0.0;
    int orientation_idx = 0; // grasps only
};

/// Rasterized push or grasp footprint over the full grid. Values are 0, 0.5
/// or 1.0, stored as codes 0/1/2 for the nonzero pixels only.
class ActionMask {
public:
    struct Entry {
        std::int32_t index;
        std::uint8_t code; // 1 -> 0.5, 2 -> 1.0
    };

    ActionMask() = default;
    ActionMask(ActionGeometry geometry, std::vector<Entry> entries, int nominal_pixels);

    [[nodiscard]] float value(Pixel p) const;
    [[nodiscard]] std::span<const Entry> entries() const { return entries_; }
    [[nodiscard]] int nonzero_count() const { return static_cast<int>(entries_.size()); }
    [[nodiscard]] int count_code(std::uint8_t code) const;
    /// Fraction of the nominal rectangle that landed inside the grid.
    [[nodiscard]] double coverage() const;
    [[nodiscard]] const ActionGeometry& geometry() const { return geometry_; }
    [[nodiscard]] std::vector<float> to_dense() const;

    static float code_value(std::uint8_t code) { return 0.5F * static_cast<float>(code); }

    /// Compares pixel values only; geometry metadata is ignored.
    [[nodiscard]] bool same_pixels(const ActionMask& other) const;

private:
    ActionGeometry geometry_;
    std::vector<Entry> entries_;
    int nominal_pixels_ = 0;
};

struct Region {
    Pixel center;
    int half_extent = 50;
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0; // clipped, [x0,x1) x [y0,y1)

    [[nodiscard]] bool contains(Pixel p) const { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }
    [[nodiscard]] int width() const { return x1 - x0; }
    [[nodiscard]] int height() const { return y1 - y0; }
    [[nodiscard]] int area() const { return width() * height(); }
};

[[nodiscard]] Region make_region(Pixel center, int half_extent = 50);

/// Centroid of the set pixels, rounded half-up per axis.
[[nodiscard]] Pixel centroid(const BitMask& mask);

[[nodiscard]] Region roi_of_target(const BitMask& mask, int half_extent = 50);

/// Visits every in-grid pixel whose centre lies in the rectangle
/// t in [t0,t1), w in [w0,w1), where t runs along `angle` from the corner
/// point `anchor` and w runs along the left normal.
template <typename Visit>
void for_each_rect_pixel(Pixel anchor, double angle, double t0, double t1, double w0, double w1, Visit&& visit);

/// Maps local cells (i, j), i in [i0,i1), j in [j0,j1), whose corner frame
/// sits at `anchor` rotated by `angle`, onto distinct grid pixels. Cells that
/// land off the grid are skipped.
void for_each_rotated_cell(Pixel anchor, double angle, int i0, int i1, int j0, int j1,
                           const std::function<void(Pixel, int, int)>& visit);

[[nodiscard]] ActionMask rasterize_push(Pixel start, double angle);
[[nodiscard]] ActionMask rasterize_grasp(Pixel center, int orientation_idx);

[[nodiscard]] inline double grasp_angle(int orientation_idx) { return orientation_idx * kOrientationStep; }

/// Dilation with a Euclidean disc (dx^2 + dy^2 <= r^2).
[[nodiscard]] BitMask dilate(const BitMask& mask, int radius_px);

/// Ring around the mask: dilate(mask, r) minus mask.
[[nodiscard]] BitMask border_mask(const BitMask& mask, int radius_px);

// ---------------------------------------------------------------------------

template <typename Visit>
void for_each_rect_pixel(Pixel anchor, double angle, double t0, double t1, double w0, double w1, Visit&& visit)
{
    constexpr double eps = 1e-9;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double ax = anchor.x;
    const double ay = anchor.y;

    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (double t : {t0, t1}) {
        for (double w : {w0, w1}) {
            const double x = ax + t * c - w * s;
            const double y = ay + t * s + w * c;
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    }
    const int px0 = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
    const int px1 = std::min(kGridSize - 1, static_cast<int>(std::ceil(max_x)) + 1);
    const int py0 = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
    const int py1 = std::min(kGridSize - 1, static_cast<int>(std::ceil(max_y)) + 1);

    for (int y = py0; y <= py1; ++y) {
        const double dy = y + 0.5 - ay;
        for (int x = px0; x <= px1; ++x) {
            const double dx = x + 0.5 - ax;
            const double t = dx * c + dy * s;
            const double w = -dx * s + dy * c;
            if (t >= t0 - eps && t < t1 - eps && w >= w0 - eps && w < w1 - eps) {
                visit(Pixel{x, y}, t, w);
            }
        }
    }
}

} // namespace gegrasp
