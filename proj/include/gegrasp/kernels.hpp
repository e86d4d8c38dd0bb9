#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp`; the two must
// produce identical results (including element order) and the library calls
// the OpenMP one.

#include "gegrasp/grid.hpp"

#include <array>
#include <span>
#include <vector>

namespace gegrasp::kernels {

struct Offset {
    int dx = 0;
    int dy = 0;
};

/// Central 12x12 zone and the two terminal 12x12 finger zones of a grasp,
/// as pixel offsets from the grasp centre corner point.
struct GraspZones {
    std::vector<Offset> center;
    std::vector<Offset> finger_a;
    std::vector<Offset> finger_b;
};

/// Cached per orientation; k and k+8 share zones.
[[nodiscard]] const GraspZones& grasp_zones(int orientation_idx);

/// Closed-gripper footprint at the start of a push: t in [0,12), w in [-6,6).
[[nodiscard]] std::vector<Offset> push_footprint_offsets(double angle);

/// Max height over anchor+offsets; off-grid pixels are skipped (0 if none).
[[nodiscard]] Tenths zone_max(const Heightmap& hm, Pixel anchor, std::span<const Offset> offsets);

struct GraspHit {
    Pixel center;
    int orientation_idx = 0;
    Tenths center_max = 0;
    Tenths finger_max = 0;
};

/// Push directions relative to the ray towards the target.
enum class PushDirection : int { Facing = 0, Left = 1, Right = 2 };

struct PushHit {
    Pixel start;
    PushDirection direction = PushDirection::Facing;
    double angle = 0.0;
};

/// Heading of a push starting at `start` towards the corner point of
/// `target`, deflected per `direction` (left = +22.5 degrees).
[[nodiscard]] double push_heading(Pixel start, Pixel target, PushDirection direction);

/// Convex polygon in the continuous pixel frame with its top height.
struct RenderItem {
    std::vector<std::array<double, 2>> polygon;
    Tenths top = 0;
};

/// True when the centre of pixel p lies inside the convex polygon (either
/// winding; boundary counts as inside).
[[nodiscard]] bool pixel_in_convex(std::span<const std::array<double, 2>> polygon, Pixel p);

namespace serial {

BitMask dilate(const BitMask& mask, int radius_px);

/// Every (pixel, orientation) in `region` whose own height and central-zone
/// max both reach finger_max + margin.
std::vector<GraspHit> grasp_sct_scan(const Heightmap& hm, const Region& region, Tenths margin);

/// Every (pixel, direction) in `region` whose closed-gripper footprint max is
/// <= limit. The target corner pixel itself is skipped.
std::vector<PushHit> push_sct_scan(const Heightmap& hm, const Region& region, Pixel target, Tenths limit);

Heightmap render(std::span<const RenderItem> items);

} // namespace serial

namespace omp {

BitMask dilate(const BitMask& mask, int radius_px);
std::vector<GraspHit> grasp_sct_scan(const Heightmap& hm, const Region& region, Tenths margin);
std::vector<PushHit> push_sct_scan(const Heightmap& hm, const Region& region, Pixel target, Tenths limit);
Heightmap render(std::span<const RenderItem> items);

} // namespace omp

} // namespace gegrasp::kernels
