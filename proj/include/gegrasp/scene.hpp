#pragma once

// Ground-truth 2.5D tabletop world. Blocks are convex footprints extruded
// upwards from a resting height; all dynamics are quasi-static and
// deterministic.

#include "gegrasp/grid.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gegrasp {

using Vec2 = std::array<double, 2>;
/// Convex polygon in the continuous pixel frame.
using PixelPolygon = std::vector<Vec2>;

inline constexpr double kWorkspaceM = kGridSize * kCellSizeMm / 1000.0; // 0.448 m

enum class ShapeKind { Cuboid, Cylinder, Prism, HalfCylinder, Polygon };

[[nodiscard]] std::string to_string(ShapeKind kind);
[[nodiscard]] ShapeKind shape_from_string(const std::string& name);

struct Pose {
    double x = 0.0; // metres
    double y = 0.0;
    double yaw = 0.0; // radians

    bool operator==(const Pose&) const = default;
};

struct Block {
    int id = 0;
    ShapeKind shape = ShapeKind::Cuboid;
    std::vector<Vec2> local;  // convex footprint around the pose origin, metres
    double radius_m = 0.0;    // cylinders only; `local` is derived from it
    Tenths height = 0;
    Tenths base = 0;          // resting height of the underside
    Pose pose;
    std::string color_tag;
    bool graspable = true;

    [[nodiscard]] Tenths top() const { return base + height; }
    [[nodiscard]] std::vector<Vec2> footprint_m() const;
    [[nodiscard]] PixelPolygon footprint_px() const;
    [[nodiscard]] double area_m2() const;

    bool operator==(const Block&) const = default;
};

struct Scene {
    std::vector<Block> blocks;
    int target_id = -1;
    std::uint64_t rng_seed = 0;

    [[nodiscard]] const Block* find(int id) const;
    [[nodiscard]] bool has_target() const { return find(target_id) != nullptr; }

    bool operator==(const Scene&) const = default;
};

class SpawnFailure : public Error {
public:
    using Error::Error;
};

class MissingTargetError : public Error {
public:
    MissingTargetError() : Error("scene has no target block") {}
};

enum class GraspOutcomeKind { PickedTarget, PickedNontarget, Empty, Collision };

struct GraspOutcome {
    GraspOutcomeKind kind = GraspOutcomeKind::Empty;
    int picked_id = -1;

    bool operator==(const GraspOutcome&) const = default;
};

[[nodiscard]] std::string to_string(GraspOutcomeKind kind);

/// Physics-lite constants.
struct SimConfig {
    int max_chain_depth = 5;
    double support_loss_mm = 20.0;
    double max_stack_mm = 150.0;
    double spawn_disc_radius_m = 0.15;
    int spawn_attempts = 1000;
    double grasp_descent_margin_mm = 25.0;
    int min_grip_thickness_px = 6;
};

// --- shapes and geometry -----------------------------------------------------

[[nodiscard]] std::vector<Vec2> regular_polygon(double radius_m, int sides);
[[nodiscard]] std::vector<Vec2> half_disc(double radius_m, int arc_segments = 8);
[[nodiscard]] std::vector<Vec2> rectangle(double width_m, double depth_m);
/// Regenerates `local` for cylinder shapes from radius_m.
void refresh_shape(Block& block);

[[nodiscard]] Vec2 world_to_px(Vec2 world_m);
[[nodiscard]] Vec2 px_to_world(Vec2 px);

/// Separating-axis test on convex polygons; touching does not count.
[[nodiscard]] bool convex_overlap(std::span<const Vec2> a, std::span<const Vec2> b, double tolerance = 1e-9);
[[nodiscard]] std::vector<Vec2> convex_hull(std::vector<Vec2> points);

// --- operations ---------------------------------------------------------------

[[nodiscard]] Scene spawn_random_clutter(int n_blocks, std::uint64_t seed, const SimConfig& cfg = {});

/// Drops `blocks` one by one in order onto whatever is already placed.
void settle_in_order(Scene& scene);

[[nodiscard]] Heightmap render_heightmap(const Scene& scene);

/// Pixels inside the block's footprint where it is the topmost surface.
[[nodiscard]] int visible_pixel_count(const Heightmap& hm, const Block& block);

/// Pixels where the target is the topmost surface. Throws MissingTargetError.
[[nodiscard]] BitMask target_mask(const Scene& scene);

[[nodiscard]] Scene simulate_push(const Scene& scene, Pixel start, double angle, const SimConfig& cfg = {});

struct GraspResult {
    Scene scene;
    GraspOutcome outcome;
};

[[nodiscard]] GraspResult simulate_grasp(const Scene& scene, Pixel center, int orientation_idx,
                                         const SimConfig& cfg = {});

/// Exhaustive per-pixel check: true iff some block covers a pixel inside one
/// of the polygons with its top above `descent` (tenths of mm).
[[nodiscard]] bool collision_oracle(const Scene& scene, std::span<const PixelPolygon> polygons, Tenths descent);

/// Pixel-frame outlines of the two finger zones of a grasp.
[[nodiscard]] std::array<PixelPolygon, 2> finger_zone_polygons(Pixel center, int orientation_idx);
/// Pixel-frame outline of the closed gripper at the start of a push.
[[nodiscard]] PixelPolygon push_footprint_polygon(Pixel start, double angle);

/// Finger descent height for a grasp at this heightmap location.
[[nodiscard]] Tenths grasp_descent(const Heightmap& hm, Pixel center, int orientation_idx, const SimConfig& cfg = {});

/// Stable 64-bit FNV-1a over the scene's canonical fields.
[[nodiscard]] std::uint64_t scene_hash(const Scene& scene);

} // namespace gegrasp
