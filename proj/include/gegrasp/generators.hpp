#pragma once

// Heightmap-only candidate generators: enumerate every ROI placement that
// passes the spatial correlation test (SCT), then sample a spatially
// balanced subset per quadrant around the target centroid.

#include "gegrasp/grid.hpp"
#include "gegrasp/kernels.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace gegrasp {

struct GeneratorConfig {
    double push_height_margin_mm = 15.0;
    double grasp_height_margin_mm = 25.0;
    int per_quadrant_cap = 25;
    int total_cap = 100;
    int roi_half_extent = 50;
    /// Keep every on-target grasp outside the quadrant caps.
    bool exempt_on_target = false;
};

struct PushCandidate {
    Pixel start;
    double angle = 0.0;
    kernels::PushDirection direction = kernels::PushDirection::Facing;
    int quadrant = 0;
    Tenths footprint_max = 0;
    Tenths limit = 0; // highest footprint height the SCT allows
    ActionMask mask;
};

struct GraspCandidate {
    Pixel center;
    int orientation_idx = 0;
    bool on_target = false;
    int quadrant = 0;
    Tenths center_max = 0;
    Tenths finger_max = 0;
    ActionMask mask;
};

/// 0: dx >= 0, dy >= 0; 1: dx < 0, dy >= 0; 2: dx < 0, dy < 0; 3: dx >= 0, dy < 0.
[[nodiscard]] int quadrant_of(Pixel p, Pixel origin);

/// Tallest target pixel; throws EmptyMaskError on an empty mask.
[[nodiscard]] Tenths target_top(const Heightmap& hm, const BitMask& tmask);

[[nodiscard]] bool sct_push(const Heightmap& hm, const BitMask& tmask, Pixel start, double angle,
                            const GeneratorConfig& cfg = {});
[[nodiscard]] bool sct_grasp(const Heightmap& hm, Pixel center, int orientation_idx, const GeneratorConfig& cfg = {});

[[nodiscard]] std::vector<PushCandidate> generate_pushes(const Heightmap& hm, const BitMask& tmask,
                                                         const GeneratorConfig& cfg, std::uint64_t seed);
[[nodiscard]] std::vector<GraspCandidate> generate_grasps(const Heightmap& hm, const BitMask& tmask,
                                                          const GeneratorConfig& cfg, std::uint64_t seed);

/// Ablation generators: the same ROI and quadrant sampling, no SCT filter.
[[nodiscard]] std::vector<PushCandidate> random_pushes(const Heightmap& hm, const BitMask& tmask,
                                                       const GeneratorConfig& cfg, std::uint64_t seed);
[[nodiscard]] std::vector<GraspCandidate> random_grasps(const Heightmap& hm, const BitMask& tmask,
                                                        const GeneratorConfig& cfg, std::uint64_t seed);

/// Sample up to `cap` indices of [0, n) without replacement, returned sorted.
[[nodiscard]] std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t cap, std::uint64_t seed);

/// One line per candidate:
///   push <x> <y> <angle_rad> <facing|left|right> q<quadrant> footprint_mm=<f> limit_mm=<f>
///   grasp <x> <y> <idx> <on|off> q<quadrant> center_mm=<f> fingers_mm=<f>
void write_candidates(std::ostream& os, const std::vector<PushCandidate>& pushes,
                      const std::vector<GraspCandidate>& grasps);

[[nodiscard]] const char* to_string(kernels::PushDirection d);

} // namespace gegrasp
