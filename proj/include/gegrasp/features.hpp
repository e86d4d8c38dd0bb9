#pragma once

// Engineered scorer input. Everything is computed from the three grids a
// dataset record stores (heightmap, target mask, action mask) plus the action
// kind, so features of stored and freshly generated samples agree exactly.

#include "gegrasp/grid.hpp"

#include <array>

namespace gegrasp {

inline constexpr int kFeatureBins = 16;
inline constexpr int kFeatureWindow = 100; // px, centred on the target centroid
inline constexpr int kGridFeatures = 3 * kFeatureBins * kFeatureBins;
inline constexpr int kScalarFeatures = 6;
inline constexpr int kFeatureCount = kGridFeatures + kScalarFeatures; // 774

/// Layout: 256 heightmap bins, 256 target-mask bins, 256 action-mask bins,
/// then kind, on_target, distance, SCT margin, border occupancy ratio,
/// visible target pixels. Components lie in [-1, 2].
using FeatureVector = std::array<float, kFeatureCount>;

enum ScalarFeature : int {
    kKindFeature = kGridFeatures,
    kOnTargetFeature,
    kDistanceFeature,
    kMarginFeature,
    kBorderFeature,
    kVisibleFeature,
};

struct BorderStats {
    BitMask border;     // m_b
    int occupancy = 0;  // o_b: border pixels above the ground floor
    int size = 0;       // |m_b|
};

struct BorderConfig {
    int radius_px = 10;
    double ground_floor_mm = 5.0;
};

[[nodiscard]] BorderStats border_stats(const Heightmap& hm, const BitMask& tmask, const BorderConfig& cfg = {});

/// Action placement recovered from the mask pixels alone.
struct DecodedAction {
    ActionKind kind = ActionKind::Push;
    Pixel anchor;        // grasp centre or push start corner
    double angle = 0.0;  // push heading; grasp axis
    int orientation_idx = 0;
};

/// Throws EmptyMaskError for an all-zero mask.
[[nodiscard]] DecodedAction decode_geometry(const ActionMask& mask, ActionKind kind);

/// Per-observation part of the features, shared by all candidates of a step.
class FeatureContext {
public:
    /// Throws EmptyMaskError when the target is not visible.
    FeatureContext(const Heightmap& hm, const BitMask& tmask, const BorderConfig& border = {});

    [[nodiscard]] FeatureVector extract(const ActionMask& mask, ActionKind kind) const;

    [[nodiscard]] Pixel target_centroid() const { return centroid_; }
    [[nodiscard]] Tenths target_top() const { return target_top_; }
    [[nodiscard]] const BorderStats& border() const { return border_; }

private:
    const Heightmap* hm_;
    const BitMask* tmask_;
    Pixel centroid_;
    Tenths target_top_ = 0;
    BorderStats border_;
    std::array<float, 2 * kFeatureBins * kFeatureBins> static_bins_{};
    float border_ratio_ = 0.0F;
    float visible_ = 0.0F;
};

[[nodiscard]] FeatureVector extract_features(const Heightmap& hm, const BitMask& tmask, const ActionMask& mask,
                                             ActionKind kind);

} // namespace gegrasp
