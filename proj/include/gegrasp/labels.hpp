#pragma once

// Value labels for executed actions: 2 = target captured, 1 = action that
// made the target more accessible, 0 = anything else.

#include "gegrasp/features.hpp"
#include "gegrasp/scene.hpp"

namespace gegrasp {

struct LabelConfig {
    /// Visible target pixels must grow by at least this many percent.
    int occlusion_gain_percent = 20;
    /// Border occupancy must drop by at least this many percent (tau_b).
    int border_drop_percent = 10;
    BorderConfig border;
};

struct Accessibility {
    int visible = 0;   // popcount of the target mask
    int occupancy = 0; // o_b
};

/// Throws MissingTargetError when the target is absent.
[[nodiscard]] Accessibility accessibility(const Scene& scene, const LabelConfig& cfg = {});

/// Occlusion or crowding around the target improved enough. A visible count
/// rising from 0 always qualifies; border occupancy must strictly drop.
[[nodiscard]] bool effective_change(const Accessibility& before, const Accessibility& after,
                                    const LabelConfig& cfg = {});

/// Throws MissingTargetError if the target is absent from either scene.
[[nodiscard]] int label_push(const Scene& before, const Scene& after, int target_id, const LabelConfig& cfg = {});

[[nodiscard]] int label_grasp(const GraspOutcome& outcome, const Scene& before, const Scene& after, int target_id,
                              const LabelConfig& cfg = {});

} // namespace gegrasp
