#pragma once

// Closed-loop action selection: conditional greedy choice over scored
// candidates, deterministic override pushes, and the episode driver.

#include "gegrasp/generators.hpp"
#include "gegrasp/labels.hpp"
#include "gegrasp/scene.hpp"
#include "gegrasp/scorer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gegrasp {

struct PolicyConfig {
    double grasp_threshold = 1.0;
    int max_motions = 5;
    int consecutive_grasp_fail_limit = 2;
    int edge_margin_px = 10;
    bool exploratory_push_enabled = true;
    bool pushing_enabled = true;     // false: grasp-only variant
    bool random_generators = false;  // ablation: skip the SCT filter
    GeneratorConfig generator;
    SimConfig sim;
    LabelConfig label;
};

/// Sim profile: 5 motions. Invisible-target profile: 15 motions.
[[nodiscard]] PolicyConfig sim_profile();
[[nodiscard]] PolicyConfig invisible_target_profile();

struct ScoredAction {
    ActionKind kind = ActionKind::Push;
    Pixel anchor;             // push start or grasp centre
    double angle = 0.0;       // push heading or grasp axis
    int orientation_idx = 0;  // grasps only
    double score = 0.0;
};

/// True when `a` ranks strictly before `b`: higher score, then grasp before
/// push, then lower pixel index, then lower orientation index or angle.
[[nodiscard]] bool ranks_before(const ScoredAction& a, const ScoredAction& b);

class NoActionsError : public Error {
public:
    NoActionsError() : Error("no action candidates") {}
};

/// Best grasp if its score exceeds the threshold, otherwise the best action
/// over both lists. Throws NoActionsError when both are empty.
[[nodiscard]] ScoredAction select_action(std::span<const ScoredAction> pushes, std::span<const ScoredAction> grasps,
                                         const PolicyConfig& cfg);

enum class ActionSource { Scored, Exploration, EdgeRecovery, ForcedPush, Fallback };
[[nodiscard]] std::string to_string(ActionSource source);

enum class EpisodeStatus { Success, ExceededBudget, TargetLost };
[[nodiscard]] std::string to_string(EpisodeStatus status);

struct OverrideState {
    int consecutive_grasp_failures = 0;
};

struct OverrideDecision {
    ActionSource source = ActionSource::Scored;
    /// Set for exploration and edge recovery; a forced push picks the best
    /// scored push instead.
    std::optional<ScoredAction> push;
};

/// Priority: exploration > edge recovery > forced push > none.
[[nodiscard]] std::optional<OverrideDecision> deterministic_override(const OverrideState& state, const Heightmap& hm,
                                                                     const BitMask& tmask, const PolicyConfig& cfg);

/// Push from the region boundary through the target centroid toward the workspace centre.
[[nodiscard]] ScoredAction fallback_push(const BitMask& tmask, const PolicyConfig& cfg);

struct StepRecord {
    int step = 0;
    ActionSource source = ActionSource::Scored;
    ScoredAction action;
    std::string outcome; // "pushed", "target_lost" or a grasp outcome
    int label = -1;      // -1 when the target left the scene
    int visible = 0;     // target pixels before the action
    int occupancy = 0;   // o_b before the action
    int push_candidates = 0;
    int grasp_candidates = 0;
};

struct EpisodeResult {
    EpisodeStatus status = EpisodeStatus::ExceededBudget;
    int motions = 0;
    std::uint64_t scene_hash = 0; // of the initial scene
    std::vector<StepRecord> steps;
    Scene final_scene;
};

struct Scorers {
    const Scorer* push = nullptr;
    const Scorer* grasp = nullptr;
};

[[nodiscard]] EpisodeResult run_episode(const Scene& scene, const Scorers& scorers, const PolicyConfig& cfg,
                                        std::uint64_t seed);

/// One line per step: key=value fields separated by spaces.
[[nodiscard]] std::string format_step(const StepRecord& r);

} // namespace gegrasp
