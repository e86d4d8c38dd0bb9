#include "gegrasp/labels.hpp"

namespace gegrasp {

namespace {

Scene with_target(const Scene& scene, int target_id)
{
    Scene s = scene;
    s.target_id = target_id;
    if (!s.has_target()) {
        throw MissingTargetError();
    }
    return s;
}

} // namespace

Accessibility accessibility(const Scene& scene, const LabelConfig& cfg)
{
    const BitMask tmask = target_mask(scene);
    const Heightmap hm = render_heightmap(scene);
    return {tmask.popcount(), border_stats(hm, tmask, cfg.border).occupancy};
}

bool effective_change(const Accessibility& before, const Accessibility& after, const LabelConfig& cfg)
{
    const bool uncovered = before.visible == 0
                               ? after.visible > 0
                               : 100LL * after.visible >= static_cast<long long>(before.visible) *
                                                                  (100 + cfg.occlusion_gain_percent);
    const bool thinned = after.occupancy < before.occupancy &&
                         100LL * after.occupancy <=
                             static_cast<long long>(before.occupancy) * (100 - cfg.border_drop_percent);
    return uncovered || thinned;
}

int label_push(const Scene& before, const Scene& after, int target_id, const LabelConfig& cfg)
{
    const Accessibility a = accessibility(with_target(before, target_id), cfg);
    const Accessibility b = accessibility(with_target(after, target_id), cfg);
    return effective_change(a, b, cfg) ? 1 : 0;
}

int label_grasp(const GraspOutcome& outcome, const Scene& before, const Scene& after, int target_id,
                const LabelConfig& cfg)
{
    switch (outcome.kind) {
    case GraspOutcomeKind::PickedTarget:
        return 2;
    case GraspOutcomeKind::PickedNontarget:
        return label_push(before, after, target_id, cfg);
    case GraspOutcomeKind::Empty:
    case GraspOutcomeKind::Collision:
        break;
    }
    return 0;
}

} // namespace gegrasp
