#include "gegrasp/policy.hpp"

#include "gegrasp/rng.hpp"

#include <cmath>
#include <cstdio>

namespace gegrasp {

namespace {

Pixel clamp_to_grid(double x, double y)
{
    return {std::clamp(static_cast<int>(std::lround(x)), 0, kGridSize - 1),
            std::clamp(static_cast<int>(std::lround(y)), 0, kGridSize - 1)};
}

// Push whose route runs from `back` px behind the centroid toward the workspace centre.
ScoredAction inward_push(Pixel c, double back)
{
    const double mid = kGridSize / 2.0;
    double ux = mid - c.x;
    double uy = mid - c.y;
    const double len = std::hypot(ux, uy);
    if (len < 1e-9) {
        ux = 1.0;
        uy = 0.0;
    } else {
        ux /= len;
        uy /= len;
    }
    ScoredAction a;
    a.kind = ActionKind::Push;
    a.angle = std::atan2(uy, ux);
    a.anchor = clamp_to_grid(c.x - back * ux, c.y - back * uy);
    return a;
}

bool near_edge(const BitMask& tmask, int margin)
{
    for (int i = 0; i < kGridCells; ++i) {
        if (tmask.test(i)) {
            const Pixel p = pixel_of_index(i);
            if (p.x < margin || p.y < margin || p.x >= kGridSize - margin || p.y >= kGridSize - margin) {
                return true;
            }
        }
    }
    return false;
}

const ScoredAction* best_of(std::span<const ScoredAction> v)
{
    const ScoredAction* best = nullptr;
    for (const auto& a : v) {
        if (best == nullptr || ranks_before(a, *best)) {
            best = &a;
        }
    }
    return best;
}

} // namespace

PolicyConfig sim_profile()
{
    return {};
}

PolicyConfig invisible_target_profile()
{
    PolicyConfig cfg;
    cfg.max_motions = 15;
    return cfg;
}

bool ranks_before(const ScoredAction& a, const ScoredAction& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.kind != b.kind) {
        return a.kind == ActionKind::Grasp;
    }
    if (a.anchor.index() != b.anchor.index()) {
        return a.anchor.index() < b.anchor.index();
    }
    if (a.kind == ActionKind::Grasp) {
        return a.orientation_idx < b.orientation_idx;
    }
    return a.angle < b.angle;
}

ScoredAction select_action(std::span<const ScoredAction> pushes, std::span<const ScoredAction> grasps,
                           const PolicyConfig& cfg)
{
    const ScoredAction* g = best_of(grasps);
    if (g != nullptr && g->score > cfg.grasp_threshold) {
        return *g;
    }
    const ScoredAction* p = best_of(pushes);
    if (p == nullptr && g == nullptr) {
        throw NoActionsError();
    }
    if (p == nullptr) {
        return *g;
    }
    if (g == nullptr) {
        return *p;
    }
    return ranks_before(*g, *p) ? *g : *p;
}

std::string to_string(ActionSource source)
{
    switch (source) {
    case ActionSource::Scored: return "scored";
    case ActionSource::Exploration: return "exploration";
    case ActionSource::EdgeRecovery: return "edge_recovery";
    case ActionSource::ForcedPush: return "forced_push";
    case ActionSource::Fallback: return "fallback";
    }
    return "?";
}

std::string to_string(EpisodeStatus status)
{
    switch (status) {
    case EpisodeStatus::Success: return "success";
    case EpisodeStatus::ExceededBudget: return "exceeded_budget";
    case EpisodeStatus::TargetLost: return "target_lost";
    }
    return "?";
}

std::optional<OverrideDecision> deterministic_override(const OverrideState& state, const Heightmap& hm,
                                                       const BitMask& tmask, const PolicyConfig& cfg)
{
    if (!cfg.pushing_enabled) {
        return std::nullopt;
    }
    if (tmask.empty()) {
        if (!cfg.exploratory_push_enabled) {
            return std::nullopt;
        }
        // Horizontal sweep whose midpoint crosses the highest pixel.
        const auto cells = hm.cells();
        const auto top = std::max_element(cells.begin(), cells.end()) - cells.begin();
        const Pixel p = pixel_of_index(static_cast<int>(top));
        ScoredAction a;
        a.kind = ActionKind::Push;
        if (p.x >= kPushHalfPx) {
            a.anchor = {p.x - kPushHalfPx, p.y};
            a.angle = 0.0;
        } else {
            a.anchor = {p.x + kPushHalfPx, p.y};
            a.angle = kPi;
        }
        return OverrideDecision{ActionSource::Exploration, a};
    }
    if (near_edge(tmask, cfg.edge_margin_px)) {
        return OverrideDecision{ActionSource::EdgeRecovery, inward_push(centroid(tmask), kPushHalfPx)};
    }
    if (state.consecutive_grasp_failures >= cfg.consecutive_grasp_fail_limit) {
        return OverrideDecision{ActionSource::ForcedPush, std::nullopt};
    }
    return std::nullopt;
}

ScoredAction fallback_push(const BitMask& tmask, const PolicyConfig& cfg)
{
    return inward_push(centroid(tmask), cfg.generator.roi_half_extent);
}

EpisodeResult run_episode(const Scene& scene, const Scorers& scorers, const PolicyConfig& cfg, std::uint64_t seed)
{
    if (!scene.has_target()) {
        throw MissingTargetError();
    }
    if (scorers.push == nullptr || scorers.grasp == nullptr) {
        throw std::invalid_argument("both scorers are required");
    }
    EpisodeResult result;
    result.scene_hash = scene_hash(scene);
    Scene s = scene;
    OverrideState state;
    bool finished = false;

    for (int motion = 0; motion < cfg.max_motions && !finished; ++motion) {
        const Heightmap hm = render_heightmap(s);
        const BitMask tm = target_mask(s);
        StepRecord rec;
        rec.step = motion + 1;
        rec.visible = tm.popcount();
        rec.occupancy = border_stats(hm, tm, cfg.label.border).occupancy;

        const auto ov = deterministic_override(state, hm, tm, cfg);
        if (tm.empty() && !ov) {
            result.status = EpisodeStatus::TargetLost;
            finished = true;
            break;
        }
        if (ov && ov->push) {
            rec.source = ov->source;
            rec.action = *ov->push;
        } else {
            const bool forced = ov.has_value();
            const std::uint64_t step_seed = derive_seed(seed, static_cast<std::uint64_t>(motion));
            const FeatureContext ctx(hm, tm, cfg.label.border);
            std::vector<ScoredAction> pushes, grasps;
            if (cfg.pushing_enabled) {
                const auto cands = cfg.random_generators ? random_pushes(hm, tm, cfg.generator, derive_seed(step_seed, 0))
                                                         : generate_pushes(hm, tm, cfg.generator, derive_seed(step_seed, 0));
                std::vector<FeatureVector> feats;
                feats.reserve(cands.size());
                for (const auto& c : cands) {
                    feats.push_back(ctx.extract(c.mask, ActionKind::Push));
                }
                const auto scores = scorers.push->score_batch(feats, derive_seed(step_seed, 2));
                for (std::size_t i = 0; i < cands.size(); ++i) {
                    pushes.push_back({ActionKind::Push, cands[i].start, cands[i].angle, 0, scores[i]});
                }
            }
            if (!forced) {
                const auto cands = cfg.random_generators ? random_grasps(hm, tm, cfg.generator, derive_seed(step_seed, 1))
                                                         : generate_grasps(hm, tm, cfg.generator, derive_seed(step_seed, 1));
                std::vector<FeatureVector> feats;
                feats.reserve(cands.size());
                for (const auto& c : cands) {
                    feats.push_back(ctx.extract(c.mask, ActionKind::Grasp));
                }
                const auto scores = scorers.grasp->score_batch(feats, derive_seed(step_seed, 3));
                for (std::size_t i = 0; i < cands.size(); ++i) {
                    grasps.push_back({ActionKind::Grasp, cands[i].center, grasp_angle(cands[i].orientation_idx),
                                      cands[i].orientation_idx, scores[i]});
                }
            }
            rec.push_candidates = static_cast<int>(pushes.size());
            rec.grasp_candidates = static_cast<int>(grasps.size());
            if (pushes.empty() && grasps.empty()) {
                if (!cfg.pushing_enabled) {
                    break; // nothing a grasp-only policy can do
                }
                rec.source = ActionSource::Fallback;
                rec.action = fallback_push(tm, cfg);
            } else {
                rec.source = forced ? ActionSource::ForcedPush : ActionSource::Scored;
                rec.action = select_action(pushes, grasps, cfg);
            }
        }

        const ScoredAction& a = rec.action;
        if (a.kind == ActionKind::Push) {
            Scene after = simulate_push(s, a.anchor, a.angle, cfg.sim);
            state.consecutive_grasp_failures = 0;
            if (!after.has_target()) {
                rec.outcome = "target_lost";
                result.status = EpisodeStatus::TargetLost;
                finished = true;
            } else {
                rec.outcome = "pushed";
                rec.label = label_push(s, after, s.target_id, cfg.label);
            }
            s = std::move(after);
        } else {
            GraspResult r = simulate_grasp(s, a.anchor, a.orientation_idx, cfg.sim);
            rec.outcome = to_string(r.outcome.kind);
            rec.label = label_grasp(r.outcome, s, r.scene, s.target_id, cfg.label);
            const bool failed =
                r.outcome.kind == GraspOutcomeKind::Empty || r.outcome.kind == GraspOutcomeKind::Collision;
            state.consecutive_grasp_failures = failed ? state.consecutive_grasp_failures + 1 : 0;
            if (r.outcome.kind == GraspOutcomeKind::PickedTarget) {
                result.status = EpisodeStatus::Success;
                finished = true;
            }
            s = std::move(r.scene);
        }
        result.steps.push_back(std::move(rec));
        ++result.motions;
    }
    if (!finished) {
        result.status = EpisodeStatus::ExceededBudget;
    }
    result.final_scene = std::move(s);
    return result;
}

std::string format_step(const StepRecord& r)
{
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "step=%d kind=%s source=%s x=%d y=%d angle=%.6f idx=%d score=%.6f outcome=%s label=%d visible=%d "
                  "o_b=%d pushes=%d grasps=%d",
                  r.step, r.action.kind == ActionKind::Grasp ? "grasp" : "push", to_string(r.source).c_str(),
                  r.action.anchor.x, r.action.anchor.y, r.action.angle, r.action.orientation_idx, r.action.score,
                  r.outcome.c_str(), r.label, r.visible, r.occupancy, r.push_candidates, r.grasp_candidates);
    return buf;
}

} // namespace gegrasp
