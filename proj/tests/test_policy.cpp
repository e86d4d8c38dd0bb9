#include "doctest.h"

#include "fixtures.hpp"
#include "gegrasp/policy.hpp"
#include "gegrasp/rng.hpp"

#include <cmath>
#include <tuple>

using namespace gegrasp;

namespace {

// Ordering key written out independently of ranks_before: smaller is better.
std::tuple<double, int, int, double> key(const ScoredAction& a)
{
    const bool grasp = a.kind == ActionKind::Grasp;
    return {-a.score, grasp ? 0 : 1, a.anchor.y * kGridSize + a.anchor.x,
            grasp ? static_cast<double>(a.orientation_idx) : a.angle};
}

const ScoredAction* oracle_best(const std::vector<const ScoredAction*>& v)
{
    const ScoredAction* best = nullptr;
    for (const auto* a : v) {
        if (best == nullptr || key(*a) < key(*best)) {
            best = a;
        }
    }
    return best;
}

const ScoredAction* oracle_select(const std::vector<ScoredAction>& pushes, const std::vector<ScoredAction>& grasps,
                                  double threshold)
{
    std::vector<const ScoredAction*> g, all;
    for (const auto& a : grasps) {
        g.push_back(&a);
        all.push_back(&a);
    }
    for (const auto& a : pushes) {
        all.push_back(&a);
    }
    const ScoredAction* bg = oracle_best(g);
    if (bg != nullptr && bg->score > threshold) {
        return bg;
    }
    return oracle_best(all);
}

std::vector<ScoredAction> random_actions(Rng& rng, ActionKind kind, int n)
{
    std::vector<ScoredAction> out(static_cast<std::size_t>(n));
    for (auto& a : out) {
        a.kind = kind;
        // Coarse grid so ties on every key component happen often.
        a.anchor = {static_cast<int>(uniform_index(rng, 3)), static_cast<int>(uniform_index(rng, 3))};
        a.score = static_cast<double>(uniform_index(rng, 9)) * 0.25;
        if (kind == ActionKind::Grasp) {
            a.orientation_idx = static_cast<int>(uniform_index(rng, 16));
            a.angle = grasp_angle(a.orientation_idx);
        } else {
            a.angle = static_cast<double>(uniform_index(rng, 8)) * kPi / 4.0;
        }
    }
    return out;
}

bool same_action(const ScoredAction& a, const ScoredAction& b)
{
    return a.kind == b.kind && a.anchor == b.anchor && a.angle == b.angle && a.orientation_idx == b.orientation_idx &&
           a.score == b.score;
}

BitMask mask_of_rect(int x0, int y0, int x1, int y1)
{
    BitMask m;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            m.set({x, y});
        }
    }
    return m;
}

} // namespace

TEST_CASE("conditional greedy selection agrees with an independent oracle")
{
    Rng rng(314);
    const PolicyConfig cfg;
    int grasps_over_threshold = 0, pushes_chosen = 0;
    for (int t = 0; t < 20000; ++t) {
        const auto pushes = random_actions(rng, ActionKind::Push, static_cast<int>(uniform_index(rng, 5)));
        const auto grasps = random_actions(rng, ActionKind::Grasp, static_cast<int>(uniform_index(rng, 5)));
        if (pushes.empty() && grasps.empty()) {
            CHECK_THROWS_AS((void)select_action(pushes, grasps, cfg), NoActionsError);
            continue;
        }
        const ScoredAction got = select_action(pushes, grasps, cfg);
        const ScoredAction* want = oracle_select(pushes, grasps, cfg.grasp_threshold);
        REQUIRE(same_action(got, *want));
        grasps_over_threshold += got.kind == ActionKind::Grasp && got.score > 1.0;
        pushes_chosen += got.kind == ActionKind::Push;
    }
    CHECK(grasps_over_threshold > 1000);
    CHECK(pushes_chosen > 1000);
}

TEST_CASE("the grasp threshold is strict and ties prefer grasps")
{
    const PolicyConfig cfg;
    const std::vector<ScoredAction> pushes = {{ActionKind::Push, {5, 5}, 0.0, 0, 1.5}};
    std::vector<ScoredAction> grasps = {{ActionKind::Grasp, {9, 9}, 0.0, 0, 1.0}};
    CHECK(select_action(pushes, grasps, cfg).kind == ActionKind::Push);
    grasps[0].score = 1.0000001;
    CHECK(select_action(pushes, grasps, cfg).kind == ActionKind::Grasp);
    grasps[0].score = 0.5;
    const std::vector<ScoredAction> tied = {{ActionKind::Push, {0, 0}, 0.0, 0, 0.5}};
    CHECK(select_action(tied, grasps, cfg).kind == ActionKind::Grasp);
    CHECK(select_action({}, grasps, cfg).kind == ActionKind::Grasp);
}

TEST_CASE("override priority: exploration, then edge recovery, then forced push")
{
    PolicyConfig cfg;
    Heightmap hm;
    hm.set({150, 60}, 500);
    OverrideState failing{2};

    SUBCASE("empty target mask sweeps horizontally through the highest pixel")
    {
        const auto d = deterministic_override(failing, hm, BitMask{}, cfg);
        REQUIRE(d);
        CHECK(d->source == ActionSource::Exploration);
        REQUIRE(d->push);
        CHECK(d->push->angle == 0.0);
        CHECK(d->push->anchor.y == 60);
        CHECK(d->push->anchor.x + kPushHalfPx == 150);

        Heightmap left;
        left.set({10, 20}, 300);
        const auto e = deterministic_override({}, left, BitMask{}, cfg);
        REQUIRE(e);
        CHECK(e->push->angle == doctest::Approx(kPi));
        CHECK(e->push->anchor.x - kPushHalfPx == 10);
    }
    SUBCASE("target within the edge margin pushes toward the centre")
    {
        const BitMask edge = mask_of_rect(3, 100, 15, 112); // x = 3 is inside the 10 px margin
        const auto d = deterministic_override(failing, hm, edge, cfg);
        REQUIRE(d);
        CHECK(d->source == ActionSource::EdgeRecovery);
        const Pixel c = centroid(edge);
        const double dx = 112.0 - c.x, dy = 112.0 - c.y;
        CHECK(d->push->angle == doctest::Approx(std::atan2(dy, dx)));
        // half a push behind the centroid, clamped onto the grid
        const double len = std::hypot(dx, dy);
        const auto clamp = [](double v) { return std::clamp(static_cast<int>(std::lround(v)), 0, kGridSize - 1); };
        CHECK(d->push->anchor.x == clamp(c.x - kPushHalfPx * dx / len));
        CHECK(d->push->anchor.y == clamp(c.y - kPushHalfPx * dy / len));
        CHECK(d->push->anchor.x == 0);
    }
    SUBCASE("two failed grasps force a scored push")
    {
        const BitMask inner = mask_of_rect(100, 100, 112, 112);
        const auto d = deterministic_override(failing, hm, inner, cfg);
        REQUIRE(d);
        CHECK(d->source == ActionSource::ForcedPush);
        CHECK_FALSE(d->push);
        CHECK_FALSE(deterministic_override({1}, hm, inner, cfg));
    }
    SUBCASE("edge boundary: margin 10 means x = 9 triggers and x = 10 does not")
    {
        CHECK(deterministic_override({}, hm, mask_of_rect(9, 100, 20, 110), cfg));
        CHECK_FALSE(deterministic_override({}, hm, mask_of_rect(10, 100, 20, 110), cfg));
        CHECK(deterministic_override({}, hm, mask_of_rect(200, 100, 215, 110), cfg));
        CHECK_FALSE(deterministic_override({}, hm, mask_of_rect(200, 100, 214, 110), cfg));
    }
    SUBCASE("grasp-only and exploration-off variants")
    {
        PolicyConfig no_push = cfg;
        no_push.pushing_enabled = false;
        CHECK_FALSE(deterministic_override(failing, hm, BitMask{}, no_push));
        CHECK_FALSE(deterministic_override(failing, hm, mask_of_rect(3, 100, 15, 112), no_push));
        PolicyConfig no_explore = cfg;
        no_explore.exploratory_push_enabled = false;
        CHECK_FALSE(deterministic_override(failing, hm, BitMask{}, no_explore));
    }
}

TEST_CASE("fallback push starts a region half-extent behind the centroid")
{
    const PolicyConfig cfg;
    const BitMask m = mask_of_rect(150, 40, 160, 50);
    const ScoredAction a = fallback_push(m, cfg);
    const Pixel c = centroid(m);
    CHECK(a.kind == ActionKind::Push);
    CHECK(a.angle == doctest::Approx(std::atan2(112.0 - c.y, 112.0 - c.x)));
    CHECK(std::hypot(c.x - a.anchor.x, c.y - a.anchor.y) == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("a lone target is captured in one motion")
{
    const Scene scene = fixture::scene_of({fixture::cuboid(1, 224, 224, 40, 40, 40)}, 1);
    const HeuristicScorer h;
    const auto r = run_episode(scene, {&h, &h}, sim_profile(), 5);
    CHECK(r.status == EpisodeStatus::Success);
    CHECK(r.motions == 1);
    REQUIRE(r.steps.size() == 1);
    CHECK(r.steps[0].outcome == "picked_target");
    CHECK(r.steps[0].label == 2);
    CHECK(r.scene_hash == scene_hash(scene));
    CHECK_FALSE(r.final_scene.has_target());
}

TEST_CASE("episodes respect the motion budget and are reproducible")
{
    const HeuristicScorer h;
    const RandomScorer rnd;
    for (const auto* profile : {"sim", "invisible"}) {
        const PolicyConfig cfg = std::string(profile) == "sim" ? sim_profile() : invisible_target_profile();
        for (std::uint64_t s = 0; s < 6; ++s) {
            const Scene scene = spawn_random_clutter(20, derive_seed(77, s));
            const auto a = run_episode(scene, {&rnd, &rnd}, cfg, s);
            const auto b = run_episode(scene, {&rnd, &rnd}, cfg, s);
            CHECK(a.motions <= cfg.max_motions);
            CHECK(a.steps.size() == static_cast<std::size_t>(a.motions));
            CHECK(a.status == b.status);
            REQUIRE(a.steps.size() == b.steps.size());
            for (std::size_t i = 0; i < a.steps.size(); ++i) {
                CHECK(format_step(a.steps[i]) == format_step(b.steps[i]));
            }
            if (a.status == EpisodeStatus::ExceededBudget) {
                CHECK(a.motions <= cfg.max_motions);
            }
            if (a.status == EpisodeStatus::Success) {
                CHECK(a.steps.back().outcome == "picked_target");
            }
        }
    }
    CHECK(invisible_target_profile().max_motions == 15);
    CHECK(sim_profile().max_motions == 5);
}

TEST_CASE("grasp-only episodes never push")
{
    const HeuristicScorer h;
    PolicyConfig cfg;
    cfg.pushing_enabled = false;
    for (std::uint64_t s = 0; s < 8; ++s) {
        const auto r = run_episode(spawn_random_clutter(20, derive_seed(5, s)), {&h, &h}, cfg, s);
        for (const auto& st : r.steps) {
            CHECK(st.action.kind == ActionKind::Grasp);
            CHECK(st.push_candidates == 0);
        }
    }
}

TEST_CASE("a buried target ends the episode when exploration is off")
{
    const Scene scene = fixture::scene_of(
        {fixture::cuboid(1, 224, 224, 30, 30, 20), fixture::cuboid(2, 224, 224, 70, 70, 20, 20)}, 1);
    REQUIRE(target_mask(scene).empty());
    const HeuristicScorer h;
    PolicyConfig cfg;
    cfg.exploratory_push_enabled = false;
    const auto r = run_episode(scene, {&h, &h}, cfg, 1);
    CHECK(r.status == EpisodeStatus::TargetLost);
    CHECK(r.motions == 0);

    const auto explored = run_episode(scene, {&h, &h}, sim_profile(), 1);
    REQUIRE_FALSE(explored.steps.empty());
    CHECK(explored.steps[0].source == ActionSource::Exploration);
}

TEST_CASE("episode preconditions")
{
    const HeuristicScorer h;
    Scene no_target = fixture::scene_of({fixture::cuboid(1, 224, 224, 30, 30, 20)}, 9);
    CHECK_THROWS_AS((void)run_episode(no_target, {&h, &h}, {}, 0), MissingTargetError);
    const Scene ok = fixture::scene_of({fixture::cuboid(1, 224, 224, 30, 30, 20)}, 1);
    CHECK_THROWS_AS((void)run_episode(ok, {&h, nullptr}, {}, 0), std::invalid_argument);
}
