#include "fixtures.hpp"

#include "gegrasp/generators.hpp"
#include "gegrasp/rng.hpp"
#include "gegrasp/scene.hpp"

#include <doctest.h>

#include <sstream>

using namespace gegrasp;

namespace {

Heightmap flat_with(std::initializer_list<std::tuple<int, int, int, int, double>> boxes)
{
    std::vector<Tenths> cells(kGridCells, 0);
    for (auto [x0, y0, x1, y1, mm] : boxes) {
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                cells[static_cast<std::size_t>(y * kGridSize + x)] = to_tenths(mm);
            }
        }
    }
    return Heightmap(cells);
}

BitMask box_mask(int x0, int y0, int x1, int y1)
{
    BitMask m;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            m.set(Pixel{x, y});
        }
    }
    return m;
}

// Closed-gripper footprint max computed from scratch: pixel centres with
// t in [0,12), |w| < 6 along the heading from the start corner.
Tenths footprint_oracle(const Heightmap& hm, Pixel s, double angle)
{
    Tenths m = 0;
    for (int y = 0; y < kGridSize; ++y) {
        for (int x = 0; x < kGridSize; ++x) {
            const double dx = x + 0.5 - s.x;
            const double dy = y + 0.5 - s.y;
            const double t = dx * std::cos(angle) + dy * std::sin(angle);
            const double w = -dx * std::sin(angle) + dy * std::cos(angle);
            if (t >= -1e-9 && t < 12 - 1e-9 && w >= -6 - 1e-9 && w < 6 - 1e-9) {
                m = std::max(m, hm.at(x, y));
            }
        }
    }
    return m;
}

int count_push_survivors(const Heightmap& hm, const BitMask& tmask)
{
    const Pixel c = centroid(tmask);
    Tenths top = 0;
    for (int i = 0; i < kGridCells; ++i) {
        if (tmask.test(i)) {
            top = std::max(top, hm.cells()[static_cast<std::size_t>(i)]);
        }
    }
    int n = 0;
    for (int y = std::max(0, c.y - 50); y < std::min(224, c.y + 50); ++y) {
        for (int x = std::max(0, c.x - 50); x < std::min(224, c.x + 50); ++x) {
            if (x == c.x && y == c.y) {
                continue;
            }
            const double base = std::atan2(c.y - y, c.x - x);
            for (double a : {base, base + M_PI / 8, base - M_PI / 8}) {
                n += footprint_oracle(hm, {x, y}, a) <= top - 150;
            }
        }
    }
    return n;
}

} // namespace

TEST_CASE("push sct")
{
    const Heightmap hm = flat_with({{100, 100, 120, 120, 40}});
    const BitMask target = box_mask(100, 100, 120, 120);
    CHECK(sct_push(hm, target, {40, 40}, 0.3));
    CHECK(sct_push(hm, target, {150, 10}, -2.0));

    const Heightmap tall = flat_with({{100, 100, 120, 120, 40}, {30, 30, 60, 60, 50}});
    CHECK_FALSE(sct_push(tall, target, {40, 40}, 0.0));

    // 30 mm obstacle right next to the target, underfoot of the start
    const Heightmap near = flat_with({{100, 100, 120, 120, 40}, {84, 104, 98, 116, 30}});
    CHECK_FALSE(sct_push(near, target, {86, 110}, 0.0));
    CHECK(footprint_oracle(near, {86, 110}, 0.0) == 300);
    // 25 mm sits exactly on the limit: passes
    const Heightmap limit = flat_with({{100, 100, 120, 120, 40}, {84, 104, 98, 116, 25}});
    CHECK(sct_push(limit, target, {86, 110}, 0.0));
}

TEST_CASE("grasp sct")
{
    const Heightmap lone = flat_with({{104, 104, 120, 120, 40}});
    CHECK(sct_grasp(lone, {112, 112}, 0));
    CHECK_FALSE(sct_grasp(Heightmap{}, {112, 112}, 0));
    // 20 mm neighbour under the +x finger zone
    const Heightmap crowded = flat_with({{104, 104, 120, 120, 40}, {132, 104, 140, 120, 20}});
    CHECK_FALSE(sct_grasp(crowded, {112, 112}, 0));
    CHECK(sct_grasp(crowded, {112, 112}, 4));
    // exactly 25 mm apart passes
    const Heightmap edge = flat_with({{104, 104, 120, 120, 40}, {132, 104, 140, 120, 15}});
    CHECK(sct_grasp(edge, {112, 112}, 0));
}

TEST_CASE("pushes around a lone target")
{
    const Heightmap hm = flat_with({{104, 104, 120, 120, 40}});
    const BitMask target = box_mask(104, 104, 120, 120);
    const GeneratorConfig cfg;
    const auto pushes = generate_pushes(hm, target, cfg, 5);
    const int survivors = count_push_survivors(hm, target);
    CHECK(static_cast<int>(pushes.size()) == std::min(survivors, 100));
    std::array<int, 4> per_quadrant{};
    for (const auto& p : pushes) {
        per_quadrant[static_cast<std::size_t>(p.quadrant)]++;
        CHECK(sct_push(hm, target, p.start, p.angle));
        CHECK(make_region(centroid(target)).contains(p.start));
        const double facing = std::atan2(112.0 - p.start.y, 112.0 - p.start.x);
        const double d = std::remainder(p.angle - facing, 2 * M_PI);
        CHECK((std::abs(d) < 1e-12 || std::abs(std::abs(d) - M_PI / 8) < 1e-12));
    }
    for (int q : per_quadrant) {
        CHECK(q > 0);
        CHECK(q <= 25);
    }
    CHECK(generate_pushes(hm, target, cfg, 5).size() == pushes.size());
}

TEST_CASE("push sct scan kernels agree with brute force")
{
    const Scene s = spawn_random_clutter(15, 77);
    const Heightmap hm = render_heightmap(s);
    const BitMask tmask = target_mask(s);
    const Pixel c = centroid(tmask);
    const Region roi = make_region(c);
    const Tenths limit = target_top(hm, tmask) - 150;
    const auto serial = kernels::serial::push_sct_scan(hm, roi, c, limit);
    const auto parallel = kernels::omp::push_sct_scan(hm, roi, c, limit);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].start == parallel[i].start);
        CHECK(serial[i].direction == parallel[i].direction);
    }
    CHECK(static_cast<int>(serial.size()) == count_push_survivors(hm, tmask));
}

TEST_CASE("walled-in target has no pushes")
{
    std::vector<Tenths> cells(kGridCells, 0);
    for (int y = 0; y < kGridSize; ++y) {
        for (int x = 0; x < kGridSize; ++x) {
            const double r = std::hypot(x + 0.5 - 112, y + 0.5 - 112);
            if (r < 10) {
                cells[static_cast<std::size_t>(y * kGridSize + x)] = 400;
            } else if (r < 90) {
                cells[static_cast<std::size_t>(y * kGridSize + x)] = 1000;
            }
        }
    }
    const Heightmap hm(cells);
    BitMask target;
    for (int i = 0; i < kGridCells; ++i) {
        if (cells[static_cast<std::size_t>(i)] == 400) {
            target.set(i);
        }
    }
    CHECK(generate_pushes(hm, target, {}, 1).empty());
}

TEST_CASE("survivors in one quadrant obey the cap")
{
    // everything is tall except a low pocket right-below the target
    std::vector<Tenths> cells(kGridCells, 900);
    for (int y = 104; y < 120; ++y) {
        for (int x = 104; x < 120; ++x) {
            cells[static_cast<std::size_t>(y * kGridSize + x)] = 950;
        }
    }
    for (int y = 125; y < 162; ++y) {
        for (int x = 125; x < 162; ++x) {
            cells[static_cast<std::size_t>(y * kGridSize + x)] = 0;
        }
    }
    const Heightmap hm(cells);
    const BitMask target = box_mask(104, 104, 120, 120);
    const auto pushes = generate_pushes(hm, target, {}, 3);
    CHECK_FALSE(pushes.empty());
    CHECK(pushes.size() <= 25);
    for (const auto& p : pushes) {
        CHECK(p.quadrant == 0);
    }
}

TEST_CASE("grasps on a lone target are all on target")
{
    const Scene s = fixture::scene_of({fixture::cuboid(0, 224, 224, 24, 24, 40)}, 0);
    const Heightmap hm = render_heightmap(s);
    const BitMask tmask = target_mask(s);
    const auto grasps = generate_grasps(hm, tmask, {}, 9);
    CHECK_FALSE(grasps.empty());
    for (const auto& g : grasps) {
        CHECK(g.on_target);
        CHECK(sct_grasp(hm, g.center, g.orientation_idx));
    }
    CHECK(generate_grasps(Heightmap{}, tmask, {}, 9).empty());
}

TEST_CASE("grasps in a small cluster mix on and off target")
{
    using fixture::cuboid;
    const Scene s = fixture::scene_of({cuboid(0, 224, 224, 24, 24, 40), cuboid(1, 300, 224, 24, 24, 45),
                                       cuboid(2, 224, 300, 24, 24, 35), cuboid(3, 150, 170, 24, 24, 50)},
                                      0);
    const Heightmap hm = render_heightmap(s);
    const BitMask tmask = target_mask(s);
    for (bool exempt : {false, true}) {
        GeneratorConfig cfg;
        cfg.exempt_on_target = exempt;
        const auto grasps = generate_grasps(hm, tmask, cfg, 21);
        int on = 0, off = 0;
        std::array<int, 4> per_quadrant_off{};
        for (const auto& g : grasps) {
            CHECK(g.on_target == tmask.test(g.center));
            if (g.on_target) {
                ++on;
            } else {
                ++off;
                per_quadrant_off[static_cast<std::size_t>(g.quadrant)]++;
            }
        }
        CHECK(on > 0);
        CHECK(off > 0);
        CHECK(off <= 100);
        for (int q : per_quadrant_off) {
            CHECK(q <= 25);
        }
        if (!exempt) {
            CHECK(grasps.size() <= 100);
        }
    }
}

TEST_CASE("generators are deterministic and the scan kernels agree")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Scene s = spawn_random_clutter(12 + static_cast<int>(seed), 300 + seed);
        const Heightmap hm = render_heightmap(s);
        const BitMask tmask = target_mask(s);
        const auto a = generate_grasps(hm, tmask, {}, seed);
        const auto b = generate_grasps(hm, tmask, {}, seed);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].center == b[i].center);
            CHECK(a[i].orientation_idx == b[i].orientation_idx);
        }
        const Region roi = make_region(centroid(tmask));
        const auto gs = kernels::serial::grasp_sct_scan(hm, roi, 250);
        const auto go = kernels::omp::grasp_sct_scan(hm, roi, 250);
        REQUIRE(gs.size() == go.size());
        for (std::size_t i = 0; i < gs.size(); ++i) {
            CHECK(gs[i].center == go[i].center);
            CHECK(gs[i].orientation_idx == go[i].orientation_idx);
        }
    }
}

TEST_CASE("lowering clutter never invalidates a passing push")
{
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const Scene s = spawn_random_clutter(15, 700 + static_cast<std::uint64_t>(trial));
        const Heightmap hm = render_heightmap(s);
        const BitMask tmask = target_mask(s);
        const auto pushes = generate_pushes(hm, tmask, {}, 1);
        std::vector<Tenths> cells(hm.cells().begin(), hm.cells().end());
        for (int i = 0; i < kGridCells; ++i) {
            if (!tmask.test(i) && uniform01(rng) < 0.3) {
                cells[static_cast<std::size_t>(i)] /= 2;
            }
        }
        const Heightmap lowered(cells);
        for (const auto& p : pushes) {
            CHECK(sct_push(lowered, tmask, p.start, p.angle));
        }
    }
}

TEST_CASE("random generators keep the caps")
{
    const Scene s = spawn_random_clutter(15, 4);
    const Heightmap hm = render_heightmap(s);
    const BitMask tmask = target_mask(s);
    const auto rp = random_pushes(hm, tmask, {}, 2);
    const auto rg = random_grasps(hm, tmask, {}, 2);
    CHECK(rp.size() == 100);
    CHECK(rg.size() == 100);
    std::stringstream ss;
    write_candidates(ss, rp, rg);
    std::string line;
    int lines = 0;
    while (std::getline(ss, line)) {
        ++lines;
    }
    CHECK(lines == 200);
}

TEST_CASE("sampling without replacement")
{
    const auto all = sample_without_replacement(10, 25, 1);
    CHECK(all.size() == 10);
    const auto some = sample_without_replacement(1000, 25, 1);
    CHECK(some.size() == 25);
    CHECK(std::adjacent_find(some.begin(), some.end()) == some.end());
    CHECK(some == sample_without_replacement(1000, 25, 1));
}
