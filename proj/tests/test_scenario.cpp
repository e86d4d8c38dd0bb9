#include "doctest.h"

#include "gegrasp/bench.hpp"
#include "gegrasp/generators.hpp"
#include "gegrasp/kernels.hpp"
#include "gegrasp/scenario.hpp"

#include <filesystem>
#include <string>

using namespace gegrasp;

namespace {

const std::string kOneBlock = R"({
  "name": "one",
  "seed": 3,
  "blocks": [
    {"shape": "cuboid", "vertices": [[-0.02, -0.02], [0.02, -0.02], [0.02, 0.02], [-0.02, 0.02]],
     "height_mm": 40, "pose": {"x": 0.224, "y": 0.224, "yaw": 0.3}, "target": true}
  ]
})";

std::string parse_error_of(const std::string& text)
{
    try {
        (void)parse_scenario(text, "case.json");
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

std::string data_dir()
{
    return std::string(GEGRASP_SOURCE_DIR) + "/data/challenging";
}

} // namespace

TEST_CASE("a minimal scenario parses with defaults")
{
    const Scenario s = parse_scenario(kOneBlock);
    CHECK(s.name == "one");
    CHECK(s.scene.rng_seed == 3);
    REQUIRE(s.scene.blocks.size() == 1);
    const Block& b = s.scene.blocks[0];
    CHECK(b.id == 1);
    CHECK(s.scene.target_id == 1);
    CHECK(b.height == 400);
    CHECK(b.base == 0);
    CHECK(b.graspable);
    CHECK(b.pose.yaw == doctest::Approx(0.3));
    CHECK(target_mask(s.scene).popcount() > 300);
}

TEST_CASE("malformed scenarios report where they fail")
{
    CHECK(parse_error_of("").find("case.json: line 1") != std::string::npos);
    CHECK(parse_error_of("{\n \"blocks\": [\n  {,\n ]\n}").find("line 3") != std::string::npos);
    CHECK(parse_error_of("[]").find("(root)") != std::string::npos);
    CHECK(parse_error_of(R"({"blocks": []})").find("field blocks") != std::string::npos);

    std::string bad_height = kOneBlock;
    bad_height.replace(bad_height.find("\"height_mm\": 40"), 15, "\"height_mm\": -4");
    CHECK(parse_error_of(bad_height).find("blocks[0].height_mm") != std::string::npos);

    std::string bad_shape = kOneBlock;
    bad_shape.replace(bad_shape.find("cuboid"), 6, "sphere");
    CHECK(parse_error_of(bad_shape).find("blocks[0].shape") != std::string::npos);

    std::string no_target = kOneBlock;
    no_target.replace(no_target.find("\"target\": true"), 14, "\"target\": false");
    CHECK(parse_error_of(no_target).find("exactly one") != std::string::npos);

    std::string outside = kOneBlock;
    outside.replace(outside.find("\"x\": 0.224"), 10, "\"x\": 0.900");
    CHECK(parse_error_of(outside).find("blocks[0].pose") != std::string::npos);

    const std::string two = R"({"blocks": [
      {"id": 4, "shape": "cylinder", "radius": 0.02, "height_mm": 30, "pose": {"x": 0.1, "y": 0.1}, "target": true},
      {"id": 4, "shape": "cylinder", "radius": 0.02, "height_mm": 30, "pose": {"x": 0.3, "y": 0.3}}]})";
    CHECK(parse_error_of(two).find("blocks[1].id") != std::string::npos);

    const std::string partial_base = R"({"blocks": [
      {"shape": "cylinder", "radius": 0.02, "height_mm": 30, "base_mm": 0, "pose": {"x": 0.1, "y": 0.1}, "target": true},
      {"shape": "cylinder", "radius": 0.02, "height_mm": 30, "pose": {"x": 0.3, "y": 0.3}}]})";
    CHECK(parse_error_of(partial_base).find("base_mm") != std::string::npos);
}

TEST_CASE("blocks without base heights settle in file order")
{
    const std::string stack = R"({"blocks": [
      {"shape": "cylinder", "radius": 0.03, "height_mm": 30, "pose": {"x": 0.224, "y": 0.224}},
      {"shape": "cylinder", "radius": 0.02, "height_mm": 20, "pose": {"x": 0.224, "y": 0.224}, "target": true}]})";
    const Scenario s = parse_scenario(stack);
    CHECK(s.scene.blocks[0].base == 0);
    CHECK(s.scene.blocks[1].base == 300);
}

TEST_CASE("save and load round-trip to an identical scene")
{
    const auto dir = std::filesystem::temp_directory_path() / "gegrasp_test_scenarios";
    std::filesystem::create_directories(dir);
    for (const auto& entry : std::filesystem::directory_iterator(data_dir())) {
        const Scenario a = load_scenario(entry.path().string());
        const auto path = (dir / entry.path().filename()).string();
        save_scenario(path, a);
        const Scenario b = load_scenario(path);
        CHECK(b.name == a.name);
        CHECK(b.scene == a.scene);
        CHECK(scene_hash(b.scene) == scene_hash(a.scene));
        CHECK(scenario_to_json(b) == scenario_to_json(a));
    }
    Scene random = spawn_random_clutter(15, 8);
    const Scenario r{"random", random};
    const Scenario back = parse_scenario(scenario_to_json(r));
    CHECK(back.scene == random);
}

TEST_CASE("every shipped challenging scene forbids an initial target grasp")
{
    const auto suite = load_challenging_suite(data_dir());
    REQUIRE(suite.size() == 8);
    const GeneratorConfig g;
    for (const auto& sc : suite) {
        INFO(sc.name);
        const Heightmap hm = render_heightmap(sc.scene);
        const BitMask tm = target_mask(sc.scene);
        REQUIRE(tm.popcount() >= 30);

        // Every visible target pixel and every orientation, straight from the zone rule.
        int passing = 0;
        for (int i = 0; i < kGridCells; ++i) {
            if (!tm.test(i)) {
                continue;
            }
            const Pixel p = pixel_of_index(i);
            for (int k = 0; k < kGraspOrientations; ++k) {
                const auto& z = kernels::grasp_zones(k);
                const Tenths fingers = std::max(kernels::zone_max(hm, p, z.finger_a), kernels::zone_max(hm, p, z.finger_b));
                passing += sct_grasp(hm, p, k, g) && hm.at(p) >= fingers + 250;
            }
        }
        CHECK(passing == 0);

        GeneratorConfig exempt = g;
        exempt.exempt_on_target = true;
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            for (const auto& c : generate_grasps(hm, tm, exempt, seed)) {
                CHECK_FALSE(c.on_target);
            }
        }
        // at least one push exists, so the full pipeline has somewhere to start
        CHECK_FALSE(generate_pushes(hm, tm, g, 0).empty());
    }
}

TEST_CASE("the challenging loader rejects a directly graspable scene")
{
    const auto dir = std::filesystem::temp_directory_path() / "gegrasp_test_bad_suite";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    save_scenario((dir / "easy.json").string(), parse_scenario(kOneBlock));
    CHECK_THROWS_AS((void)load_challenging_suite(dir.string()), Error);
}
