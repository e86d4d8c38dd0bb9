#pragma once

// Scenario files: JSON scenes with metric geometry.
//
// { "name": "...", "seed": 0,
//   "blocks": [ { "id": 1, "shape": "cuboid", "vertices": [[x, y], ...],
//                 "height_mm": 40, "base_mm": 0,
//                 "pose": {"x": 0.224, "y": 0.224, "yaw": 0.0},
//                 "color": "red", "graspable": true, "target": true } ] }
//
// Vertices, radius and pose are in metres. Cylinders and half cylinders take
// "radius" instead of "vertices". When no block gives "base_mm" the blocks
// are dropped in file order; otherwise every block must give it.

#include "gegrasp/scene.hpp"

#include <string>

namespace gegrasp {

class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what) : Error(where + ": " + what) {}
};

struct Scenario {
    std::string name;
    Scene scene;
};

/// Throws ParseError naming the line (syntax) or the field path (content).
[[nodiscard]] Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
[[nodiscard]] Scenario load_scenario(const std::string& path);
[[nodiscard]] std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const std::string& path, const Scenario& scenario);

} // namespace gegrasp
