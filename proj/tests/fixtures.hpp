#pragma once

#include "gegrasp/scene.hpp"

namespace fixture {

// Axis-aligned (unless yawed) cuboid; positions and sizes in millimetres.
inline gegrasp::Block cuboid(int id, double cx_mm, double cy_mm, double w_mm, double d_mm, double h_mm,
                             double base_mm = 0.0, double yaw = 0.0)
{
    gegrasp::Block b;
    b.id = id;
    b.shape = gegrasp::ShapeKind::Cuboid;
    b.local = gegrasp::rectangle(w_mm / 1000.0, d_mm / 1000.0);
    b.height = gegrasp::to_tenths(h_mm);
    b.base = gegrasp::to_tenths(base_mm);
    b.pose = {cx_mm / 1000.0, cy_mm / 1000.0, yaw};
    b.color_tag = "grey";
    return b;
}

inline gegrasp::Scene scene_of(std::vector<gegrasp::Block> blocks, int target_id)
{
    gegrasp::Scene s;
    s.blocks = std::move(blocks);
    s.target_id = target_id;
    return s;
}

} // namespace fixture
