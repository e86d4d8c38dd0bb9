#include "gegrasp/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gegrasp {

using nlohmann::json;

namespace {

int line_of(const std::string& text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& what) const
    {
        throw ParseError(source_ + ": field " + path, what);
    }

    const json& member(const json& obj, const std::string& path, const char* key) const
    {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            fail(path + "." + key, "missing");
        }
        return *it;
    }

    double number(const json& v, const std::string& path) const
    {
        if (!v.is_number()) {
            fail(path, "expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(path, "not finite");
        }
        return d;
    }

    bool boolean(const json& v, const std::string& path) const
    {
        if (!v.is_boolean()) {
            fail(path, "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const json& v, const std::string& path) const
    {
        if (!v.is_string()) {
            fail(path, "expected a string");
        }
        return v.get<std::string>();
    }

private:
    std::string source_;
};

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& source)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": line " + std::to_string(line_of(text, e.byte > 0 ? e.byte - 1 : 0)),
                         "malformed JSON");
    }
    const Reader r(source);
    if (!doc.is_object()) {
        r.fail("(root)", "expected an object");
    }
    Scenario out;
    if (doc.contains("name")) {
        out.name = r.string(doc["name"], "name");
    }
    if (doc.contains("seed")) {
        const json& s = doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            r.fail("seed", "expected a non-negative integer");
        }
        out.scene.rng_seed = s.get<std::uint64_t>();
    }
    const json& blocks = r.member(doc, "", "blocks");
    if (!blocks.is_array() || blocks.empty()) {
        r.fail("blocks", "expected a non-empty array");
    }

    int with_base = 0;
    int targets = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const std::string path = "blocks[" + std::to_string(k) + "]";
        const json& jb = blocks[k];
        if (!jb.is_object()) {
            r.fail(path, "expected an object");
        }
        Block b;
        b.id = static_cast<int>(k) + 1;
        if (jb.contains("id")) {
            const json& id = jb["id"];
            if (!id.is_number_integer()) {
                r.fail(path + ".id", "expected an integer");
            }
            b.id = id.get<int>();
        }
        const std::string shape = r.string(r.member(jb, path, "shape"), path + ".shape");
        try {
            b.shape = shape_from_string(shape);
        } catch (const std::invalid_argument&) {
            r.fail(path + ".shape", "unknown shape '" + shape + "'");
        }
        if (b.shape == ShapeKind::Cylinder || b.shape == ShapeKind::HalfCylinder) {
            b.radius_m = r.number(r.member(jb, path, "radius"), path + ".radius");
            if (b.radius_m <= 0.0) {
                r.fail(path + ".radius", "must be positive");
            }
            refresh_shape(b);
        } else {
            const json& verts = r.member(jb, path, "vertices");
            if (!verts.is_array() || verts.size() < 3) {
                r.fail(path + ".vertices", "expected at least three [x, y] pairs");
            }
            for (std::size_t i = 0; i < verts.size(); ++i) {
                const std::string vp = path + ".vertices[" + std::to_string(i) + "]";
                if (!verts[i].is_array() || verts[i].size() != 2) {
                    r.fail(vp, "expected [x, y]");
                }
                b.local.push_back({r.number(verts[i][0], vp + "[0]"), r.number(verts[i][1], vp + "[1]")});
            }
            if (convex_hull(b.local).size() != b.local.size()) {
                r.fail(path + ".vertices", "footprint must be a convex polygon without repeated points");
            }
        }
        const double h = r.number(r.member(jb, path, "height_mm"), path + ".height_mm");
        if (h <= 0.0 || h >= 1000.0) {
            r.fail(path + ".height_mm", "must be in (0, 1000)");
        }
        b.height = to_tenths(h);
        if (jb.contains("base_mm")) {
            const double base = r.number(jb["base_mm"], path + ".base_mm");
            if (base < 0.0 || base + h >= 1000.0) {
                r.fail(path + ".base_mm", "block top must stay below 1000 mm");
            }
            b.base = to_tenths(base);
            ++with_base;
        }
        const json& pose = r.member(jb, path, "pose");
        if (!pose.is_object()) {
            r.fail(path + ".pose", "expected {x, y, yaw}");
        }
        b.pose.x = r.number(r.member(pose, path + ".pose", "x"), path + ".pose.x");
        b.pose.y = r.number(r.member(pose, path + ".pose", "y"), path + ".pose.y");
        if (pose.contains("yaw")) {
            b.pose.yaw = r.number(pose["yaw"], path + ".pose.yaw");
        }
        if (b.pose.x < 0.0 || b.pose.y < 0.0 || b.pose.x > kWorkspaceM || b.pose.y > kWorkspaceM) {
            r.fail(path + ".pose", "centre lies outside the workspace");
        }
        if (jb.contains("color")) {
            b.color_tag = r.string(jb["color"], path + ".color");
        }
        if (jb.contains("graspable")) {
            b.graspable = r.boolean(jb["graspable"], path + ".graspable");
        }
        if (jb.contains("target") && r.boolean(jb["target"], path + ".target")) {
            out.scene.target_id = b.id;
            ++targets;
        }
        for (const Block& other : out.scene.blocks) {
            if (other.id == b.id) {
                r.fail(path + ".id", "duplicate id " + std::to_string(b.id));
            }
        }
        out.scene.blocks.push_back(std::move(b));
    }
    if (targets != 1) {
        r.fail("blocks", "exactly one block must be the target (found " + std::to_string(targets) + ")");
    }
    if (with_base == 0) {
        settle_in_order(out.scene);
    } else if (with_base != static_cast<int>(blocks.size())) {
        r.fail("blocks", "base_mm must be given for all blocks or none");
    }
    return out;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw Error("cannot open " + path);
    }
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::string scenario_to_json(const Scenario& scenario)
{
    json doc;
    if (!scenario.name.empty()) {
        doc["name"] = scenario.name;
    }
    doc["seed"] = scenario.scene.rng_seed;
    json blocks = json::array();
    for (const Block& b : scenario.scene.blocks) {
        json jb;
        jb["id"] = b.id;
        jb["shape"] = to_string(b.shape);
        if (b.shape == ShapeKind::Cylinder || b.shape == ShapeKind::HalfCylinder) {
            jb["radius"] = b.radius_m;
        } else {
            json verts = json::array();
            for (const Vec2& v : b.local) {
                verts.push_back({v[0], v[1]});
            }
            jb["vertices"] = verts;
        }
        jb["height_mm"] = to_mm(b.height);
        jb["base_mm"] = to_mm(b.base);
        jb["pose"] = {{"x", b.pose.x}, {"y", b.pose.y}, {"yaw", b.pose.yaw}};
        jb["color"] = b.color_tag;
        jb["graspable"] = b.graspable;
        jb["target"] = b.id == scenario.scene.target_id;
        blocks.push_back(std::move(jb));
    }
    doc["blocks"] = std::move(blocks);
    return doc.dump(2) + "\n";
}

void save_scenario(const std::string& path, const Scenario& scenario)
{
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot open " + path + " for writing");
    }
    os << scenario_to_json(scenario);
}

} // namespace gegrasp
