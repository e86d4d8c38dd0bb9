#include "gegrasp/scene.hpp"

#include "gegrasp/kernels.hpp"
#include "gegrasp/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace gegrasp {

namespace {

constexpr double kPxPerMetre = 1000.0 / kCellSizeMm;
constexpr double kOverlapTolM = 1e-6;
constexpr double kPushGapPx = 0.25;

const char* const kColors[] = {"red", "green", "blue", "yellow", "orange", "purple", "cyan", "brown"};

double dot(Vec2 a, Vec2 b)
{
    return a[0] * b[0] + a[1] * b[1];
}

PixelPolygon rect_polygon(Pixel anchor, double angle, double t0, double t1, double w0, double w1)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    PixelPolygon poly;
    for (auto [t, w] : {std::pair{t0, w0}, std::pair{t1, w0}, std::pair{t1, w1}, std::pair{t0, w1}}) {
        poly.push_back({anchor.x + t * c - w * s, anchor.y + t * s + w * c});
    }
    return poly;
}

std::vector<kernels::RenderItem> render_items(const Scene& scene)
{
    std::vector<kernels::RenderItem> items;
    items.reserve(scene.blocks.size());
    for (const Block& b : scene.blocks) {
        items.push_back({b.footprint_px(), b.top()});
    }
    return items;
}

bool inside_workspace(std::span<const Vec2> poly)
{
    return std::all_of(poly.begin(), poly.end(), [](const Vec2& v) {
        return v[0] >= 0.0 && v[1] >= 0.0 && v[0] <= kWorkspaceM && v[1] <= kWorkspaceM;
    });
}

// Re-rests every block, lowest first, on the highest block beneath it.
void settle_by_base(std::vector<Block>& blocks)
{
    std::vector<std::size_t> order(blocks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (blocks[a].base != blocks[b].base) {
            return blocks[a].base < blocks[b].base;
        }
        return blocks[a].id < blocks[b].id;
    });
    std::vector<std::vector<Vec2>> polys(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        polys[i] = blocks[i].footprint_m();
    }
    std::vector<std::size_t> placed;
    for (std::size_t i : order) {
        Tenths base = 0;
        for (std::size_t j : placed) {
            if (convex_overlap(polys[i], polys[j], kOverlapTolM)) {
                base = std::max(base, blocks[j].top());
            }
        }
        blocks[i].base = base;
        placed.push_back(i);
    }
}

std::vector<int> supports_of(const std::vector<Block>& blocks, std::size_t i)
{
    std::vector<int> out;
    if (blocks[i].base == 0) {
        return out;
    }
    const auto pi = blocks[i].footprint_m();
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (j != i && blocks[j].top() == blocks[i].base && convex_overlap(pi, blocks[j].footprint_m(), kOverlapTolM)) {
            out.push_back(static_cast<int>(j));
        }
    }
    return out;
}

template <typename Visit>
void for_each_block_pixel(const Block& block, Visit&& visit)
{
    const PixelPolygon poly = block.footprint_px();
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& v : poly) {
        min_x = std::min(min_x, v[0]);
        max_x = std::max(max_x, v[0]);
        min_y = std::min(min_y, v[1]);
        max_y = std::max(max_y, v[1]);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
    const int x1 = std::min(kGridSize - 1, static_cast<int>(std::ceil(max_x)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
    const int y1 = std::min(kGridSize - 1, static_cast<int>(std::ceil(max_y)) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (kernels::pixel_in_convex(poly, {x, y})) {
                visit(Pixel{x, y});
            }
        }
    }
}

struct PushFrame {
    Vec2 anchor;
    Vec2 u;
    Vec2 n;
};

std::vector<Vec2> translated(const std::vector<Vec2>& poly, Vec2 u, double d)
{
    std::vector<Vec2> out = poly;
    for (auto& v : out) {
        v[0] += u[0] * d;
        v[1] += u[1] * d;
    }
    return out;
}

// Displacements (px along u) of table-level blocks for a route of length L,
// or nullopt when the contact chain exceeds the allowed depth.
std::optional<std::vector<double>> resolve_push(const std::vector<std::vector<Vec2>>& polys,
                                                const std::vector<bool>& movable, const PushFrame& f, double length,
                                                int max_depth)
{
    const std::size_t n = polys.size();
    std::vector<double> disp(n, 0.0);
    std::vector<int> depth(n, 0);
    std::vector<double> t_min(n), t_max(n), t_mid(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lo = 1e300, hi = -1e300, sum = 0.0;
        for (const auto& v : polys[i]) {
            const double t = dot({v[0] - f.anchor[0], v[1] - f.anchor[1]}, f.u);
            lo = std::min(lo, t);
            hi = std::max(hi, t);
            sum += t;
        }
        t_min[i] = lo;
        t_max[i] = hi;
        t_mid[i] = sum / static_cast<double>(polys[i].size());
    }
    if (length <= 0.0) {
        return disp;
    }

    const double hw = kGripperWidthPx / 2.0;
    std::vector<Vec2> band;
    for (auto [t, w] : {std::pair{0.0, -hw}, std::pair{length, -hw}, std::pair{length, hw}, std::pair{0.0, hw}}) {
        band.push_back({f.anchor[0] + t * f.u[0] + w * f.n[0], f.anchor[1] + t * f.u[1] + w * f.n[1]});
    }

    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (!movable[i] || !convex_overlap(band, polys[i], 1e-9)) {
            continue;
        }
        const double need = length + kPushGapPx - t_min[i];
        if (need > 0.0) {
            disp[i] = need;
            depth[i] = 1;
            queue.push_back(i);
        }
    }

    int events = 0;
    while (!queue.empty()) {
        const std::size_t a = queue.front();
        queue.pop_front();
        std::vector<Vec2> sweep = polys[a];
        const auto moved = translated(polys[a], f.u, disp[a]);
        sweep.insert(sweep.end(), moved.begin(), moved.end());
        sweep = convex_hull(std::move(sweep));
        const double front = t_max[a] + disp[a];
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a || !movable[b]) {
                continue;
            }
            // Only blocks ahead of the mover get shoved.
            if (t_mid[b] + disp[b] <= t_mid[a] + disp[a]) {
                continue;
            }
            const double need = front + kPushGapPx - (t_min[b] + disp[b]);
            if (need <= 1e-9) {
                continue;
            }
            if (!convex_overlap(sweep, translated(polys[b], f.u, disp[b]), 1e-9)) {
                continue;
            }
            if (depth[a] + 1 > max_depth || ++events > 400) {
                return std::nullopt;
            }
            disp[b] += need;
            depth[b] = depth[a] + 1;
            queue.push_back(b);
        }
    }
    return disp;
}

} // namespace

std::string to_string(ShapeKind kind)
{
    switch (kind) {
    case ShapeKind::Cuboid:
        return "cuboid";
    case ShapeKind::Cylinder:
        return "cylinder";
    case ShapeKind::Prism:
        return "prism";
    case ShapeKind::HalfCylinder:
        return "half_cylinder";
    case ShapeKind::Polygon:
        return "polygon";
    }
    return "polygon";
}

ShapeKind shape_from_string(const std::string& name)
{
    if (name == "cuboid") {
        return ShapeKind::Cuboid;
    }
    if (name == "cylinder") {
        return ShapeKind::Cylinder;
    }
    if (name == "prism") {
        return ShapeKind::Prism;
    }
    if (name == "half_cylinder") {
        return ShapeKind::HalfCylinder;
    }
    if (name == "polygon") {
        return ShapeKind::Polygon;
    }
    throw std::invalid_argument("unknown shape '" + name + "'");
}

std::string to_string(GraspOutcomeKind kind)
{
    switch (kind) {
    case GraspOutcomeKind::PickedTarget:
        return "picked_target";
    case GraspOutcomeKind::PickedNontarget:
        return "picked_nontarget";
    case GraspOutcomeKind::Empty:
        return "empty";
    case GraspOutcomeKind::Collision:
        return "collision";
    }
    return "empty";
}

std::vector<Vec2> Block::footprint_m() const
{
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    std::vector<Vec2> out;
    out.reserve(local.size());
    for (const auto& v : local) {
        out.push_back({pose.x + c * v[0] - s * v[1], pose.y + s * v[0] + c * v[1]});
    }
    return out;
}

PixelPolygon Block::footprint_px() const
{
    auto poly = footprint_m();
    for (auto& v : poly) {
        v = world_to_px(v);
    }
    return poly;
}

double Block::area_m2() const
{
    double a = 0.0;
    for (std::size_t i = 0; i < local.size(); ++i) {
        const auto& p = local[i];
        const auto& q = local[(i + 1) % local.size()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return std::abs(a) / 2.0;
}

const Block* Scene::find(int id) const
{
    for (const Block& b : blocks) {
        if (b.id == id) {
            return &b;
        }
    }
    return nullptr;
}

std::vector<Vec2> regular_polygon(double radius_m, int sides)
{
    std::vector<Vec2> out;
    for (int i = 0; i < sides; ++i) {
        const double a = 2.0 * kPi * i / sides;
        out.push_back({radius_m * std::cos(a), radius_m * std::sin(a)});
    }
    return out;
}

std::vector<Vec2> half_disc(double radius_m, int arc_segments)
{
    // Flat side on the x axis, centred on the area centroid.
    const double cy = 4.0 * radius_m / (3.0 * kPi);
    std::vector<Vec2> out;
    for (int i = 0; i <= arc_segments; ++i) {
        const double a = kPi * i / arc_segments;
        out.push_back({radius_m * std::cos(a), radius_m * std::sin(a) - cy});
    }
    return out;
}

std::vector<Vec2> rectangle(double width_m, double depth_m)
{
    const double hx = width_m / 2.0;
    const double hy = depth_m / 2.0;
    return {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
}

void refresh_shape(Block& block)
{
    if (block.shape == ShapeKind::Cylinder) {
        block.local = regular_polygon(block.radius_m, 16);
    } else if (block.shape == ShapeKind::HalfCylinder) {
        block.local = half_disc(block.radius_m);
    }
}

Vec2 world_to_px(Vec2 world_m)
{
    return {world_m[0] * kPxPerMetre, world_m[1] * kPxPerMetre};
}

Vec2 px_to_world(Vec2 px)
{
    return {px[0] / kPxPerMetre, px[1] / kPxPerMetre};
}

bool convex_overlap(std::span<const Vec2> a, std::span<const Vec2> b, double tolerance)
{
    if (a.size() < 2 || b.size() < 2) {
        return false;
    }
    auto separated_on_edges = [&](std::span<const Vec2> p) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const Vec2& v0 = p[i];
            const Vec2& v1 = p[(i + 1) % p.size()];
            const Vec2 axis{-(v1[1] - v0[1]), v1[0] - v0[0]};
            const double len = std::hypot(axis[0], axis[1]);
            if (len < 1e-15) {
                continue;
            }
            double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
            for (const auto& v : a) {
                const double d = dot(v, axis) / len;
                amin = std::min(amin, d);
                amax = std::max(amax, d);
            }
            for (const auto& v : b) {
                const double d = dot(v, axis) / len;
                bmin = std::min(bmin, d);
                bmax = std::max(bmax, d);
            }
            if (amax <= bmin + tolerance || bmax <= amin + tolerance) {
                return true;
            }
        }
        return false;
    };
    return !separated_on_edges(a) && !separated_on_edges(b);
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts)
{
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) {
        return pts;
    }
    auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) {
            --k;
        }
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) {
            --k;
        }
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

Scene spawn_random_clutter(int n_blocks, std::uint64_t seed, const SimConfig& cfg)
{
    if (n_blocks < 1 || n_blocks > 30) {
        throw std::invalid_argument("n_blocks must be in [1, 30]");
    }
    Rng rng(seed);
    Scene scene;
    scene.rng_seed = seed;
    const double centre = kWorkspaceM / 2.0;
    const Tenths max_stack = to_tenths(cfg.max_stack_mm);

    for (int i = 0; i < n_blocks; ++i) {
        int attempts = 0;
        while (true) {
            if (++attempts > cfg.spawn_attempts) {
                throw SpawnFailure("could not place block " + std::to_string(i) + " after " +
                                   std::to_string(cfg.spawn_attempts) + " attempts");
            }
            Block b;
            b.id = i;
            b.shape = static_cast<ShapeKind>(uniform_index(rng, 4));
            switch (b.shape) {
            case ShapeKind::Cuboid:
                b.local = rectangle(uniform(rng, 0.02, 0.05), uniform(rng, 0.02, 0.05));
                break;
            case ShapeKind::Cylinder:
                b.radius_m = uniform(rng, 0.012, 0.025);
                break;
            case ShapeKind::Prism:
                b.local = regular_polygon(uniform(rng, 0.017, 0.03), 3);
                break;
            case ShapeKind::HalfCylinder:
                b.radius_m = uniform(rng, 0.015, 0.028);
                break;
            case ShapeKind::Polygon:
                break;
            }
            refresh_shape(b);
            b.height = to_tenths(uniform(rng, 25.0, 50.0));
            const double r = cfg.spawn_disc_radius_m * std::sqrt(uniform01(rng));
            const double phi = uniform(rng, 0.0, 2.0 * kPi);
            b.pose = {centre + r * std::cos(phi), centre + r * std::sin(phi), uniform(rng, 0.0, 2.0 * kPi)};
            b.color_tag = kColors[uniform_index(rng, std::size(kColors))];

            const auto poly = b.footprint_m();
            if (!inside_workspace(poly)) {
                continue;
            }
            Tenths base = 0;
            for (const Block& other : scene.blocks) {
                if (convex_overlap(poly, other.footprint_m(), kOverlapTolM)) {
                    base = std::max(base, other.top());
                }
            }
            if (base + b.height > max_stack) {
                continue;
            }
            b.base = base;
            scene.blocks.push_back(std::move(b));
            break;
        }
    }

    // The target must be at least partly visible from above.
    const Heightmap hm = render_heightmap(scene);
    std::vector<int> candidates;
    int best = 0;
    int best_visible = -1;
    for (const Block& b : scene.blocks) {
        const int visible = visible_pixel_count(hm, b);
        if (visible >= 30) {
            candidates.push_back(b.id);
        }
        if (visible > best_visible) {
            best_visible = visible;
            best = b.id;
        }
    }
    scene.target_id = candidates.empty() ? best
                                         : candidates[static_cast<std::size_t>(uniform_index(rng, candidates.size()))];
    return scene;
}

int visible_pixel_count(const Heightmap& hm, const Block& block)
{
    int count = 0;
    for_each_block_pixel(block, [&](Pixel p) {
        if (hm.at(p) == block.top()) {
            ++count;
        }
    });
    return count;
}

void settle_in_order(Scene& scene)
{
    std::vector<std::vector<Vec2>> polys;
    for (std::size_t i = 0; i < scene.blocks.size(); ++i) {
        Block& b = scene.blocks[i];
        const auto poly = b.footprint_m();
        Tenths base = 0;
        for (std::size_t j = 0; j < i; ++j) {
            if (convex_overlap(poly, polys[j], kOverlapTolM)) {
                base = std::max(base, scene.blocks[j].top());
            }
        }
        b.base = base;
        polys.push_back(poly);
    }
}

Heightmap render_heightmap(const Scene& scene)
{
    const auto items = render_items(scene);
    return kernels::omp::render(items);
}

BitMask target_mask(const Scene& scene)
{
    const Block* target = scene.find(scene.target_id);
    if (target == nullptr) {
        throw MissingTargetError();
    }
    const Heightmap hm = render_heightmap(scene);
    BitMask mask;
    for_each_block_pixel(*target, [&](Pixel p) {
        if (hm.at(p) == target->top()) {
            mask.set(p);
        }
    });
    return mask;
}

Scene simulate_push(const Scene& scene, Pixel start, double angle, const SimConfig& cfg)
{
    if (!in_bounds(start)) {
        throw std::out_of_range("push start outside grid");
    }
    Scene out = scene;
    auto& blocks = out.blocks;
    const std::size_t n = blocks.size();
    if (n == 0) {
        return out;
    }

    PushFrame frame{{static_cast<double>(start.x), static_cast<double>(start.y)},
                    {std::cos(angle), std::sin(angle)},
                    {-std::sin(angle), std::cos(angle)}};
    std::vector<std::vector<Vec2>> polys(n);
    std::vector<bool> movable(n);
    for (std::size_t i = 0; i < n; ++i) {
        polys[i] = blocks[i].footprint_px();
        movable[i] = blocks[i].base == 0;
    }

    auto disp = resolve_push(polys, movable, frame, kPushLengthPx, cfg.max_chain_depth);
    if (!disp) {
        // The gripper stalls where the contact chain would get too long.
        double lo = 0.0;
        double hi = kPushLengthPx;
        disp = resolve_push(polys, movable, frame, 0.0, cfg.max_chain_depth);
        for (int it = 0; it < 12; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (auto d = resolve_push(polys, movable, frame, mid, cfg.max_chain_depth)) {
                lo = mid;
                disp = std::move(d);
            } else {
                hi = mid;
            }
        }
    }

    // Stacked blocks ride on supports that slide less than the support-loss
    // distance and stay put (then drop) otherwise.
    const double loss_px = cfg.support_loss_mm / kCellSizeMm;
    std::vector<double> moved(n, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return blocks[a].base < blocks[b].base; });
    for (std::size_t i : order) {
        if (movable[i]) {
            moved[i] = (*disp)[i];
            continue;
        }
        double carried = 0.0;
        bool falls = false;
        for (int s : supports_of(scene.blocks, i)) {
            const double d = moved[static_cast<std::size_t>(s)];
            if (d >= loss_px) {
                falls = true;
            }
            carried = std::max(carried, d);
        }
        moved[i] = falls ? 0.0 : carried;
    }

    const double metres_per_px = kCellSizeMm / 1000.0;
    for (std::size_t i = 0; i < n; ++i) {
        blocks[i].pose.x += moved[i] * frame.u[0] * metres_per_px;
        blocks[i].pose.y += moved[i] * frame.u[1] * metres_per_px;
    }
    std::erase_if(blocks, [](const Block& b) {
        return b.pose.x < 0.0 || b.pose.y < 0.0 || b.pose.x > kWorkspaceM || b.pose.y > kWorkspaceM;
    });
    settle_by_base(blocks);
    return out;
}

GraspResult simulate_grasp(const Scene& scene, Pixel center, int orientation_idx, const SimConfig& cfg)
{
    if (!in_bounds(center)) {
        throw std::out_of_range("grasp centre outside grid");
    }
    GraspResult result{scene, {}};
    const Heightmap hm = render_heightmap(scene);
    const Tenths descent = grasp_descent(hm, center, orientation_idx, cfg);
    const auto fingers = finger_zone_polygons(center, orientation_idx);
    if (collision_oracle(scene, fingers, descent)) {
        result.outcome = {GraspOutcomeKind::Collision, -1};
        return result;
    }

    // Fingers close over the strip between the finger zones.
    const double angle = grasp_angle(orientation_idx % 8);
    const double gap_half = kGraspLengthPx / 2.0 - kFingerZonePx;
    const Tenths needed = descent + to_tenths(cfg.grasp_descent_margin_mm);
    const Block* chosen = nullptr;
    for (const Block& b : scene.blocks) {
        if (b.top() < needed) {
            continue;
        }
        const auto poly = b.footprint_px();
        double t_lo = 1e300, t_hi = -1e300;
        for_each_rect_pixel(center, angle, -gap_half, gap_half, -kGripperWidthPx / 2.0, kGripperWidthPx / 2.0,
                            [&](Pixel p, double t, double) {
                                if (kernels::pixel_in_convex(poly, p)) {
                                    t_lo = std::min(t_lo, t);
                                    t_hi = std::max(t_hi, t);
                                }
                            });
        if (t_hi < t_lo || std::lround(t_hi - t_lo) + 1 < cfg.min_grip_thickness_px) {
            continue;
        }
        if (chosen == nullptr || b.top() > chosen->top()) {
            chosen = &b;
        }
    }
    if (chosen == nullptr || !chosen->graspable) {
        result.outcome = {GraspOutcomeKind::Empty, -1};
        return result;
    }
    const int picked = chosen->id;
    result.outcome = {picked == scene.target_id ? GraspOutcomeKind::PickedTarget : GraspOutcomeKind::PickedNontarget,
                      picked};
    std::erase_if(result.scene.blocks, [picked](const Block& b) { return b.id == picked; });
    settle_by_base(result.scene.blocks);
    return result;
}

bool collision_oracle(const Scene& scene, std::span<const PixelPolygon> polygons, Tenths descent)
{
    struct Candidate {
        PixelPolygon poly;
        double x0, x1, y0, y1;
    };
    std::vector<Candidate> blocks;
    blocks.reserve(scene.blocks.size());
    for (const Block& b : scene.blocks) {
        if (b.top() <= descent) {
            continue;
        }
        Candidate c{b.footprint_px(), 1e300, -1e300, 1e300, -1e300};
        for (const auto& v : c.poly) {
            c.x0 = std::min(c.x0, v[0]);
            c.x1 = std::max(c.x1, v[0]);
            c.y0 = std::min(c.y0, v[1]);
            c.y1 = std::max(c.y1, v[1]);
        }
        blocks.push_back(std::move(c));
    }
    if (blocks.empty()) {
        return false;
    }
    for (const PixelPolygon& poly : polygons) {
        double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
        for (const auto& v : poly) {
            min_x = std::min(min_x, v[0]);
            max_x = std::max(max_x, v[0]);
            min_y = std::min(min_y, v[1]);
            max_y = std::max(max_y, v[1]);
        }
        const int x0 = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
        const int x1 = std::min(kGridSize - 1, static_cast<int>(std::ceil(max_x)) + 1);
        const int y0 = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
        const int y1 = std::min(kGridSize - 1, static_cast<int>(std::ceil(max_y)) + 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                if (!kernels::pixel_in_convex(poly, {x, y})) {
                    continue;
                }
                const double cx = x + 0.5, cy = y + 0.5;
                for (const Candidate& b : blocks) {
                    if (cx >= b.x0 - 1e-9 && cx <= b.x1 + 1e-9 && cy >= b.y0 - 1e-9 && cy <= b.y1 + 1e-9 &&
                        kernels::pixel_in_convex(b.poly, {x, y})) {
                        return true;
                    }
                }
            }
        }
    }
    return false;
}

std::array<PixelPolygon, 2> finger_zone_polygons(Pixel center, int orientation_idx)
{
    const double angle = grasp_angle(orientation_idx % 8);
    const double half = kGraspLengthPx / 2.0;
    const double hw = kGripperWidthPx / 2.0;
    return {rect_polygon(center, angle, -half, -half + kFingerZonePx, -hw, hw),
            rect_polygon(center, angle, half - kFingerZonePx, half, -hw, hw)};
}

PixelPolygon push_footprint_polygon(Pixel start, double angle)
{
    const double hw = kGripperWidthPx / 2.0;
    return rect_polygon(start, angle, 0.0, kFingerZonePx, -hw, hw);
}

Tenths grasp_descent(const Heightmap& hm, Pixel center, int orientation_idx, const SimConfig& cfg)
{
    const Tenths h_center = kernels::zone_max(hm, center, kernels::grasp_zones(orientation_idx).center);
    return std::max<Tenths>(0, h_center - to_tenths(cfg.grasp_descent_margin_mm));
}

std::uint64_t scene_hash(const Scene& scene)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFFU;
            h *= 0x100000001B3ULL;
        }
    };
    auto mixd = [&](double d) { mix(std::bit_cast<std::uint64_t>(d)); };
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(scene.target_id)));
    mix(scene.blocks.size());
    for (const Block& b : scene.blocks) {
        mix(static_cast<std::uint64_t>(b.id));
        mix(static_cast<std::uint64_t>(b.shape));
        mix(b.local.size());
        for (const auto& v : b.local) {
            mixd(v[0]);
            mixd(v[1]);
        }
        mixd(b.radius_m);
        mix(static_cast<std::uint64_t>(b.height));
        mix(static_cast<std::uint64_t>(b.base));
        mixd(b.pose.x);
        mixd(b.pose.y);
        mixd(b.pose.yaw);
        mix(b.graspable ? 1U : 0U);
        for (char c : b.color_tag) {
            mix(static_cast<unsigned char>(c));
        }
    }
    return h;
}

} // namespace gegrasp
