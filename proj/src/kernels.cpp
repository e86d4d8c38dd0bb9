#include "gegrasp/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gegrasp::kernels {

namespace {

constexpr double kHalfWidth = kGripperWidthPx / 2.0;
constexpr double kGraspHalfLength = kGraspLengthPx / 2.0;

std::vector<Offset> rect_offsets(double angle, double t0, double t1, double w0, double w1)
{
    // Rasterize around an anchor far from the border so nothing is clipped.
    const Pixel origin{kGridSize / 2, kGridSize / 2};
    std::vector<Offset> out;
    for_each_rect_pixel(origin, angle, t0, t1, w0, w1,
                        [&](Pixel p, double, double) { out.push_back({p.x - origin.x, p.y - origin.y}); });
    return out;
}

std::array<GraspZones, 8> build_grasp_zones()
{
    std::array<GraspZones, 8> zones;
    for (int k = 0; k < 8; ++k) {
        const double a = grasp_angle(k);
        zones[static_cast<std::size_t>(k)].center = rect_offsets(a, -kHalfWidth, kHalfWidth, -kHalfWidth, kHalfWidth);
        zones[static_cast<std::size_t>(k)].finger_a =
            rect_offsets(a, -kGraspHalfLength, -kGraspHalfLength + kFingerZonePx, -kHalfWidth, kHalfWidth);
        zones[static_cast<std::size_t>(k)].finger_b =
            rect_offsets(a, kGraspHalfLength - kFingerZonePx, kGraspHalfLength, -kHalfWidth, kHalfWidth);
    }
    return zones;
}

bool zone_exceeds(const Heightmap& hm, Pixel anchor, std::span<const Offset> offsets, Tenths limit)
{
    for (const Offset& o : offsets) {
        const Pixel p{anchor.x + o.dx, anchor.y + o.dy};
        if (in_bounds(p) && hm.at(p) > limit) {
            return true;
        }
    }
    return false;
}

// Same pixel set as push_footprint_offsets(angle) placed at `a`, tested
// in place with an early exit.
bool footprint_exceeds(const Heightmap& hm, Pixel a, double angle, Tenths limit)
{
    constexpr double eps = 1e-9;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (double t : {0.0, static_cast<double>(kFingerZonePx)}) {
        for (double w : {-kHalfWidth, kHalfWidth}) {
            min_x = std::min(min_x, t * c - w * s);
            max_x = std::max(max_x, t * c - w * s);
            min_y = std::min(min_y, t * s + w * c);
            max_y = std::max(max_y, t * s + w * c);
        }
    }
    const int y0 = std::max(0, a.y + static_cast<int>(std::floor(min_y)) - 1);
    const int y1 = std::min(kGridSize - 1, a.y + static_cast<int>(std::ceil(max_y)) + 1);
    const int x0 = std::max(0, a.x + static_cast<int>(std::floor(min_x)) - 1);
    const int x1 = std::min(kGridSize - 1, a.x + static_cast<int>(std::ceil(max_x)) + 1);
    for (int y = y0; y <= y1; ++y) {
        const double dy = y + 0.5 - a.y;
        for (int x = x0; x <= x1; ++x) {
            if (hm.at(x, y) <= limit) {
                continue;
            }
            const double dx = x + 0.5 - a.x;
            const double t = dx * c + dy * s;
            const double w = -dx * s + dy * c;
            if (t >= -eps && t < kFingerZonePx - eps && w >= -kHalfWidth - eps && w < kHalfWidth - eps) {
                return true;
            }
        }
    }
    return false;
}

// Max over the square window [x-r, x+r] x [y-r, y+r] (clipped), separable.
std::vector<Tenths> window_max(const Heightmap& hm, int r)
{
    std::vector<Tenths> rows(kGridCells, 0);
    for (int y = 0; y < kGridSize; ++y) {
        for (int x = 0; x < kGridSize; ++x) {
            Tenths m = 0;
            const int lo = std::max(0, x - r);
            const int hi = std::min(kGridSize - 1, x + r);
            for (int i = lo; i <= hi; ++i) {
                m = std::max(m, hm.at(i, y));
            }
            rows[static_cast<std::size_t>(y * kGridSize + x)] = m;
        }
    }
    std::vector<Tenths> out(kGridCells, 0);
    for (int y = 0; y < kGridSize; ++y) {
        const int lo = std::max(0, y - r);
        const int hi = std::min(kGridSize - 1, y + r);
        for (int x = 0; x < kGridSize; ++x) {
            Tenths m = 0;
            for (int j = lo; j <= hi; ++j) {
                m = std::max(m, rows[static_cast<std::size_t>(j * kGridSize + x)]);
            }
            out[static_cast<std::size_t>(y * kGridSize + x)] = m;
        }
    }
    return out;
}

void grasp_scan_pixel(const Heightmap& hm, Pixel p, Tenths margin, std::vector<GraspHit>& out)
{
    const Tenths source = hm.at(p);
    if (source < margin) {
        return;
    }
    const Tenths limit = source - margin;
    for (int k = 0; k < 8; ++k) {
        const GraspZones& z = grasp_zones(k);
        const Tenths center = zone_max(hm, p, z.center);
        if (zone_exceeds(hm, p, z.finger_a, limit) || zone_exceeds(hm, p, z.finger_b, limit)) {
            continue;
        }
        const Tenths fingers = std::max(zone_max(hm, p, z.finger_a), zone_max(hm, p, z.finger_b));
        out.push_back({p, k, center, fingers});
        out.push_back({p, k + 8, center, fingers});
    }
}

void sort_grasp_hits(std::vector<GraspHit>& hits)
{
    std::stable_sort(hits.begin(), hits.end(), [](const GraspHit& a, const GraspHit& b) {
        if (a.center.index() != b.center.index()) {
            return a.center.index() < b.center.index();
        }
        return a.orientation_idx < b.orientation_idx;
    });
}

} // namespace

const GraspZones& grasp_zones(int orientation_idx)
{
    static const std::array<GraspZones, 8> zones = build_grasp_zones();
    return zones[static_cast<std::size_t>(((orientation_idx % 8) + 8) % 8)];
}

std::vector<Offset> push_footprint_offsets(double angle)
{
    return rect_offsets(angle, 0.0, kFingerZonePx, -kHalfWidth, kHalfWidth);
}

Tenths zone_max(const Heightmap& hm, Pixel anchor, std::span<const Offset> offsets)
{
    Tenths m = 0;
    for (const Offset& o : offsets) {
        const Pixel p{anchor.x + o.dx, anchor.y + o.dy};
        if (in_bounds(p)) {
            m = std::max(m, hm.at(p));
        }
    }
    return m;
}

double push_heading(Pixel start, Pixel target, PushDirection direction)
{
    const double base = std::atan2(static_cast<double>(target.y - start.y), static_cast<double>(target.x - start.x));
    switch (direction) {
    case PushDirection::Left:
        return base + kOrientationStep;
    case PushDirection::Right:
        return base - kOrientationStep;
    case PushDirection::Facing:
        break;
    }
    return base;
}

bool pixel_in_convex(std::span<const std::array<double, 2>> polygon, Pixel p)
{
    const double px = p.x + 0.5;
    const double py = p.y + 0.5;
    bool pos = false;
    bool neg = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % n];
        const double cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
        if (cross > 1e-12) {
            pos = true;
        } else if (cross < -1e-12) {
            neg = true;
        }
        if (pos && neg) {
            return false;
        }
    }
    return n >= 3;
}

namespace serial {

BitMask dilate(const BitMask& mask, int radius_px)
{
    if (radius_px < 1) {
        throw std::invalid_argument("dilation radius must be >= 1");
    }
    BitMask out;
    const int r2 = radius_px * radius_px;
    for (int i = 0; i < kGridCells; ++i) {
        if (!mask.test(i)) {
            continue;
        }
        const Pixel c = pixel_of_index(i);
        for (int dy = -radius_px; dy <= radius_px; ++dy) {
            for (int dx = -radius_px; dx <= radius_px; ++dx) {
                const Pixel q{c.x + dx, c.y + dy};
                if (dx * dx + dy * dy <= r2 && in_bounds(q)) {
                    out.set(q);
                }
            }
        }
    }
    return out;
}

std::vector<GraspHit> grasp_sct_scan(const Heightmap& hm, const Region& region, Tenths margin)
{
    std::vector<GraspHit> hits;
    for (int y = region.y0; y < region.y1; ++y) {
        for (int x = region.x0; x < region.x1; ++x) {
            const Pixel p{x, y};
            for (int k = 0; k < kGraspOrientations; ++k) {
                const GraspZones& z = grasp_zones(k);
                const Tenths center = zone_max(hm, p, z.center);
                const Tenths fingers = std::max(zone_max(hm, p, z.finger_a), zone_max(hm, p, z.finger_b));
                if (hm.at(p) >= fingers + margin && center >= fingers + margin) {
                    hits.push_back({p, k, center, fingers});
                }
            }
        }
    }
    return hits;
}

std::vector<PushHit> push_sct_scan(const Heightmap& hm, const Region& region, Pixel target, Tenths limit)
{
    std::vector<PushHit> hits;
    if (limit < 0) {
        return hits;
    }
    for (int y = region.y0; y < region.y1; ++y) {
        for (int x = region.x0; x < region.x1; ++x) {
            const Pixel p{x, y};
            if (p == target) {
                continue;
            }
            for (int d = 0; d < 3; ++d) {
                const auto dir = static_cast<PushDirection>(d);
                const double angle = push_heading(p, target, dir);
                const auto offsets = push_footprint_offsets(angle);
                if (zone_max(hm, p, offsets) <= limit) {
                    hits.push_back({p, dir, angle});
                }
            }
        }
    }
    return hits;
}

Heightmap render(std::span<const RenderItem> items)
{
    std::vector<Tenths> cells(kGridCells, 0);
    for (const RenderItem& item : items) {
        double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
        for (const auto& v : item.polygon) {
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
                if (pixel_in_convex(item.polygon, {x, y})) {
                    auto& c = cells[static_cast<std::size_t>(y * kGridSize + x)];
                    c = std::max(c, item.top);
                }
            }
        }
    }
    return Heightmap(std::move(cells));
}

} // namespace serial

namespace omp {

BitMask dilate(const BitMask& mask, int radius_px)
{
    if (radius_px < 1) {
        throw std::invalid_argument("dilation radius must be >= 1");
    }
    // Gather form: each output row reads a disc around its pixels.
    std::vector<int> span_of_dy(static_cast<std::size_t>(2 * radius_px + 1));
    for (int dy = -radius_px; dy <= radius_px; ++dy) {
        span_of_dy[static_cast<std::size_t>(dy + radius_px)] =
            static_cast<int>(std::floor(std::sqrt(static_cast<double>(radius_px * radius_px - dy * dy)) + 1e-9));
    }
    // Only pixels within the mask's bounding box grown by r can be hit.
    int bx0 = kGridSize, by0 = kGridSize, bx1 = -1, by1 = -1;
    for (int i = 0; i < kGridCells; ++i) {
        if (mask.test(i)) {
            bx0 = std::min(bx0, i % kGridSize);
            bx1 = std::max(bx1, i % kGridSize);
            by0 = std::min(by0, i / kGridSize);
            by1 = std::max(by1, i / kGridSize);
        }
    }
    BitMask result;
    if (bx1 < 0) {
        return result;
    }
    const int ox0 = std::max(0, bx0 - radius_px), ox1 = std::min(kGridSize - 1, bx1 + radius_px);
    const int oy0 = std::max(0, by0 - radius_px), oy1 = std::min(kGridSize - 1, by1 + radius_px);
    std::vector<std::uint8_t> out(kGridCells, 0);
#pragma omp parallel for schedule(static)
    for (int y = oy0; y <= oy1; ++y) {
        for (int x = ox0; x <= ox1; ++x) {
            bool hit = false;
            for (int dy = -radius_px; dy <= radius_px && !hit; ++dy) {
                const int sy = y + dy;
                if (sy < 0 || sy >= kGridSize) {
                    continue;
                }
                const int half = span_of_dy[static_cast<std::size_t>(dy + radius_px)];
                const int lo = std::max(0, x - half);
                const int hi = std::min(kGridSize - 1, x + half);
                for (int sx = lo; sx <= hi; ++sx) {
                    if (mask.test(sy * kGridSize + sx)) {
                        hit = true;
                        break;
                    }
                }
            }
            out[static_cast<std::size_t>(y * kGridSize + x)] = hit ? 1 : 0;
        }
    }
    for (int i = 0; i < kGridCells; ++i) {
        if (out[static_cast<std::size_t>(i)] != 0) {
            result.set(i);
        }
    }
    return result;
}

std::vector<GraspHit> grasp_sct_scan(const Heightmap& hm, const Region& region, Tenths margin)
{
    const int rows = region.height();
    std::vector<std::vector<GraspHit>> per_row(static_cast<std::size_t>(std::max(rows, 0)));
#pragma omp parallel for schedule(dynamic, 4)
    for (int r = 0; r < rows; ++r) {
        const int y = region.y0 + r;
        auto& out = per_row[static_cast<std::size_t>(r)];
        for (int x = region.x0; x < region.x1; ++x) {
            grasp_scan_pixel(hm, {x, y}, margin, out);
        }
        sort_grasp_hits(out);
    }
    std::vector<GraspHit> hits;
    for (auto& row : per_row) {
        hits.insert(hits.end(), row.begin(), row.end());
    }
    return hits;
}

std::vector<PushHit> push_sct_scan(const Heightmap& hm, const Region& region, Pixel target, Tenths limit)
{
    std::vector<PushHit> hits;
    if (limit < 0) {
        return hits;
    }
    // Every footprint pixel lies within 14 px of the anchor on each axis.
    const std::vector<Tenths> near_max = window_max(hm, 14);
    const int rows = region.height();
    std::vector<std::vector<PushHit>> per_row(static_cast<std::size_t>(std::max(rows, 0)));
#pragma omp parallel for schedule(dynamic, 4)
    for (int r = 0; r < rows; ++r) {
        const int y = region.y0 + r;
        auto& out = per_row[static_cast<std::size_t>(r)];
        for (int x = region.x0; x < region.x1; ++x) {
            const Pixel p{x, y};
            if (p == target) {
                continue;
            }
            const bool all_clear = near_max[static_cast<std::size_t>(y * kGridSize + x)] <= limit;
            for (int d = 0; d < 3; ++d) {
                const auto dir = static_cast<PushDirection>(d);
                const double angle = push_heading(p, target, dir);
                if (all_clear || !footprint_exceeds(hm, p, angle, limit)) {
                    out.push_back({p, dir, angle});
                }
            }
        }
    }
    for (auto& row : per_row) {
        hits.insert(hits.end(), row.begin(), row.end());
    }
    return hits;
}

Heightmap render(std::span<const RenderItem> items)
{
    struct Box {
        int x0, x1, y0, y1;
    };
    std::vector<Box> boxes;
    boxes.reserve(items.size());
    for (const RenderItem& item : items) {
        double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
        for (const auto& v : item.polygon) {
            min_x = std::min(min_x, v[0]);
            max_x = std::max(max_x, v[0]);
            min_y = std::min(min_y, v[1]);
            max_y = std::max(max_y, v[1]);
        }
        boxes.push_back({std::max(0, static_cast<int>(std::floor(min_x)) - 1),
                         std::min(kGridSize - 1, static_cast<int>(std::ceil(max_x)) + 1),
                         std::max(0, static_cast<int>(std::floor(min_y)) - 1),
                         std::min(kGridSize - 1, static_cast<int>(std::ceil(max_y)) + 1)});
    }
    std::vector<Tenths> cells(kGridCells, 0);
    const int n = static_cast<int>(items.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < kGridSize; ++y) {
        for (int i = 0; i < n; ++i) {
            const Box& b = boxes[static_cast<std::size_t>(i)];
            if (y < b.y0 || y > b.y1) {
                continue;
            }
            const RenderItem& item = items[static_cast<std::size_t>(i)];
            for (int x = b.x0; x <= b.x1; ++x) {
                if (pixel_in_convex(item.polygon, {x, y})) {
                    auto& c = cells[static_cast<std::size_t>(y * kGridSize + x)];
                    c = std::max(c, item.top);
                }
            }
        }
    }
    return Heightmap(std::move(cells));
}

} // namespace omp

} // namespace gegrasp::kernels
