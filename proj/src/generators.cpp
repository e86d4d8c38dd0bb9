#include "gegrasp/generators.hpp"

#include "gegrasp/rng.hpp"

#include <array>
#include <iomanip>
#include <numeric>

namespace gegrasp {

namespace {

constexpr int kQuadrants = 4;

PushCandidate make_push(const Heightmap& hm, Pixel start, kernels::PushDirection dir, double angle, Pixel target,
                        Tenths limit)
{
    PushCandidate c;
    c.start = start;
    c.angle = angle;
    c.direction = dir;
    c.quadrant = quadrant_of(start, target);
    c.footprint_max = kernels::zone_max(hm, start, kernels::push_footprint_offsets(angle));
    c.limit = limit;
    c.mask = rasterize_push(start, angle);
    return c;
}

GraspCandidate make_grasp(const Heightmap& hm, const BitMask& tmask, Pixel center, int idx, Pixel target)
{
    const auto& z = kernels::grasp_zones(idx);
    GraspCandidate c;
    c.center = center;
    c.orientation_idx = idx;
    c.on_target = tmask.test(center);
    c.quadrant = quadrant_of(center, target);
    c.center_max = kernels::zone_max(hm, center, z.center);
    c.finger_max = std::max(kernels::zone_max(hm, center, z.finger_a), kernels::zone_max(hm, center, z.finger_b));
    c.mask = rasterize_grasp(center, idx);
    return c;
}

// Picks up to the per-quadrant cap from each bucket with its own stream so
// the result does not depend on how enumeration was parallelised.
std::vector<std::size_t> quadrant_sample(const std::array<std::vector<std::size_t>, kQuadrants>& buckets,
                                         const GeneratorConfig& cfg, std::uint64_t seed)
{
    std::vector<std::size_t> chosen;
    for (int q = 0; q < kQuadrants; ++q) {
        const auto& bucket = buckets[static_cast<std::size_t>(q)];
        for (std::size_t i : sample_without_replacement(bucket.size(), static_cast<std::size_t>(cfg.per_quadrant_cap),
                                                        derive_seed(seed, static_cast<std::uint64_t>(q)))) {
            chosen.push_back(bucket[i]);
        }
    }
    std::sort(chosen.begin(), chosen.end());
    if (chosen.size() > static_cast<std::size_t>(cfg.total_cap)) {
        const auto keep = sample_without_replacement(chosen.size(), static_cast<std::size_t>(cfg.total_cap),
                                                     derive_seed(seed, kQuadrants));
        std::vector<std::size_t> trimmed;
        for (std::size_t i : keep) {
            trimmed.push_back(chosen[i]);
        }
        chosen = std::move(trimmed);
    }
    return chosen;
}

} // namespace

int quadrant_of(Pixel p, Pixel origin)
{
    const bool right = p.x >= origin.x;
    const bool below = p.y >= origin.y;
    if (below) {
        return right ? 0 : 1;
    }
    return right ? 3 : 2;
}

Tenths target_top(const Heightmap& hm, const BitMask& tmask)
{
    Tenths top = -1;
    for (int i = 0; i < kGridCells; ++i) {
        if (tmask.test(i)) {
            top = std::max(top, hm.cells()[static_cast<std::size_t>(i)]);
        }
    }
    if (top < 0) {
        throw EmptyMaskError();
    }
    return top;
}

bool sct_push(const Heightmap& hm, const BitMask& tmask, Pixel start, double angle, const GeneratorConfig& cfg)
{
    const Tenths limit = target_top(hm, tmask) - to_tenths(cfg.push_height_margin_mm);
    return kernels::zone_max(hm, start, kernels::push_footprint_offsets(angle)) <= limit;
}

bool sct_grasp(const Heightmap& hm, Pixel center, int orientation_idx, const GeneratorConfig& cfg)
{
    const auto& z = kernels::grasp_zones(orientation_idx);
    const Tenths fingers =
        std::max(kernels::zone_max(hm, center, z.finger_a), kernels::zone_max(hm, center, z.finger_b));
    return kernels::zone_max(hm, center, z.center) >= fingers + to_tenths(cfg.grasp_height_margin_mm);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t cap, std::uint64_t seed)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t k = std::min(n, cap);
    if (k < n) {
        Rng rng(seed);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
            std::swap(idx[i], idx[j]);
        }
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<PushCandidate> generate_pushes(const Heightmap& hm, const BitMask& tmask, const GeneratorConfig& cfg,
                                           std::uint64_t seed)
{
    const Pixel target = centroid(tmask);
    const Region roi = make_region(target, cfg.roi_half_extent);
    const Tenths limit = target_top(hm, tmask) - to_tenths(cfg.push_height_margin_mm);
    const auto hits = kernels::omp::push_sct_scan(hm, roi, target, limit);

    std::array<std::vector<std::size_t>, kQuadrants> buckets;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        buckets[static_cast<std::size_t>(quadrant_of(hits[i].start, target))].push_back(i);
    }
    std::vector<PushCandidate> out;
    for (std::size_t i : quadrant_sample(buckets, cfg, seed)) {
        out.push_back(make_push(hm, hits[i].start, hits[i].direction, hits[i].angle, target, limit));
    }
    return out;
}

std::vector<GraspCandidate> generate_grasps(const Heightmap& hm, const BitMask& tmask, const GeneratorConfig& cfg,
                                            std::uint64_t seed)
{
    const Pixel target = centroid(tmask);
    const Region roi = make_region(target, cfg.roi_half_extent);
    const auto hits = kernels::omp::grasp_sct_scan(hm, roi, to_tenths(cfg.grasp_height_margin_mm));

    std::array<std::vector<std::size_t>, kQuadrants> buckets;
    std::vector<std::size_t> exempt;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (cfg.exempt_on_target && tmask.test(hits[i].center)) {
            exempt.push_back(i);
        } else {
            buckets[static_cast<std::size_t>(quadrant_of(hits[i].center, target))].push_back(i);
        }
    }
    std::vector<std::size_t> chosen = quadrant_sample(buckets, cfg, seed);
    chosen.insert(chosen.end(), exempt.begin(), exempt.end());
    std::sort(chosen.begin(), chosen.end());

    std::vector<GraspCandidate> out;
    for (std::size_t i : chosen) {
        out.push_back(make_grasp(hm, tmask, hits[i].center, hits[i].orientation_idx, target));
    }
    return out;
}

std::vector<PushCandidate> random_pushes(const Heightmap& hm, const BitMask& tmask, const GeneratorConfig& cfg,
                                         std::uint64_t seed)
{
    const Pixel target = centroid(tmask);
    const Region roi = make_region(target, cfg.roi_half_extent);
    const Tenths limit = target_top(hm, tmask) - to_tenths(cfg.push_height_margin_mm);
    // index = pixel-in-roi * 3 + direction
    std::array<std::vector<std::size_t>, kQuadrants> buckets;
    for (int y = roi.y0; y < roi.y1; ++y) {
        for (int x = roi.x0; x < roi.x1; ++x) {
            if (Pixel{x, y} == target) {
                continue;
            }
            const auto base = static_cast<std::size_t>((y - roi.y0) * roi.width() + (x - roi.x0)) * 3;
            auto& bucket = buckets[static_cast<std::size_t>(quadrant_of({x, y}, target))];
            for (std::size_t d = 0; d < 3; ++d) {
                bucket.push_back(base + d);
            }
        }
    }
    std::vector<PushCandidate> out;
    for (std::size_t i : quadrant_sample(buckets, cfg, seed)) {
        const int cell = static_cast<int>(i / 3);
        const Pixel start{roi.x0 + cell % roi.width(), roi.y0 + cell / roi.width()};
        const auto dir = static_cast<kernels::PushDirection>(i % 3);
        out.push_back(make_push(hm, start, dir, kernels::push_heading(start, target, dir), target, limit));
    }
    return out;
}

std::vector<GraspCandidate> random_grasps(const Heightmap& hm, const BitMask& tmask, const GeneratorConfig& cfg,
                                          std::uint64_t seed)
{
    const Pixel target = centroid(tmask);
    const Region roi = make_region(target, cfg.roi_half_extent);
    std::array<std::vector<std::size_t>, kQuadrants> buckets;
    for (int y = roi.y0; y < roi.y1; ++y) {
        for (int x = roi.x0; x < roi.x1; ++x) {
            const auto base = static_cast<std::size_t>((y - roi.y0) * roi.width() + (x - roi.x0)) * kGraspOrientations;
            auto& bucket = buckets[static_cast<std::size_t>(quadrant_of({x, y}, target))];
            for (std::size_t k = 0; k < kGraspOrientations; ++k) {
                bucket.push_back(base + k);
            }
        }
    }
    std::vector<GraspCandidate> out;
    for (std::size_t i : quadrant_sample(buckets, cfg, seed)) {
        const int cell = static_cast<int>(i / kGraspOrientations);
        const Pixel center{roi.x0 + cell % roi.width(), roi.y0 + cell / roi.width()};
        out.push_back(make_grasp(hm, tmask, center, static_cast<int>(i % kGraspOrientations), target));
    }
    return out;
}

const char* to_string(kernels::PushDirection d)
{
    switch (d) {
    case kernels::PushDirection::Left:
        return "left";
    case kernels::PushDirection::Right:
        return "right";
    case kernels::PushDirection::Facing:
        break;
    }
    return "facing";
}

void write_candidates(std::ostream& os, const std::vector<PushCandidate>& pushes,
                      const std::vector<GraspCandidate>& grasps)
{
    const auto flags = os.flags();
    os << std::fixed;
    for (const auto& c : pushes) {
        os << "push " << c.start.x << ' ' << c.start.y << ' ' << std::setprecision(6) << c.angle << ' '
           << to_string(c.direction) << " q" << c.quadrant << std::setprecision(1)
           << " footprint_mm=" << to_mm(c.footprint_max) << " limit_mm=" << to_mm(c.limit) << '\n';
    }
    for (const auto& c : grasps) {
        os << "grasp " << c.center.x << ' ' << c.center.y << ' ' << c.orientation_idx << ' '
           << (c.on_target ? "on" : "off") << " q" << c.quadrant << std::setprecision(1)
           << " center_mm=" << to_mm(c.center_max) << " fingers_mm=" << to_mm(c.finger_max) << '\n';
    }
    os.flags(flags);
}

} // namespace gegrasp
