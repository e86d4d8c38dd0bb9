#include "gegrasp/grid.hpp"

#include "gegrasp/kernels.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace gegrasp {

Heightmap::Heightmap(std::vector<Tenths> cells, double cell_size_mm)
    : cells_(std::move(cells)), cell_size_mm_(cell_size_mm)
{
    if (cells_.size() != static_cast<std::size_t>(kGridCells)) {
        throw std::invalid_argument("heightmap must have 224x224 cells");
    }
    if (!(cell_size_mm_ > 0.0)) {
        throw std::invalid_argument("cell size must be positive");
    }
    for (Tenths h : cells_) {
        if (h < 0 || h >= kMaxHeightTenths) {
            throw std::invalid_argument("height outside [0, 1000) mm");
        }
    }
}

void Heightmap::set(Pixel p, Tenths value)
{
    if (!in_bounds(p)) {
        throw std::out_of_range("pixel outside grid");
    }
    if (value < 0 || value >= kMaxHeightTenths) {
        throw std::invalid_argument("height outside [0, 1000) mm");
    }
    cells_[static_cast<std::size_t>(p.index())] = value;
}

Tenths Heightmap::max() const
{
    return *std::max_element(cells_.begin(), cells_.end());
}

int BitMask::popcount() const
{
    return std::accumulate(bits_.begin(), bits_.end(), 0);
}

BitMask BitMask::minus(const BitMask& other) const
{
    BitMask out;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        out.bits_[i] = (bits_[i] != 0 && other.bits_[i] == 0) ? 1 : 0;
    }
    return out;
}

bool BitMask::subset_of(const BitMask& other) const
{
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] != 0 && other.bits_[i] == 0) {
            return false;
        }
    }
    return true;
}

ActionMask::ActionMask(ActionGeometry geometry, std::vector<Entry> entries, int nominal_pixels)
    : geometry_(geometry), entries_(std::move(entries)), nominal_pixels_(nominal_pixels)
{
    const auto by_index = [](const Entry& a, const Entry& b) { return a.index < b.index; };
    if (!std::is_sorted(entries_.begin(), entries_.end(), by_index)) {
        std::sort(entries_.begin(), entries_.end(), by_index);
    }
}

float ActionMask::value(Pixel p) const
{
    if (!in_bounds(p)) {
        return 0.0F;
    }
    const int idx = p.index();
    auto it = std::lower_bound(entries_.begin(), entries_.end(), idx,
                               [](const Entry& e, int i) { return e.index < i; });
    if (it == entries_.end() || it->index != idx) {
        return 0.0F;
    }
    return code_value(it->code);
}

int ActionMask::count_code(std::uint8_t code) const
{
    return static_cast<int>(
        std::count_if(entries_.begin(), entries_.end(), [code](const Entry& e) { return e.code == code; }));
}

double ActionMask::coverage() const
{
    if (nominal_pixels_ == 0) {
        return 0.0;
    }
    return static_cast<double>(entries_.size()) / nominal_pixels_;
}

std::vector<float> ActionMask::to_dense() const
{
    std::vector<float> dense(kGridCells, 0.0F);
    for (const Entry& e : entries_) {
        dense[static_cast<std::size_t>(e.index)] = code_value(e.code);
    }
    return dense;
}

bool ActionMask::same_pixels(const ActionMask& other) const
{
    if (entries_.size() != other.entries_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].index != other.entries_[i].index || entries_[i].code != other.entries_[i].code) {
            return false;
        }
    }
    return true;
}

Region make_region(Pixel center, int half_extent)
{
    Region r;
    r.center = center;
    r.half_extent = half_extent;
    r.x0 = std::max(0, center.x - half_extent);
    r.y0 = std::max(0, center.y - half_extent);
    r.x1 = std::min(kGridSize, center.x + half_extent);
    r.y1 = std::min(kGridSize, center.y + half_extent);
    return r;
}

Pixel centroid(const BitMask& mask)
{
    std::int64_t sx = 0, sy = 0, n = 0;
    const auto bytes = mask.bytes();
    for (int i = 0; i < kGridCells; ++i) {
        if (bytes[static_cast<std::size_t>(i)] != 0) {
            sx += i % kGridSize;
            sy += i / kGridSize;
            ++n;
        }
    }
    if (n == 0) {
        throw EmptyMaskError();
    }
    // floor(mean + 1/2) in exact integer arithmetic
    return {static_cast<int>((2 * sx + n) / (2 * n)), static_cast<int>((2 * sy + n) / (2 * n))};
}

Region roi_of_target(const BitMask& mask, int half_extent)
{
    return make_region(centroid(mask), half_extent);
}

namespace {

// Rounds half-integers up; the shears below add whole pixels only.
double round_shift(double v)
{
    return std::floor(v + 0.5);
}

template <typename Visit>
void rotated_cells(Pixel anchor, double angle, int i0, int i1, int j0, int j1, Visit&& visit)
{
    // Exact quarter turns first, then a three-shear rotation by the residual
    // in [-45, 45] degrees. Each step permutes lattice cells, so the map is
    // injective and an unclipped rectangle keeps all its cells.
    const int quarter = static_cast<int>(std::lround(angle / (kPi / 2.0)));
    const double residual = angle - quarter * (kPi / 2.0);
    const double a = -std::tan(residual / 2.0);
    const double b = std::sin(residual);
    const int q = ((quarter % 4) + 4) % 4;
    for (int i = i0; i < i1; ++i) {
        for (int j = j0; j < j1; ++j) {
            double u = i + 0.5;
            double v = j + 0.5;
            for (int k = 0; k < q; ++k) {
                const double t = u;
                u = -v;
                v = t;
            }
            u += round_shift(a * v);
            v += round_shift(b * u);
            u += round_shift(a * v);
            const Pixel p{anchor.x + static_cast<int>(std::floor(u)), anchor.y + static_cast<int>(std::floor(v))};
            if (in_bounds(p)) {
                visit(p, i, j);
            }
        }
    }
}

// Rasters come out in lattice order; a stable counting pass over the covered
// rows restores grid order without a comparison sort.
void order_by_index(std::vector<ActionMask::Entry>& entries)
{
    if (entries.empty()) {
        return;
    }
    int lo = entries.front().index / kGridSize, hi = lo;
    for (const auto& e : entries) {
        lo = std::min(lo, e.index / kGridSize);
        hi = std::max(hi, e.index / kGridSize);
    }
    std::vector<int> start(static_cast<std::size_t>(hi - lo + 2), 0);
    for (const auto& e : entries) {
        ++start[static_cast<std::size_t>(e.index / kGridSize - lo + 1)];
    }
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<ActionMask::Entry> out(entries.size());
    for (const auto& e : entries) {
        out[static_cast<std::size_t>(start[static_cast<std::size_t>(e.index / kGridSize - lo)]++)] = e;
    }
    for (int r = 0; r + 1 < static_cast<int>(start.size()); ++r) {
        const auto b = out.begin() + (r == 0 ? 0 : start[static_cast<std::size_t>(r - 1)]);
        const auto f = out.begin() + start[static_cast<std::size_t>(r)];
        std::sort(b, f, [](const ActionMask::Entry& a, const ActionMask::Entry& c) { return a.index < c.index; });
    }
    entries = std::move(out);
}

} // namespace

void for_each_rotated_cell(Pixel anchor, double angle, int i0, int i1, int j0, int j1,
                           const std::function<void(Pixel, int, int)>& visit)
{
    rotated_cells(anchor, angle, i0, i1, j0, j1, visit);
}

ActionMask rasterize_push(Pixel start, double angle)
{
    std::vector<ActionMask::Entry> entries;
    entries.reserve(kPushMaskPixels);
    rotated_cells(start, angle, 0, kPushLengthPx, -kGripperWidthPx / 2, kGripperWidthPx / 2,
                          [&](Pixel p, int i, int) {
                              const std::uint8_t code = i < kPushHalfPx ? 1 : 2;
                              entries.push_back({p.index(), code});
                          });
    order_by_index(entries);
    return ActionMask({ActionKind::Push, start, angle, 0}, std::move(entries), kPushMaskPixels);
}

ActionMask rasterize_grasp(Pixel center, int orientation_idx)
{
    if (orientation_idx < 0 || orientation_idx >= kGraspOrientations) {
        throw std::invalid_argument("orientation index must be in 0..15");
    }
    // A rectangle is symmetric under a half turn, so k and k+8 share one raster.
    const double raster_angle = grasp_angle(orientation_idx % 8);
    std::vector<ActionMask::Entry> entries;
    entries.reserve(kGraspMaskPixels);
    rotated_cells(center, raster_angle, -kGraspLengthPx / 2, kGraspLengthPx / 2, -kGripperWidthPx / 2,
                          kGripperWidthPx / 2, [&](Pixel p, int, int) { entries.push_back({p.index(), 2}); });
    order_by_index(entries);
    return ActionMask({ActionKind::Grasp, center, grasp_angle(orientation_idx), orientation_idx}, std::move(entries),
                      kGraspMaskPixels);
}

BitMask dilate(const BitMask& mask, int radius_px)
{
    return kernels::omp::dilate(mask, radius_px);
}

BitMask border_mask(const BitMask& mask, int radius_px)
{
    return dilate(mask, radius_px).minus(mask);
}

} // namespace gegrasp
