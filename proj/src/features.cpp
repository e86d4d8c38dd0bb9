#include "gegrasp/features.hpp"

#include "gegrasp/kernels.hpp"

#include <cmath>

namespace gegrasp {

namespace {

constexpr double kBinWidth = static_cast<double>(kFeatureWindow) / kFeatureBins; // 6.25 px
constexpr double kHeightScaleTenths = 3000.0;                                     // 300 mm

struct BinShare {
    int bin[2] = {0, 0};
    double weight[2] = {0.0, 0.0};
    int count = 0;
};

// Overlap of window pixel k, covering [k, k+1), with the bins.
const std::array<BinShare, kFeatureWindow>& bin_shares()
{
    static const auto table = [] {
        std::array<BinShare, kFeatureWindow> t{};
        for (int k = 0; k < kFeatureWindow; ++k) {
            BinShare& s = t[static_cast<std::size_t>(k)];
            const int b0 = static_cast<int>(std::floor(k / kBinWidth));
            const double edge = (b0 + 1) * kBinWidth;
            if (edge >= k + 1) {
                s.bin[0] = b0;
                s.weight[0] = 1.0 / kBinWidth;
                s.count = 1;
            } else {
                s.bin[0] = b0;
                s.weight[0] = (edge - k) / kBinWidth;
                s.bin[1] = b0 + 1;
                s.weight[1] = (k + 1 - edge) / kBinWidth;
                s.count = 2;
            }
        }
        return t;
    }();
    return table;
}

// Adds value * area share of window pixel (wx, wy) to the 16x16 bins.
void accumulate(std::span<float> bins, int wx, int wy, double value)
{
    const auto& shares = bin_shares();
    const BinShare& sx = shares[static_cast<std::size_t>(wx)];
    const BinShare& sy = shares[static_cast<std::size_t>(wy)];
    for (int j = 0; j < sy.count; ++j) {
        for (int i = 0; i < sx.count; ++i) {
            bins[static_cast<std::size_t>(sy.bin[j] * kFeatureBins + sx.bin[i])] +=
                static_cast<float>(value * sx.weight[i] * sy.weight[j]);
        }
    }
}

float clamp_feature(double v)
{
    return static_cast<float>(std::clamp(v, -1.0, 2.0));
}

struct Moments {
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

    void add(double x, double y)
    {
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    [[nodiscard]] double mx() const { return sx / n; }
    [[nodiscard]] double my() const { return sy / n; }
    [[nodiscard]] double axis() const
    {
        const double cxx = sxx / n - mx() * mx();
        const double cyy = syy / n - my() * my();
        const double cxy = sxy / n - mx() * my();
        return 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    }
};

} // namespace

BorderStats border_stats(const Heightmap& hm, const BitMask& tmask, const BorderConfig& cfg)
{
    BorderStats s;
    if (tmask.empty()) {
        return s;
    }
    s.border = border_mask(tmask, cfg.radius_px);
    const Tenths floor = to_tenths(cfg.ground_floor_mm);
    for (int i = 0; i < kGridCells; ++i) {
        if (s.border.test(i)) {
            ++s.size;
            if (hm.cells()[static_cast<std::size_t>(i)] > floor) {
                ++s.occupancy;
            }
        }
    }
    return s;
}

DecodedAction decode_geometry(const ActionMask& mask, ActionKind kind)
{
    if (mask.nonzero_count() == 0) {
        throw EmptyMaskError();
    }
    DecodedAction d;
    d.kind = kind;
    Moments all, near, far;
    for (const auto& e : mask.entries()) {
        const Pixel p = pixel_of_index(e.index);
        const double cx = p.x + 0.5;
        const double cy = p.y + 0.5;
        all.add(cx, cy);
        (e.code == 1 ? near : far).add(cx, cy);
    }
    if (kind == ActionKind::Grasp) {
        double axis = all.axis();
        if (axis < 0) {
            axis += kPi;
        }
        d.orientation_idx = static_cast<int>(std::lround(axis / kOrientationStep)) % 8;
        d.angle = grasp_angle(d.orientation_idx);
        d.anchor = {static_cast<int>(std::lround(all.mx())), static_cast<int>(std::lround(all.my()))};
        return d;
    }
    double ux = 1.0, uy = 0.0;
    if (near.n > 0 && far.n > 0) {
        ux = far.mx() - near.mx();
        uy = far.my() - near.my();
        const double len = std::hypot(ux, uy);
        ux /= len;
        uy /= len;
    }
    d.angle = std::atan2(uy, ux);
    // The proximal half's centre sits 15.5 px along the heading from the start.
    const Moments& ref = near.n > 0 ? near : far;
    const double offset = near.n > 0 ? kPushHalfPx / 2.0 : kPushHalfPx * 1.5;
    d.anchor = {static_cast<int>(std::lround(ref.mx() - offset * ux)),
                static_cast<int>(std::lround(ref.my() - offset * uy))};
    return d;
}

FeatureContext::FeatureContext(const Heightmap& hm, const BitMask& tmask, const BorderConfig& border)
    : hm_(&hm), tmask_(&tmask), centroid_(centroid(tmask)), border_(border_stats(hm, tmask, border))
{
    int visible = 0;
    const int x0 = centroid_.x - kFeatureWindow / 2;
    const int y0 = centroid_.y - kFeatureWindow / 2;
    std::span<float> hm_bins(static_bins_.data(), kFeatureBins * kFeatureBins);
    std::span<float> t_bins(static_bins_.data() + kFeatureBins * kFeatureBins, kFeatureBins * kFeatureBins);
    for (int i = 0; i < kGridCells; ++i) {
        if (tmask.test(i)) {
            ++visible;
            target_top_ = std::max(target_top_, hm.cells()[static_cast<std::size_t>(i)]);
        }
    }
    for (int wy = 0; wy < kFeatureWindow; ++wy) {
        for (int wx = 0; wx < kFeatureWindow; ++wx) {
            const Pixel p{x0 + wx, y0 + wy};
            if (!in_bounds(p)) {
                continue;
            }
            const double h = std::min(2.0, hm.at(p) / kHeightScaleTenths);
            if (h > 0) {
                accumulate(hm_bins, wx, wy, h);
            }
            if (tmask.test(p)) {
                accumulate(t_bins, wx, wy, 1.0);
            }
        }
    }
    border_ratio_ = border_.size > 0 ? static_cast<float>(static_cast<double>(border_.occupancy) / border_.size) : 0.0F;
    visible_ = clamp_feature(visible / 1000.0);
}

FeatureVector FeatureContext::extract(const ActionMask& mask, ActionKind kind) const
{
    FeatureVector f{};
    std::copy(static_bins_.begin(), static_bins_.end(), f.begin());
    const int x0 = centroid_.x - kFeatureWindow / 2;
    const int y0 = centroid_.y - kFeatureWindow / 2;
    std::span<float> a_bins(f.data() + 2 * kFeatureBins * kFeatureBins, kFeatureBins * kFeatureBins);
    for (const auto& e : mask.entries()) {
        const Pixel p = pixel_of_index(e.index);
        const int wx = p.x - x0;
        const int wy = p.y - y0;
        if (wx >= 0 && wy >= 0 && wx < kFeatureWindow && wy < kFeatureWindow) {
            accumulate(a_bins, wx, wy, ActionMask::code_value(e.code));
        }
    }

    const Heightmap& hm = *hm_;
    double on_target = 0.0;
    double margin_tenths = 0.0;
    Pixel anchor = centroid_;
    if (mask.nonzero_count() > 0) {
        const DecodedAction d = decode_geometry(mask, kind);
        anchor = d.anchor;
        const Pixel inside{std::clamp(anchor.x, 0, kGridSize - 1), std::clamp(anchor.y, 0, kGridSize - 1)};
        if (kind == ActionKind::Grasp) {
            const auto& z = kernels::grasp_zones(d.orientation_idx);
            const Tenths fingers =
                std::max(kernels::zone_max(hm, inside, z.finger_a), kernels::zone_max(hm, inside, z.finger_b));
            on_target = tmask_->test(inside) ? 1.0 : 0.0;
            margin_tenths = static_cast<double>(hm.at(inside)) - fingers - 250.0;
        } else {
            const Tenths foot = kernels::zone_max(hm, inside, kernels::push_footprint_offsets(d.angle));
            margin_tenths = static_cast<double>(target_top_ - 150) - foot;
        }
    }
    f[kKindFeature] = kind == ActionKind::Grasp ? 1.0F : 0.0F;
    f[kOnTargetFeature] = static_cast<float>(on_target);
    f[kDistanceFeature] =
        clamp_feature(std::hypot(anchor.x - centroid_.x, anchor.y - centroid_.y) / 100.0);
    f[kMarginFeature] = clamp_feature(margin_tenths / 1000.0);
    f[kBorderFeature] = border_ratio_;
    f[kVisibleFeature] = visible_;
    return f;
}

FeatureVector extract_features(const Heightmap& hm, const BitMask& tmask, const ActionMask& mask, ActionKind kind)
{
    return FeatureContext(hm, tmask).extract(mask, kind);
}

} // namespace gegrasp
