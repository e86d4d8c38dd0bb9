#include "gegrasp/scorer.hpp"

#include "gegrasp/grid_io.hpp"
#include "gegrasp/rng.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace gegrasp {

namespace {

constexpr std::uint16_t kModelVersion = 1;
constexpr int kBinsPerChannel = kFeatureBins * kFeatureBins;

double channel_sum(const FeatureVector& f, int channel)
{
    double s = 0.0;
    for (int i = 0; i < kBinsPerChannel; ++i) {
        s += f[static_cast<std::size_t>(channel * kBinsPerChannel + i)];
    }
    return s;
}

} // namespace

std::vector<double> Scorer::score_batch(std::span<const FeatureVector> features, std::uint64_t salt) const
{
    std::vector<double> out(features.size());
    const auto n = static_cast<std::int64_t>(features.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        out[u] = score(features[u], derive_seed(salt, u));
    }
    return out;
}

std::vector<double> Scorer::score_batch_serial(std::span<const FeatureVector> features, std::uint64_t salt) const
{
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        out[i] = score(features[i], derive_seed(salt, i));
    }
    return out;
}

double HeuristicScorer::score(const FeatureVector& f, std::uint64_t) const
{
    const double margin = f[kMarginFeature];
    const double distance = f[kDistanceFeature];
    const double border = f[kBorderFeature];
    const double action = channel_sum(f, 2);
    double over_target = 0.0;
    double over_clutter = 0.0;
    if (action > 0.0) {
        for (int i = 0; i < kBinsPerChannel; ++i) {
            const double a = f[static_cast<std::size_t>(2 * kBinsPerChannel + i)];
            over_target += a * f[static_cast<std::size_t>(kBinsPerChannel + i)];
            // 30 mm of mean height in a bin counts as fully occupied
            over_clutter += a * std::min(1.0, f[static_cast<std::size_t>(i)] / 0.1);
        }
        over_target /= action;
        over_clutter /= action;
    }
    if (margin < 0.0) {
        return -1.0 + 0.5 * margin;
    }
    if (f[kKindFeature] > 0.5F) {
        if (f[kOnTargetFeature] > 0.5F) {
            return 1.4 + 0.4 * std::min(margin, 1.0);
        }
        // Removing a close neighbour pays off when the target is crowded.
        return 0.25 + 0.35 * border + 0.2 * over_target + 0.15 * over_clutter - 0.3 * std::min(distance, 0.7);
    }
    return 0.15 + 0.45 * border + 0.25 * over_target + 0.1 * over_clutter - 0.2 * std::min(distance, 0.7);
}

double RandomScorer::score(const FeatureVector&, std::uint64_t salt) const
{
    return static_cast<double>(mix_seed(salt) >> 11) * 0x1.0p-53;
}

std::size_t MlpParams::size() const
{
    return w1.size() + b1.size() + w2.size() + skip.size() + 1;
}

double& MlpParams::at(std::size_t i)
{
    for (std::vector<double>* v : {&w1, &b1, &w2, &skip}) {
        if (i < v->size()) {
            return (*v)[i];
        }
        i -= v->size();
    }
    return b2;
}

double MlpParams::at(std::size_t i) const
{
    return const_cast<MlpParams*>(this)->at(i);
}

TrainableScorer TrainableScorer::initialize(int hidden, bool linear_only, std::uint64_t seed)
{
    MlpParams p;
    p.hidden = linear_only ? 0 : hidden;
    p.linear_only = linear_only;
    Rng rng(seed);
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(p.inputs));
    p.w1.resize(static_cast<std::size_t>(p.hidden * p.inputs));
    for (auto& w : p.w1) {
        w = uniform(rng, -in_scale, in_scale);
    }
    p.b1.assign(static_cast<std::size_t>(p.hidden), 0.0);
    p.w2.resize(static_cast<std::size_t>(p.hidden));
    const double hid_scale = p.hidden > 0 ? 1.0 / std::sqrt(static_cast<double>(p.hidden)) : 0.0;
    for (auto& w : p.w2) {
        w = uniform(rng, -hid_scale, hid_scale);
    }
    p.skip.resize(static_cast<std::size_t>(p.inputs));
    for (auto& w : p.skip) {
        w = uniform(rng, -in_scale, in_scale);
    }
    p.b2 = 0.0;
    return TrainableScorer(std::move(p));
}

double TrainableScorer::forward(std::span<const float> x) const
{
    const MlpParams& p = params_;
    double y = p.b2;
    for (int i = 0; i < p.inputs; ++i) {
        y += p.skip[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < p.hidden; ++j) {
        const double* row = p.w1.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(p.inputs);
        double a = p.b1[static_cast<std::size_t>(j)];
        for (int i = 0; i < p.inputs; ++i) {
            a += row[i] * x[static_cast<std::size_t>(i)];
        }
        if (a > 0.0) {
            y += p.w2[static_cast<std::size_t>(j)] * a;
        }
    }
    return y;
}

void TrainableScorer::accumulate_gradient(std::span<const float> x, double scale, MlpParams& grad) const
{
    const MlpParams& p = params_;
    const auto n_in = static_cast<std::size_t>(p.inputs);
    grad.b2 += scale;
    for (std::size_t i = 0; i < n_in; ++i) {
        grad.skip[i] += scale * x[i];
    }
    for (int j = 0; j < p.hidden; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        const double* row = p.w1.data() + uj * n_in;
        double a = p.b1[uj];
        for (std::size_t i = 0; i < n_in; ++i) {
            a += row[i] * x[i];
        }
        if (a <= 0.0) {
            continue;
        }
        grad.w2[uj] += scale * a;
        const double back = scale * p.w2[uj];
        grad.b1[uj] += back;
        double* grow = grad.w1.data() + uj * n_in;
        for (std::size_t i = 0; i < n_in; ++i) {
            grow[i] += back * x[i];
        }
    }
}

double TrainableScorer::score(const FeatureVector& f, std::uint64_t) const
{
    return forward(f);
}

double mean_l1(const TrainableScorer& model, std::span<const Example> data, std::span<const std::size_t> indices)
{
    if (indices.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i : indices) {
        sum += std::abs(model.forward(data[i].x) - data[i].value);
    }
    return sum / static_cast<double>(indices.size());
}

TrainResult train(std::span<const Example> data, const TrainConfig& cfg)
{
    return train(data, cfg, TrainableScorer::initialize(cfg.hidden, cfg.linear_only, derive_seed(cfg.seed, 1)));
}

TrainResult train(std::span<const Example> data, const TrainConfig& cfg, TrainableScorer start)
{
    if (data.empty()) {
        throw std::invalid_argument("training set is empty");
    }
    if (!(cfg.learning_rate >= 0.0) || cfg.batch_size < 1 || cfg.epochs < 0) {
        throw std::invalid_argument("invalid training configuration");
    }
    TrainResult result;
    result.model = std::move(start);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    {
        Rng rng(derive_seed(cfg.seed, 0));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_index(rng, i))]);
        }
    }
    const auto holdout = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * static_cast<double>(data.size())));
    result.holdout_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout));
    result.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(holdout), order.end());
    std::sort(result.holdout_indices.begin(), result.holdout_indices.end());
    std::sort(result.train_indices.begin(), result.train_indices.end());

    MlpParams& params = result.model.params();
    MlpParams velocity = params;
    MlpParams grad = params;
    auto zero = [](MlpParams& m) {
        for (std::vector<double>* v : {&m.w1, &m.b1, &m.w2, &m.skip}) {
            std::fill(v->begin(), v->end(), 0.0);
        }
        m.b2 = 0.0;
    };
    zero(velocity);
    auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g, bool decay) {
        for (std::size_t k = 0; k < w.size(); ++k) {
            v[k] = cfg.momentum * v[k] + g[k];
            w[k] -= cfg.learning_rate * v[k];
            if (decay) {
                w[k] -= cfg.learning_rate * cfg.weight_decay * w[k];
            }
        }
    };

    std::vector<std::size_t> batch_order = result.train_indices;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch) + 1));
        for (std::size_t i = batch_order.size(); i > 1; --i) {
            std::swap(batch_order[i - 1], batch_order[static_cast<std::size_t>(uniform_index(rng, i))]);
        }
        for (std::size_t start = 0; start < batch_order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(batch_order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            zero(grad);
            const double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t b = start; b < end; ++b) {
                const Example& ex = data[batch_order[b]];
                const double r = result.model.forward(ex.x) - ex.value;
                const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
                if (sign != 0.0) {
                    result.model.accumulate_gradient(ex.x, sign * inv, grad);
                }
            }
            // Biases are exempt from weight decay.
            step(params.w1, velocity.w1, grad.w1, true);
            step(params.b1, velocity.b1, grad.b1, false);
            step(params.w2, velocity.w2, grad.w2, true);
            step(params.skip, velocity.skip, grad.skip, true);
            velocity.b2 = cfg.momentum * velocity.b2 + grad.b2;
            params.b2 -= cfg.learning_rate * velocity.b2;
        }
        result.history.push_back({epoch, mean_l1(result.model, data, result.train_indices),
                                  mean_l1(result.model, data, result.holdout_indices)});
    }
    return result;
}

GradientCheck gradient_check(const TrainableScorer& model, const Example& sample, std::size_t max_params,
                             std::uint64_t seed)
{
    GradientCheck out;
    const double y = model.forward(sample.x);
    const double residual = y - sample.value;
    if (std::abs(residual) <= 1e-3) {
        out.skipped_residual = true;
        return out;
    }
    MlpParams grad = model.params();
    for (std::size_t k = 0; k < grad.size(); ++k) {
        grad.at(k) = 0.0;
    }
    model.accumulate_gradient(sample.x, residual > 0.0 ? 1.0 : -1.0, grad);

    std::vector<std::size_t> which(model.params().size());
    std::iota(which.begin(), which.end(), std::size_t{0});
    if (max_params > 0 && max_params < which.size()) {
        Rng rng(seed);
        for (std::size_t i = 0; i < max_params; ++i) {
            std::swap(which[i], which[i + static_cast<std::size_t>(uniform_index(rng, which.size() - i))]);
        }
        which.resize(max_params);
    }

    const MlpParams& base = model.params();
    const auto n_in = static_cast<std::size_t>(base.inputs);
    auto preacts = [&](const MlpParams& p) {
        std::vector<double> a(static_cast<std::size_t>(p.hidden));
        for (std::size_t j = 0; j < a.size(); ++j) {
            a[j] = p.b1[j];
            for (std::size_t i = 0; i < n_in; ++i) {
                a[j] += p.w1[j * n_in + i] * sample.x[i];
            }
        }
        return a;
    };
    const std::vector<double> a0 = preacts(base);
    constexpr double h = 1e-4;
    TrainableScorer probe = model;
    for (std::size_t k : which) {
        const double original = base.at(k);
        probe.params().at(k) = original + h;
        const auto a_plus = preacts(probe.params());
        const double f_plus = std::abs(probe.forward(sample.x) - sample.value);
        probe.params().at(k) = original - h;
        const auto a_minus = preacts(probe.params());
        const double f_minus = std::abs(probe.forward(sample.x) - sample.value);
        probe.params().at(k) = original;
        bool kink = false;
        for (std::size_t j = 0; j < a0.size(); ++j) {
            kink |= (a_plus[j] > 0.0) != (a_minus[j] > 0.0);
        }
        if (kink) {
            ++out.skipped_kinks;
            continue;
        }
        const double numeric = (f_plus - f_minus) / (2.0 * h);
        out.max_abs_error = std::max(out.max_abs_error, std::abs(numeric - grad.at(k)));
        ++out.checked;
    }
    return out;
}

void write_model(std::ostream& os, const TrainableScorer& model)
{
    const MlpParams& p = model.params();
    le::write_magic(os, "GEEV");
    le::write_u16(os, kModelVersion);
    le::write_u32(os, static_cast<std::uint32_t>(p.inputs));
    le::write_u32(os, static_cast<std::uint32_t>(p.hidden));
    le::write_u8(os, p.linear_only ? 1 : 0);
    for (std::size_t k = 0; k < p.size(); ++k) {
        le::write_f32(os, static_cast<float>(p.at(k)));
    }
}

TrainableScorer read_model(std::istream& is)
{
    le::expect_magic(is, "GEEV");
    const auto version = le::read_u16(is);
    if (version != kModelVersion) {
        throw FormatError("unsupported GEEV version " + std::to_string(version));
    }
    MlpParams p;
    p.inputs = static_cast<int>(le::read_u32(is));
    p.hidden = static_cast<int>(le::read_u32(is));
    p.linear_only = le::read_u8(is) != 0;
    if (p.inputs != kFeatureCount || p.hidden < 0 || p.hidden > 4096) {
        throw FormatError("GEEV dimensions do not match the feature layout");
    }
    p.w1.resize(static_cast<std::size_t>(p.hidden) * static_cast<std::size_t>(p.inputs));
    p.b1.resize(static_cast<std::size_t>(p.hidden));
    p.w2.resize(static_cast<std::size_t>(p.hidden));
    p.skip.resize(static_cast<std::size_t>(p.inputs));
    for (std::size_t k = 0; k < p.size(); ++k) {
        const float v = le::read_f32(is);
        if (!std::isfinite(v)) {
            throw FormatError("non-finite model parameter");
        }
        p.at(k) = v;
    }
    return TrainableScorer(std::move(p));
}

void save_model(const std::string& path, const TrainableScorer& model)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("cannot open " + path + " for writing");
    }
    write_model(os, model);
}

TrainableScorer load_model(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("cannot open " + path);
    }
    return read_model(is);
}

} // namespace gegrasp
