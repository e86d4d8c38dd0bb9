#pragma once

// Candidate scorers and the offline trainer for the shallow value network.

#include "gegrasp/features.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gegrasp {

class Scorer {
public:
    virtual ~Scorer() = default;

    /// `salt` only matters for scorers that draw random numbers.
    [[nodiscard]] virtual double score(const FeatureVector& f, std::uint64_t salt) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;

    /// Scores in input order; candidate i receives salt derive_seed(salt, i).
    [[nodiscard]] std::vector<double> score_batch(std::span<const FeatureVector> features, std::uint64_t salt) const;
    /// Single-threaded reference for score_batch.
    [[nodiscard]] std::vector<double> score_batch_serial(std::span<const FeatureVector> features,
                                                         std::uint64_t salt) const;
};

/// Fixed rules over the engineered features. On-target grasps with a clear
/// SCT margin score above 1; everything else stays below 1.
class HeuristicScorer final : public Scorer {
public:
    [[nodiscard]] double score(const FeatureVector& f, std::uint64_t salt) const override;
    [[nodiscard]] std::string name() const override { return "heuristic"; }
};

/// Uniform draws in [0, 1): the greedy policy never clears its threshold and
/// picks uniformly over all candidates.
class RandomScorer final : public Scorer {
public:
    [[nodiscard]] double score(const FeatureVector& f, std::uint64_t salt) const override;
    [[nodiscard]] std::string name() const override { return "random"; }
};

/// y = b + s.x + w2 . relu(W1 x + b1); the hidden branch can be disabled.
struct MlpParams {
    int inputs = kFeatureCount;
    int hidden = 64;
    bool linear_only = false;
    std::vector<double> w1; // hidden x inputs, row-major
    std::vector<double> b1; // hidden
    std::vector<double> w2; // hidden
    std::vector<double> skip; // inputs
    double b2 = 0.0;

    /// Every parameter in a fixed order: w1, b1, w2, skip, b2.
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] double& at(std::size_t i);
    [[nodiscard]] double at(std::size_t i) const;

    bool operator==(const MlpParams&) const = default;
};

class TrainableScorer final : public Scorer {
public:
    TrainableScorer() = default;
    explicit TrainableScorer(MlpParams params) : params_(std::move(params)) {}

    /// Small uniform random weights, zero biases.
    [[nodiscard]] static TrainableScorer initialize(int hidden, bool linear_only, std::uint64_t seed);

    [[nodiscard]] double score(const FeatureVector& f, std::uint64_t salt) const override;
    [[nodiscard]] std::string name() const override { return "trained"; }

    [[nodiscard]] double forward(std::span<const float> x) const;
    /// Adds scale * d(output)/d(params) into `grad` (same layout as params).
    void accumulate_gradient(std::span<const float> x, double scale, MlpParams& grad) const;

    [[nodiscard]] const MlpParams& params() const { return params_; }
    [[nodiscard]] MlpParams& params() { return params_; }

private:
    MlpParams params_;
};

struct Example {
    FeatureVector x{};
    float value = 0.0F;
};

struct TrainConfig {
    double learning_rate = 1e-4;
    double weight_decay = 2e-5;
    double momentum = 0.9;
    int batch_size = 32;
    int epochs = 20;
    std::uint64_t seed = 0;
    double holdout_fraction = 0.1;
    int hidden = 64;
    bool linear_only = false;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;   // mean L1 over the training split after the epoch
    double holdout_loss = 0.0; // mean L1 over the held-out split after the epoch
};

struct TrainResult {
    TrainableScorer model;
    std::vector<EpochStats> history;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> holdout_indices;
};

/// Mini-batch SGD with momentum on the mean absolute error and decoupled
/// weight decay on the weights. Throws std::invalid_argument on an empty set.
[[nodiscard]] TrainResult train(std::span<const Example> data, const TrainConfig& cfg);
/// Continues from an existing model instead of a fresh initialisation.
[[nodiscard]] TrainResult train(std::span<const Example> data, const TrainConfig& cfg, TrainableScorer start);

[[nodiscard]] double mean_l1(const TrainableScorer& model, std::span<const Example> data,
                             std::span<const std::size_t> indices);

struct GradientCheck {
    double max_abs_error = 0.0;
    int checked = 0;
    int skipped_kinks = 0;       // parameters whose perturbation crosses a ReLU kink
    bool skipped_residual = false; // |prediction - value| <= 1e-3: not checked at all
};

/// Analytic vs central finite-difference gradient (h = 1e-4) of |f(x) - y|
/// over `max_params` parameters drawn with `seed` (all when 0).
[[nodiscard]] GradientCheck gradient_check(const TrainableScorer& model, const Example& sample,
                                           std::size_t max_params = 0, std::uint64_t seed = 0);

// "GEEV" model files: magic | version u16 | inputs u32 | hidden u32 | linear_only u8 |
// then little-endian f32 w1, b1, w2, skip, b2.
void save_model(const std::string& path, const TrainableScorer& model);
[[nodiscard]] TrainableScorer load_model(const std::string& path);
void write_model(std::ostream& os, const TrainableScorer& model);
[[nodiscard]] TrainableScorer read_model(std::istream& is);

} // namespace gegrasp
