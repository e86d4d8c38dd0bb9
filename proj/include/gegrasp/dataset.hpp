#pragma once

// Labeled transition records, the "GEGD" file format and random-policy
// dataset collection.
//
// GEGD: magic "GEGD" | version u16 | record count u32 | records, each
//   kind u8 (0 push, 1 grasp) | value u8 | GEHM heightmap | GEHM target mask |
//   GEHM action mask. Little-endian throughout.

#include "gegrasp/generators.hpp"
#include "gegrasp/labels.hpp"
#include "gegrasp/scene.hpp"
#include "gegrasp/scorer.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace gegrasp {

struct LabeledSample {
    Heightmap heightmap;
    BitMask target_mask;
    ActionMask action_mask;
    ActionKind kind = ActionKind::Push;
    std::uint8_t value = 0;
};

[[nodiscard]] Example to_example(const LabeledSample& sample);

void write_sample(std::ostream& os, const LabeledSample& sample);
[[nodiscard]] LabeledSample read_sample(std::istream& is);

/// Streams records to disk and patches the record count on finish().
class DatasetWriter {
public:
    explicit DatasetWriter(const std::string& path);
    ~DatasetWriter();
    DatasetWriter(const DatasetWriter&) = delete;
    DatasetWriter& operator=(const DatasetWriter&) = delete;

    void write(const LabeledSample& sample);
    void finish();
    [[nodiscard]] std::uint32_t count() const { return count_; }

private:
    std::ofstream os_;
    std::string path_;
    std::uint32_t count_ = 0;
    bool finished_ = false;
};

/// Calls `visit` for every record; returns the record count.
std::size_t read_dataset(const std::string& path, const std::function<void(const LabeledSample&)>& visit);

struct CollectConfig {
    int min_blocks = 10;
    int max_blocks = 20;
    int reset_every = 8;
    GeneratorConfig generator;
    SimConfig sim;
    LabelConfig label;
};

struct CollectStats {
    int pushes = 0;
    int grasps = 0;
    int episodes = 0;
    std::array<int, 2> push_values{};  // counts of value 0 and 1
    std::array<int, 3> grasp_values{}; // counts of value 0, 1 and 2
};

/// Executes uniformly random generator candidates in fresh random clutter
/// until both kinds have `n_samples` records; each record goes to `sink`.
CollectStats collect_dataset(int n_samples, std::uint64_t seed, const CollectConfig& cfg,
                             const std::function<void(const LabeledSample&)>& sink);

struct ExampleSets {
    std::vector<Example> push;
    std::vector<Example> grasp;
    CollectStats stats;
};

/// collect_dataset with features extracted on the fly instead of keeping grids.
[[nodiscard]] ExampleSets collect_examples(int n_samples, std::uint64_t seed, const CollectConfig& cfg = {});

} // namespace gegrasp
