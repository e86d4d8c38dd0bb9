#include "gegrasp/dataset.hpp"

#include "gegrasp/grid_io.hpp"
#include "gegrasp/rng.hpp"

namespace gegrasp {

namespace {

constexpr std::uint16_t kDatasetVersion = 1;
constexpr std::streamoff kCountOffset = 6;

} // namespace

Example to_example(const LabeledSample& sample)
{
    return {extract_features(sample.heightmap, sample.target_mask, sample.action_mask, sample.kind),
            static_cast<float>(sample.value)};
}

void write_sample(std::ostream& os, const LabeledSample& sample)
{
    le::write_u8(os, static_cast<std::uint8_t>(sample.kind));
    le::write_u8(os, sample.value);
    write_heightmap(os, sample.heightmap);
    write_bitmask(os, sample.target_mask);
    write_action_mask(os, sample.action_mask);
}

LabeledSample read_sample(std::istream& is)
{
    LabeledSample s;
    const std::uint8_t kind = le::read_u8(is);
    if (kind > 1) {
        throw FormatError("bad record kind " + std::to_string(kind));
    }
    s.kind = static_cast<ActionKind>(kind);
    s.value = le::read_u8(is);
    if (s.value > (s.kind == ActionKind::Grasp ? 2 : 1)) {
        throw FormatError("value " + std::to_string(s.value) + " not allowed for this record kind");
    }
    s.heightmap = read_heightmap(is);
    s.target_mask = read_bitmask(is);
    s.action_mask = read_action_mask(is, s.kind);
    return s;
}

DatasetWriter::DatasetWriter(const std::string& path) : os_(path, std::ios::binary), path_(path)
{
    if (!os_) {
        throw Error("cannot open " + path + " for writing");
    }
    le::write_magic(os_, "GEGD");
    le::write_u16(os_, kDatasetVersion);
    le::write_u32(os_, 0);
}

DatasetWriter::~DatasetWriter()
{
    try {
        finish();
    } catch (...) {
        // destructors must not throw; finish() reports errors when called directly
    }
}

void DatasetWriter::write(const LabeledSample& sample)
{
    write_sample(os_, sample);
    ++count_;
}

void DatasetWriter::finish()
{
    if (finished_) {
        return;
    }
    finished_ = true;
    os_.seekp(kCountOffset);
    le::write_u32(os_, count_);
    os_.close();
    if (!os_) {
        throw Error("failed writing " + path_);
    }
}

std::size_t read_dataset(const std::string& path, const std::function<void(const LabeledSample&)>& visit)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("cannot open " + path);
    }
    le::expect_magic(is, "GEGD");
    const auto version = le::read_u16(is);
    if (version != kDatasetVersion) {
        throw FormatError("unsupported GEGD version " + std::to_string(version));
    }
    const std::uint32_t count = le::read_u32(is);
    for (std::uint32_t i = 0; i < count; ++i) {
        visit(read_sample(is));
    }
    return count;
}

CollectStats collect_dataset(int n_samples, std::uint64_t seed, const CollectConfig& cfg,
                             const std::function<void(const LabeledSample&)>& sink)
{
    if (n_samples < 1) {
        throw std::invalid_argument("n_samples must be >= 1");
    }
    CollectStats stats;
    Rng rng(derive_seed(seed, 0xC0111EC7));
    std::uint64_t step_counter = 0;
    std::uint64_t episode = 0;
    while (stats.pushes < n_samples || stats.grasps < n_samples) {
        const std::uint64_t scene_seed = derive_seed(seed, episode++);
        const int n_blocks =
            cfg.min_blocks + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cfg.max_blocks - cfg.min_blocks + 1)));
        Scene scene;
        try {
            scene = spawn_random_clutter(n_blocks, scene_seed, cfg.sim);
        } catch (const SpawnFailure&) {
            continue;
        }
        ++stats.episodes;
        const int target = scene.target_id;
        for (int action = 0; action < cfg.reset_every; ++action) {
            const bool need_push = stats.pushes < n_samples;
            const bool need_grasp = stats.grasps < n_samples;
            if (!need_push && !need_grasp) {
                break;
            }
            const Heightmap hm = render_heightmap(scene);
            const BitMask tmask = target_mask(scene);
            if (tmask.empty()) {
                break;
            }
            ActionKind kind = need_push && need_grasp ? (uniform01(rng) < 0.5 ? ActionKind::Push : ActionKind::Grasp)
                                                      : (need_push ? ActionKind::Push : ActionKind::Grasp);
            const std::uint64_t gen_seed = derive_seed(seed, 0x1000000 + step_counter++);
            std::vector<PushCandidate> pushes;
            std::vector<GraspCandidate> grasps;
            auto generate = [&](ActionKind k) {
                if (k == ActionKind::Push) {
                    pushes = generate_pushes(hm, tmask, cfg.generator, gen_seed);
                    return !pushes.empty();
                }
                grasps = generate_grasps(hm, tmask, cfg.generator, gen_seed);
                return !grasps.empty();
            };
            if (!generate(kind)) {
                const ActionKind other = kind == ActionKind::Push ? ActionKind::Grasp : ActionKind::Push;
                const bool other_needed = other == ActionKind::Push ? need_push : need_grasp;
                if (!other_needed || !generate(other)) {
                    break;
                }
                kind = other;
            }

            LabeledSample sample{hm, tmask, {}, kind, 0};
            bool reset = false;
            if (kind == ActionKind::Push) {
                const PushCandidate& c = pushes[static_cast<std::size_t>(uniform_index(rng, pushes.size()))];
                Scene after = simulate_push(scene, c.start, c.angle, cfg.sim);
                sample.action_mask = c.mask;
                if (after.has_target()) {
                    sample.value = static_cast<std::uint8_t>(label_push(scene, after, target, cfg.label));
                } else {
                    reset = true; // target left the workspace
                }
                scene = std::move(after);
                ++stats.pushes;
                stats.push_values[sample.value]++;
            } else {
                const GraspCandidate& c = grasps[static_cast<std::size_t>(uniform_index(rng, grasps.size()))];
                GraspResult r = simulate_grasp(scene, c.center, c.orientation_idx, cfg.sim);
                sample.action_mask = c.mask;
                sample.value = static_cast<std::uint8_t>(label_grasp(r.outcome, scene, r.scene, target, cfg.label));
                reset = r.outcome.kind == GraspOutcomeKind::PickedTarget;
                scene = std::move(r.scene);
                ++stats.grasps;
                stats.grasp_values[sample.value]++;
            }
            sink(sample);
            if (reset) {
                break;
            }
        }
    }
    return stats;
}

ExampleSets collect_examples(int n_samples, std::uint64_t seed, const CollectConfig& cfg)
{
    ExampleSets sets;
    sets.stats = collect_dataset(n_samples, seed, cfg, [&](const LabeledSample& s) {
        (s.kind == ActionKind::Push ? sets.push : sets.grasp).push_back(to_example(s));
    });
    return sets;
}

} // namespace gegrasp
