#pragma once

// Benchmark harness: seeded episode suites, metric aggregation and result files.

#include "gegrasp/policy.hpp"
#include "gegrasp/scenario.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gegrasp {

enum class Suite { RandomEasy, RandomNormal, RandomHard, Random, Challenging };
enum class ScorerKind { Heuristic, Trained, Random };

[[nodiscard]] std::string to_string(Suite s);
[[nodiscard]] Suite suite_from_string(const std::string& s);
[[nodiscard]] std::string to_string(ScorerKind k);
[[nodiscard]] ScorerKind scorer_from_string(const std::string& s);

struct BenchConfig {
    Suite suite = Suite::RandomEasy;
    int runs_per_case = 30;
    std::string profile = "sim"; // "sim" (5 motions) or "invisible" (15)
    ScorerKind scorer = ScorerKind::Heuristic;
    std::string model_dir;       // push.geev and grasp.geev, for trained scorers
    bool random_generators = false;
    bool pushing_enabled = true;
    std::uint64_t seed = 0;
    std::string challenging_dir = "data/challenging";
    int threads = 0; // 0: OpenMP default
};

/// Keys mirror the BenchConfig fields; unknown keys are a ParseError.
[[nodiscard]] BenchConfig bench_config_from_json(const std::string& text, BenchConfig base = {});

[[nodiscard]] PolicyConfig policy_for(const BenchConfig& cfg);

struct OwnedScorers {
    std::unique_ptr<Scorer> push;
    std::unique_ptr<Scorer> grasp;
    [[nodiscard]] Scorers view() const { return {push.get(), grasp.get()}; }
};

[[nodiscard]] OwnedScorers make_scorers(const BenchConfig& cfg);

struct BenchCase {
    std::string name;
    int blocks = 0;                  // random clutter
    std::optional<Scene> scene;      // fixed scenario
};

[[nodiscard]] std::vector<BenchCase> suite_cases(const BenchConfig& cfg);

/// The 8 shipped adversarial scenes, in file-name order. Throws Error if a
/// scene admits an SCT-passing grasp centred on the target.
[[nodiscard]] std::vector<Scenario> load_challenging_suite(const std::string& dir);
[[nodiscard]] bool has_initial_target_grasp(const Scene& scene, const GeneratorConfig& cfg = {});

struct EpisodeRow {
    std::string case_name;
    int run = 0;
    std::uint64_t seed = 0;
    std::uint64_t scene_hash = 0;
    EpisodeStatus status = EpisodeStatus::ExceededBudget;
    int motions = 0;

    bool operator==(const EpisodeRow&) const = default;
};

struct CaseMetrics {
    std::string name;
    int episodes = 0;
    int successes = 0;
    long long success_motions = 0;
    long long success_motions_sq = 0;

    [[nodiscard]] double success_rate() const;
    [[nodiscard]] double motion_efficiency() const;     // mean motions per captured target
    [[nodiscard]] double motion_efficiency_std() const; // population standard deviation
};

struct Metrics {
    CaseMetrics total;
    std::vector<CaseMetrics> cases;
};

/// Cases in order of first appearance.
[[nodiscard]] Metrics compute_metrics(const std::vector<EpisodeRow>& rows);

struct BenchResult {
    Metrics metrics;
    std::vector<EpisodeRow> rows;
    std::vector<std::vector<StepRecord>> steps; // per row
};

/// Scene for run `run` of a random-clutter case with `blocks` blocks.
[[nodiscard]] Scene random_case_scene(std::uint64_t seed, int blocks, int run);

[[nodiscard]] BenchResult run_benchmark(const BenchConfig& cfg, const Scorers& scorers);

[[nodiscard]] std::string metrics_json(const BenchConfig& cfg, const Metrics& m);
[[nodiscard]] std::string episodes_csv(const std::vector<EpisodeRow>& rows);
[[nodiscard]] std::vector<EpisodeRow> parse_episodes_csv(const std::string& text);
[[nodiscard]] std::string steps_log(const BenchResult& r);

/// Writes metrics.json, episodes.csv and steps.log into `dir` (created if needed).
void write_results(const std::string& dir, const BenchConfig& cfg, const BenchResult& r);

} // namespace gegrasp
