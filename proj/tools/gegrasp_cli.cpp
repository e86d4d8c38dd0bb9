// Command-line front end: dataset collection, training, benchmarks, single
// episodes and self-checks.

#include "gegrasp/bench.hpp"
#include "gegrasp/dataset.hpp"
#include "gegrasp/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace gegrasp;
using nlohmann::json;

namespace {

struct Common {
    std::uint64_t seed = 0;
    std::string config;
    std::string out = ".";
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "Output directory");
}

std::string slurp(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& body)
{
    std::ofstream os(path, std::ios::binary);
    os << body;
    if (!os) {
        throw Error("cannot write " + path.string());
    }
}

json load_json_object(const std::string& path)
{
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path, e.what());
    }
    if (!j.is_object()) {
        throw ParseError(path, "expected an object");
    }
    return j;
}

// --- collect -------------------------------------------------------------------

struct CollectArgs {
    Common common;
    int n = 4400;
};

int run_collect(const CollectArgs& a, const CLI::App& app)
{
    CollectConfig cfg;
    std::uint64_t seed = a.common.seed;
    int n = a.n;
    if (!a.common.config.empty()) {
        const json j = load_json_object(a.common.config);
        for (const auto& [k, v] : j.items()) {
            if (k == "min_blocks") {
                cfg.min_blocks = v.get<int>();
            } else if (k == "max_blocks") {
                cfg.max_blocks = v.get<int>();
            } else if (k == "reset_every") {
                cfg.reset_every = v.get<int>();
            } else if (k == "samples" && app.count("--n") == 0) {
                n = v.get<int>();
            } else if (k == "seed" && app.count("--seed") == 0) {
                seed = v.get<std::uint64_t>();
            } else if (k != "samples" && k != "seed") {
                throw ParseError(a.common.config, "unknown key '" + k + "'");
            }
        }
    }
    if (n < 1) {
        throw Error("--n must be at least 1");
    }
    fs::create_directories(a.common.out);
    const fs::path out(a.common.out);
    DatasetWriter push((out / "push.gegd").string());
    DatasetWriter grasp((out / "grasp.gegd").string());
    const CollectStats st = collect_dataset(n, seed, cfg, [&](const LabeledSample& s) {
        (s.kind == ActionKind::Push ? push : grasp).write(s);
    });
    push.finish();
    grasp.finish();
    json j = {{"samples_per_kind", n},
              {"seed", seed},
              {"episodes", st.episodes},
              {"pushes", st.pushes},
              {"grasps", st.grasps},
              {"push_values", st.push_values},
              {"grasp_values", st.grasp_values}};
    write_text(out / "collect.json", j.dump(2) + "\n");
    std::cout << "wrote " << push.count() << " push and " << grasp.count() << " grasp records to " << out.string()
              << '\n';
    return 0;
}

// --- train ---------------------------------------------------------------------

struct TrainArgs {
    Common common;
    std::string data;
    TrainConfig cfg;
};

int run_train(TrainArgs a, const CLI::App& app)
{
    a.cfg.seed = a.common.seed;
    if (!a.common.config.empty()) {
        const json j = load_json_object(a.common.config);
        auto take = [&](const char* key, auto& field, const char* flag) {
            if (j.contains(key) && (flag == nullptr || app.count(flag) == 0)) {
                field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
            }
        };
        for (const auto& [k, v] : j.items()) {
            static const std::vector<std::string> known = {"learning_rate", "weight_decay", "momentum", "batch_size",
                                                           "epochs", "holdout_fraction", "hidden", "linear_only",
                                                           "seed"};
            if (std::find(known.begin(), known.end(), k) == known.end()) {
                throw ParseError(a.common.config, "unknown key '" + k + "'");
            }
        }
        take("learning_rate", a.cfg.learning_rate, "--lr");
        take("weight_decay", a.cfg.weight_decay, nullptr);
        take("momentum", a.cfg.momentum, nullptr);
        take("batch_size", a.cfg.batch_size, nullptr);
        take("epochs", a.cfg.epochs, "--epochs");
        take("holdout_fraction", a.cfg.holdout_fraction, nullptr);
        take("hidden", a.cfg.hidden, nullptr);
        take("linear_only", a.cfg.linear_only, nullptr);
        take("seed", a.cfg.seed, "--seed");
    }

    std::vector<Example> examples;
    int kinds[2] = {0, 0};
    read_dataset(a.data, [&](const LabeledSample& s) {
        ++kinds[static_cast<int>(s.kind)];
        examples.push_back(to_example(s));
    });
    if (examples.empty()) {
        throw Error(a.data + ": no records");
    }
    if (kinds[0] > 0 && kinds[1] > 0) {
        throw Error(a.data + ": mixes push and grasp records");
    }
    const std::string kind = kinds[0] > 0 ? "push" : "grasp";

    const TrainResult r = train(examples, a.cfg);
    fs::create_directories(a.common.out);
    const fs::path out(a.common.out);
    save_model((out / (kind + ".geev")).string(), r.model);
    std::ostringstream csv;
    csv << "epoch,train_loss,holdout_loss\n";
    csv.precision(9);
    for (const auto& e : r.history) {
        csv << e.epoch << ',' << e.train_loss << ',' << e.holdout_loss << '\n';
    }
    write_text(out / (kind + "_loss.csv"), csv.str());
    std::cout << kind << " model: " << examples.size() << " records, " << r.history.size() << " epochs";
    if (!r.history.empty()) {
        std::cout << ", holdout L1 " << r.history.back().holdout_loss;
    }
    std::cout << '\n';
    return 0;
}

// --- bench / episode -----------------------------------------------------------

struct PolicyArgs {
    std::string suite;
    int runs = 0;
    std::string profile;
    std::string scorer;
    std::string models;
    std::string generator;
    bool no_push = false;
    int threads = 0;
    std::string challenging;
};

void add_policy_options(CLI::App* app, PolicyArgs& p)
{
    app->add_option("--profile", p.profile, "sim (5 motions) or invisible (15 motions)")
        ->check(CLI::IsMember({"sim", "invisible"}));
    app->add_option("--scorer", p.scorer, "heuristic, trained or random")
        ->check(CLI::IsMember({"heuristic", "trained", "random"}));
    app->add_option("--models", p.models, "Directory holding push.geev and grasp.geev");
    app->add_option("--generator", p.generator, "sct or random")->check(CLI::IsMember({"sct", "random"}));
    app->add_flag("--no-push", p.no_push, "Grasp-only variant");
}

BenchConfig bench_config(const Common& c, const PolicyArgs& p, const CLI::App& app)
{
    BenchConfig cfg;
    if (!c.config.empty()) {
        cfg = bench_config_from_json(slurp(c.config));
    }
    if (app.count("--seed") > 0 || c.config.empty()) {
        cfg.seed = c.seed;
    }
    if (!p.suite.empty()) {
        cfg.suite = suite_from_string(p.suite);
    }
    if (p.runs > 0) {
        cfg.runs_per_case = p.runs;
    }
    if (!p.profile.empty()) {
        cfg.profile = p.profile;
    }
    if (!p.scorer.empty()) {
        cfg.scorer = scorer_from_string(p.scorer);
    }
    if (!p.models.empty()) {
        cfg.model_dir = p.models;
    }
    if (!p.generator.empty()) {
        cfg.random_generators = p.generator == "random";
    }
    if (p.no_push) {
        cfg.pushing_enabled = false;
    }
    if (p.threads > 0) {
        cfg.threads = p.threads;
    }
    if (!p.challenging.empty()) {
        cfg.challenging_dir = p.challenging;
    }
    return cfg;
}

int run_bench(const Common& c, const PolicyArgs& p, const CLI::App& app)
{
    const BenchConfig cfg = bench_config(c, p, app);
    const OwnedScorers scorers = make_scorers(cfg);
    const BenchResult r = run_benchmark(cfg, scorers.view());
    write_results(c.out, cfg, r);
    std::cout << "suite " << to_string(cfg.suite) << ": " << r.metrics.total.successes << '/'
              << r.metrics.total.episodes << " captured";
    if (r.metrics.total.successes > 0) {
        std::cout << ", motion efficiency " << r.metrics.total.motion_efficiency() << " (std "
                  << r.metrics.total.motion_efficiency_std() << ")";
    }
    std::cout << "\nresults in " << c.out << '\n';
    return 0;
}

struct EpisodeArgs {
    Common common;
    PolicyArgs policy;
    std::string scenario;
    int blocks = 15;
    std::uint64_t scene_seed = 0;
};

int run_episode_cmd(const EpisodeArgs& a, const CLI::App& app)
{
    const BenchConfig cfg = bench_config(a.common, a.policy, app);
    Scene scene;
    if (!a.scenario.empty()) {
        scene = load_scenario(a.scenario).scene;
    } else {
        scene = random_case_scene(a.scene_seed, a.blocks, 0);
    }
    const OwnedScorers scorers = make_scorers(cfg);
    const EpisodeResult r = run_episode(scene, scorers.view(), policy_for(cfg), cfg.seed);
    std::ostringstream log;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.scene_hash));
    log << "# scene=" << hash << " blocks=" << scene.blocks.size() << " target=" << scene.target_id
        << " seed=" << cfg.seed << '\n';
    for (const auto& s : r.steps) {
        log << format_step(s) << '\n';
    }
    log << "# status=" << to_string(r.status) << " motions=" << r.motions << '\n';
    std::cout << log.str();
    if (app.count("--out") > 0) {
        fs::create_directories(a.common.out);
        write_text(fs::path(a.common.out) / "episode.log", log.str());
        save_scenario((fs::path(a.common.out) / "final_scene.json").string(), {"final", r.final_scene});
    }
    return 0;
}

// --- validate ------------------------------------------------------------------

struct Check {
    std::string name;
    bool ok = true;
    std::string detail;
};

Check check_rasterizer(std::uint64_t seed, int trials)
{
    Check c{"action masks keep 744/720 pixels when fully in bounds", true, ""};
    Rng rng(seed);
    for (int t = 0; t < trials && c.ok; ++t) {
        const Pixel p{static_cast<int>(70 + uniform_index(rng, 84)), static_cast<int>(70 + uniform_index(rng, 84))};
        const double angle = uniform(rng, -kPi, kPi);
        const auto push = rasterize_push(p, angle);
        const auto grasp = rasterize_grasp(p, static_cast<int>(uniform_index(rng, kGraspOrientations)));
        if (push.entries().size() != static_cast<std::size_t>(kPushMaskPixels) ||
            grasp.entries().size() != static_cast<std::size_t>(kGraspMaskPixels)) {
            c.ok = false;
            c.detail = "at (" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
        }
    }
    return c;
}

Check check_generators(std::uint64_t seed, int scenes)
{
    Check c{"every generated candidate passes its SCT and the caps hold", true, ""};
    const GeneratorConfig g;
    for (int s = 0; s < scenes && c.ok; ++s) {
        const Scene scene = random_case_scene(seed, 10 + 5 * (s % 3), s);
        const Heightmap hm = render_heightmap(scene);
        const BitMask tm = target_mask(scene);
        if (tm.empty()) {
            continue;
        }
        const auto pushes = generate_pushes(hm, tm, g, derive_seed(seed, static_cast<std::uint64_t>(s)));
        const auto grasps = generate_grasps(hm, tm, g, derive_seed(seed, static_cast<std::uint64_t>(s)));
        int per_q[2][4] = {};
        for (const auto& p : pushes) {
            c.ok &= sct_push(hm, tm, p.start, p.angle, g);
            ++per_q[0][p.quadrant];
        }
        for (const auto& q : grasps) {
            c.ok &= sct_grasp(hm, q.center, q.orientation_idx, g);
            ++per_q[1][q.quadrant];
        }
        for (const auto& row : per_q) {
            for (int n : row) {
                c.ok &= n <= g.per_quadrant_cap;
            }
        }
        c.ok &= pushes.size() <= static_cast<std::size_t>(g.total_cap) &&
                grasps.size() <= static_cast<std::size_t>(g.total_cap);
        if (!c.ok) {
            c.detail = "scene " + std::to_string(s);
        }
    }
    return c;
}

Check check_selection(std::uint64_t seed, int trials)
{
    Check c{"greedy selection matches a brute-force scan", true, ""};
    Rng rng(seed);
    const PolicyConfig cfg;
    for (int t = 0; t < trials && c.ok; ++t) {
        std::vector<ScoredAction> pushes(uniform_index(rng, 6));
        std::vector<ScoredAction> grasps(uniform_index(rng, 6));
        if (pushes.empty() && grasps.empty()) {
            continue;
        }
        for (auto* list : {&pushes, &grasps}) {
            for (auto& a : *list) {
                a.kind = list == &pushes ? ActionKind::Push : ActionKind::Grasp;
                a.anchor = {static_cast<int>(uniform_index(rng, 224)), static_cast<int>(uniform_index(rng, 224))};
                a.score = std::round(uniform(rng, 0.0, 2.0) * 4.0) / 4.0;
            }
        }
        const ScoredAction* best_grasp = nullptr;
        for (const auto& g : grasps) {
            if (best_grasp == nullptr || ranks_before(g, *best_grasp)) {
                best_grasp = &g;
            }
        }
        const ScoredAction* expected = nullptr;
        if (best_grasp != nullptr && best_grasp->score > cfg.grasp_threshold) {
            expected = best_grasp;
        } else {
            for (const auto* list : {&pushes, &grasps}) {
                for (const auto& a : *list) {
                    if (expected == nullptr || ranks_before(a, *expected)) {
                        expected = &a;
                    }
                }
            }
        }
        const ScoredAction got = select_action(pushes, grasps, cfg);
        c.ok = got.kind == expected->kind && got.anchor == expected->anchor && got.score == expected->score;
        if (!c.ok) {
            c.detail = "trial " + std::to_string(t);
        }
    }
    return c;
}

Check check_challenging(const std::string& dir)
{
    Check c{"challenging scenes admit no initial target grasp", true, ""};
    try {
        const auto suite = load_challenging_suite(dir);
        c.detail = std::to_string(suite.size()) + " scenes";
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail = e.what();
    }
    return c;
}

struct ValidateArgs {
    Common common;
    int scenes = 100;
    std::string challenging = "data/challenging";
};

int run_validate(const ValidateArgs& a)
{
    const std::vector<Check> checks = {
        check_rasterizer(derive_seed(a.common.seed, 1), 1000),
        check_generators(derive_seed(a.common.seed, 2), a.scenes),
        check_selection(derive_seed(a.common.seed, 3), 10000),
        check_challenging(a.challenging),
    };
    bool all = true;
    for (const auto& c : checks) {
        std::cout << (c.ok ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) {
            std::cout << " (" << c.detail << ")";
        }
        std::cout << '\n';
        all &= c.ok;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generator-evaluator grasping in simulated tabletop clutter"};
    app.require_subcommand(1);

    CollectArgs collect;
    auto* collect_cmd = app.add_subcommand("collect", "Collect labeled push and grasp datasets");
    add_common(collect_cmd, collect.common);
    collect_cmd->add_option("--n", collect.n, "Records per action kind");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Fit a scorer to one dataset file");
    add_common(train_cmd, train_args.common);
    train_cmd->add_option("--data", train_args.data, "GEGD dataset")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--epochs", train_args.cfg.epochs, "Training epochs");
    train_cmd->add_option("--lr", train_args.cfg.learning_rate, "Learning rate");

    Common bench_common;
    PolicyArgs bench_policy;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
    add_common(bench_cmd, bench_common);
    add_policy_options(bench_cmd, bench_policy);
    bench_cmd->add_option("--suite", bench_policy.suite, "random_easy, random_normal, random_hard, random or challenging")
        ->check(CLI::IsMember({"random_easy", "random_normal", "random_hard", "random", "challenging"}));
    bench_cmd->add_option("--runs", bench_policy.runs, "Runs per case")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--threads", bench_policy.threads, "Worker threads")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--challenging-dir", bench_policy.challenging, "Directory of challenging scenes");

    EpisodeArgs episode;
    auto* episode_cmd = app.add_subcommand("episode", "Run one seeded episode and print its step log");
    add_common(episode_cmd, episode.common);
    add_policy_options(episode_cmd, episode.policy);
    episode_cmd->add_option("--scenario", episode.scenario, "Scenario JSON")->check(CLI::ExistingFile);
    episode_cmd->add_option("--blocks", episode.blocks, "Blocks in a random scene")->check(CLI::Range(1, 40));
    episode_cmd->add_option("--scene-seed", episode.scene_seed, "Seed of the random scene");

    ValidateArgs validate;
    auto* validate_cmd = app.add_subcommand("validate", "Run invariant and oracle self-checks");
    add_common(validate_cmd, validate.common);
    validate_cmd->add_option("--scenes", validate.scenes, "Random scenes for the generator check")
        ->check(CLI::PositiveNumber);
    validate_cmd->add_option("--challenging-dir", validate.challenging, "Directory of challenging scenes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*collect_cmd) {
            return run_collect(collect, *collect_cmd);
        }
        if (*train_cmd) {
            return run_train(train_args, *train_cmd);
        }
        if (*bench_cmd) {
            return run_bench(bench_common, bench_policy, *bench_cmd);
        }
        if (*episode_cmd) {
            return run_episode_cmd(episode, *episode_cmd);
        }
        return run_validate(validate);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
