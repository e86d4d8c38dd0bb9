#include "gegrasp/bench.hpp"

#include "gegrasp/kernels.hpp"
#include "gegrasp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gegrasp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kPolicyStream = 0x9011C7;
constexpr std::uint64_t kRespawnStream = 0x5FA11;

template <typename E>
E lookup(const std::vector<std::pair<const char*, E>>& table, const std::string& s, const char* what)
{
    for (const auto& [name, value] : table) {
        if (s == name) {
            return value;
        }
    }
    throw ParseError(what, "unknown value '" + s + "'");
}

const std::vector<std::pair<const char*, Suite>> kSuites = {
    {"random_easy", Suite::RandomEasy},     {"random_normal", Suite::RandomNormal},
    {"random_hard", Suite::RandomHard},     {"random", Suite::Random},
    {"challenging", Suite::Challenging},
};

const std::vector<std::pair<const char*, ScorerKind>> kScorers = {
    {"heuristic", ScorerKind::Heuristic}, {"trained", ScorerKind::Trained}, {"random", ScorerKind::Random}};

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

EpisodeStatus status_from_string(const std::string& s)
{
    for (EpisodeStatus st : {EpisodeStatus::Success, EpisodeStatus::ExceededBudget, EpisodeStatus::TargetLost}) {
        if (to_string(st) == s) {
            return st;
        }
    }
    throw ParseError("status", "unknown value '" + s + "'");
}

void add_row(CaseMetrics& m, const EpisodeRow& r)
{
    ++m.episodes;
    if (r.status == EpisodeStatus::Success) {
        ++m.successes;
        m.success_motions += r.motions;
        m.success_motions_sq += static_cast<long long>(r.motions) * r.motions;
    }
}

json case_json(const CaseMetrics& m)
{
    json j;
    j["name"] = m.name;
    j["episodes"] = m.episodes;
    j["successes"] = m.successes;
    j["success_rate"] = m.success_rate();
    if (m.successes > 0) {
        j["motion_efficiency"] = m.motion_efficiency();
        j["motion_efficiency_std"] = m.motion_efficiency_std();
    } else {
        j["motion_efficiency"] = nullptr;
        j["motion_efficiency_std"] = nullptr;
    }
    return j;
}

} // namespace

std::string to_string(Suite s)
{
    for (const auto& [name, value] : kSuites) {
        if (value == s) {
            return name;
        }
    }
    return "?";
}

Suite suite_from_string(const std::string& s) { return lookup(kSuites, s, "suite"); }

std::string to_string(ScorerKind k)
{
    for (const auto& [name, value] : kScorers) {
        if (value == k) {
            return name;
        }
    }
    return "?";
}

ScorerKind scorer_from_string(const std::string& s) { return lookup(kScorers, s, "scorer"); }

BenchConfig bench_config_from_json(const std::string& text, BenchConfig base)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("config", e.what());
    }
    if (!j.is_object()) {
        throw ParseError("config", "expected an object");
    }
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "suite") {
                base.suite = suite_from_string(v.get<std::string>());
            } else if (key == "runs_per_case") {
                base.runs_per_case = v.get<int>();
            } else if (key == "profile") {
                base.profile = v.get<std::string>();
            } else if (key == "scorer") {
                base.scorer = scorer_from_string(v.get<std::string>());
            } else if (key == "model_dir") {
                base.model_dir = v.get<std::string>();
            } else if (key == "generator") {
                const auto g = v.get<std::string>();
                if (g != "sct" && g != "random") {
                    throw ParseError("field generator", "expected sct or random");
                }
                base.random_generators = g == "random";
            } else if (key == "pushing") {
                base.pushing_enabled = v.get<bool>();
            } else if (key == "seed") {
                base.seed = v.get<std::uint64_t>();
            } else if (key == "challenging_dir") {
                base.challenging_dir = v.get<std::string>();
            } else if (key == "threads") {
                base.threads = v.get<int>();
            } else {
                throw ParseError("field " + key, "unknown key");
            }
        } catch (const json::exception& e) {
            throw ParseError("field " + key, e.what());
        }
    }
    if (base.runs_per_case < 1) {
        throw ParseError("field runs_per_case", "must be at least 1");
    }
    if (base.profile != "sim" && base.profile != "invisible") {
        throw ParseError("field profile", "expected sim or invisible");
    }
    return base;
}

PolicyConfig policy_for(const BenchConfig& cfg)
{
    PolicyConfig p;
    if (cfg.profile == "sim") {
        p = sim_profile();
    } else if (cfg.profile == "invisible") {
        p = invisible_target_profile();
    } else {
        throw Error("unknown profile '" + cfg.profile + "'");
    }
    p.pushing_enabled = cfg.pushing_enabled;
    p.random_generators = cfg.random_generators;
    return p;
}

OwnedScorers make_scorers(const BenchConfig& cfg)
{
    OwnedScorers s;
    switch (cfg.scorer) {
    case ScorerKind::Heuristic:
        s.push = std::make_unique<HeuristicScorer>();
        s.grasp = std::make_unique<HeuristicScorer>();
        break;
    case ScorerKind::Random:
        s.push = std::make_unique<RandomScorer>();
        s.grasp = std::make_unique<RandomScorer>();
        break;
    case ScorerKind::Trained: {
        const fs::path dir = cfg.model_dir.empty() ? fs::path(".") : fs::path(cfg.model_dir);
        s.push = std::make_unique<TrainableScorer>(load_model((dir / "push.geev").string()));
        s.grasp = std::make_unique<TrainableScorer>(load_model((dir / "grasp.geev").string()));
        break;
    }
    }
    return s;
}

bool has_initial_target_grasp(const Scene& scene, const GeneratorConfig& cfg)
{
    const Heightmap hm = render_heightmap(scene);
    const BitMask tm = target_mask(scene);
    if (tm.empty()) {
        return false;
    }
    const auto margin = static_cast<Tenths>(std::lround(cfg.grasp_height_margin_mm * 10.0));
    for (const auto& hit : kernels::omp::grasp_sct_scan(hm, roi_of_target(tm, cfg.roi_half_extent), margin)) {
        if (tm.test(hit.center)) {
            return true;
        }
    }
    GeneratorConfig exempt = cfg;
    exempt.exempt_on_target = true;
    const auto grasps = generate_grasps(hm, tm, exempt, 0);
    return std::any_of(grasps.begin(), grasps.end(), [](const GraspCandidate& g) { return g.on_target; });
}

std::vector<Scenario> load_challenging_suite(const std::string& dir)
{
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<Scenario> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        Scenario sc = load_scenario(f.string());
        if (has_initial_target_grasp(sc.scene)) {
            throw Error(f.string() + ": target is directly graspable at the start");
        }
        out.push_back(std::move(sc));
    }
    return out;
}

std::vector<BenchCase> suite_cases(const BenchConfig& cfg)
{
    std::vector<BenchCase> cases;
    auto random_case = [&](const char* name, int blocks) { cases.push_back({name, blocks, std::nullopt}); };
    switch (cfg.suite) {
    case Suite::RandomEasy:
        random_case("random_easy", 10);
        break;
    case Suite::RandomNormal:
        random_case("random_normal", 15);
        break;
    case Suite::RandomHard:
        random_case("random_hard", 20);
        break;
    case Suite::Random:
        random_case("random_easy", 10);
        random_case("random_normal", 15);
        random_case("random_hard", 20);
        break;
    case Suite::Challenging:
        for (auto& sc : load_challenging_suite(cfg.challenging_dir)) {
            cases.push_back({sc.name, 0, std::move(sc.scene)});
        }
        break;
    }
    return cases;
}

Scene random_case_scene(std::uint64_t seed, int blocks, int run)
{
    std::uint64_t s = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(blocks)), static_cast<std::uint64_t>(run));
    for (int attempt = 0;; ++attempt) {
        try {
            return spawn_random_clutter(blocks, s);
        } catch (const SpawnFailure&) {
            if (attempt >= 16) {
                throw;
            }
            s = derive_seed(s, kRespawnStream);
        }
    }
}

double CaseMetrics::success_rate() const
{
    return episodes == 0 ? 0.0 : static_cast<double>(successes) / episodes;
}

double CaseMetrics::motion_efficiency() const
{
    return successes == 0 ? 0.0 : static_cast<double>(success_motions) / successes;
}

double CaseMetrics::motion_efficiency_std() const
{
    if (successes == 0) {
        return 0.0;
    }
    // n^2 var = n * sum(x^2) - sum(x)^2, exact in integers
    const long long n = successes;
    const long long num = n * success_motions_sq - success_motions * success_motions;
    return std::sqrt(static_cast<double>(num)) / static_cast<double>(n);
}

Metrics compute_metrics(const std::vector<EpisodeRow>& rows)
{
    Metrics m;
    m.total.name = "total";
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        auto [it, fresh] = index.try_emplace(r.case_name, m.cases.size());
        if (fresh) {
            m.cases.push_back({});
            m.cases.back().name = r.case_name;
        }
        add_row(m.cases[it->second], r);
        add_row(m.total, r);
    }
    return m;
}

BenchResult run_benchmark(const BenchConfig& cfg, const Scorers& scorers)
{
    if (cfg.runs_per_case < 1) {
        throw Error("runs_per_case must be at least 1");
    }
    const PolicyConfig policy = policy_for(cfg);
    const auto cases = suite_cases(cfg);
    const int runs = cfg.runs_per_case;
    const int total = static_cast<int>(cases.size()) * runs;

    BenchResult result;
    result.rows.resize(static_cast<std::size_t>(total));
    result.steps.resize(static_cast<std::size_t>(total));

    std::vector<std::string> errors(static_cast<std::size_t>(total));
#ifdef _OPENMP
    const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
    for (int k = 0; k < total; ++k) {
        const auto& c = cases[static_cast<std::size_t>(k / runs)];
        const int run = k % runs;
        const auto slot = static_cast<std::size_t>(k);
        try {
            Scene scene;
            std::uint64_t seed = 0;
            if (c.scene) {
                scene = *c.scene;
                seed = derive_seed(derive_seed(cfg.seed, scene.rng_seed), static_cast<std::uint64_t>(run));
            } else {
                scene = random_case_scene(cfg.seed, c.blocks, run);
                seed = derive_seed(scene.rng_seed, kPolicyStream);
            }
            EpisodeResult ep = run_episode(scene, scorers, policy, seed);
            result.rows[slot] = {c.name, run, seed, ep.scene_hash, ep.status, ep.motions};
            result.steps[slot] = std::move(ep.steps);
        } catch (const std::exception& e) {
            errors[slot] = c.name + " run " + std::to_string(run) + ": " + e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) {
            throw Error(e);
        }
    }
    result.metrics = compute_metrics(result.rows);
    return result;
}

std::string metrics_json(const BenchConfig& cfg, const Metrics& m)
{
    json j;
    j["config"] = {
        {"suite", to_string(cfg.suite)},
        {"runs_per_case", cfg.runs_per_case},
        {"profile", cfg.profile},
        {"scorer", to_string(cfg.scorer)},
        {"generator", cfg.random_generators ? "random" : "sct"},
        {"pushing", cfg.pushing_enabled},
        {"seed", cfg.seed},
    };
    j["dispersion"] = "population standard deviation of motions over successful episodes";
    j["total"] = case_json(m.total);
    j["cases"] = json::array();
    for (const auto& c : m.cases) {
        j["cases"].push_back(case_json(c));
    }
    return j.dump(2) + "\n";
}

std::string episodes_csv(const std::vector<EpisodeRow>& rows)
{
    std::ostringstream os;
    os << "case,run,seed,scene_hash,status,motions\n";
    for (const auto& r : rows) {
        os << r.case_name << ',' << r.run << ',' << r.seed << ',' << hex64(r.scene_hash) << ',' << to_string(r.status)
           << ',' << r.motions << '\n';
    }
    return os.str();
}

std::vector<EpisodeRow> parse_episodes_csv(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "case,run,seed,scene_hash,status,motions") {
        throw ParseError("episodes csv: line 1", "unexpected header");
    }
    std::vector<EpisodeRow> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const std::string where = "episodes csv: line " + std::to_string(lineno);
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            f.push_back(cell);
        }
        if (f.size() != 6) {
            throw ParseError(where, "expected 6 fields");
        }
        try {
            EpisodeRow r;
            r.case_name = f[0];
            r.run = std::stoi(f[1]);
            r.seed = std::stoull(f[2]);
            r.scene_hash = std::stoull(f[3], nullptr, 16);
            r.status = status_from_string(f[4]);
            r.motions = std::stoi(f[5]);
            rows.push_back(std::move(r));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(where, e.what());
        }
    }
    return rows;
}

std::string steps_log(const BenchResult& r)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        os << "# case=" << row.case_name << " run=" << row.run << " seed=" << row.seed
           << " scene=" << hex64(row.scene_hash) << " status=" << to_string(row.status) << " motions=" << row.motions
           << '\n';
        for (const auto& s : r.steps[i]) {
            os << format_step(s) << '\n';
        }
    }
    return os.str();
}

void write_results(const std::string& dir, const BenchConfig& cfg, const BenchResult& r)
{
    fs::create_directories(dir);
    auto put = [&](const char* name, const std::string& body) {
        const auto path = fs::path(dir) / name;
        std::ofstream os(path, std::ios::binary);
        os << body;
        if (!os) {
            throw Error("cannot write " + path.string());
        }
    };
    put("metrics.json", metrics_json(cfg, r.metrics));
    put("episodes.csv", episodes_csv(r.rows));
    put("steps.log", steps_log(r));
}

} // namespace gegrasp
