#ifndef SOCIALSIM_HARNESS_HPP
#define SOCIALSIM_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "digest.hpp"
#include "engine.hpp"
#include "event_log.hpp"
#include "policy.hpp"
#include "population.hpp"
#include "rng.hpp"

namespace socialsim {

struct CellKey {
    LoadLevel load = LoadLevel::Lowest;
    NormRegime norm = NormRegime::NoNorm;
    std::size_t replication = 0;

    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

inline std::string cell_file_name(const CellKey& k) {
    return "cell_" + std::string(to_string(k.load)) + "_" + std::string(to_string(k.norm)) + "_r" +
           std::to_string(k.replication) + ".jsonl";
}

inline std::size_t index_of(LoadLevel l) { return static_cast<std::size_t>(l); }
inline std::size_t index_of(NormRegime n) { return static_cast<std::size_t>(n); }

// Seed from (base seed, load, norm, replication); distinct cells get distinct
// streams and the same cell always gets the same seed.
inline std::uint64_t cell_seed(std::uint64_t base_seed, const CellKey& k) {
    return hash_values({base_seed, index_of(k.load), index_of(k.norm), k.replication});
}

using CellCondition = std::pair<LoadLevel, NormRegime>;

struct ExperimentPlan {
    std::vector<LoadLevel> loads{kAllLoads.begin(), kAllLoads.end()};
    std::vector<NormRegime> norms{kAllNorms.begin(), kAllNorms.end()};
    std::size_t replications = 1;
    std::uint64_t base_seed = 1;
    RunConfig base;  // condition, seed and run id are filled per cell
    PolicySpec policy = default_parametric_spec();
    const Population* population = nullptr;
    const SeedCorpus* corpus = nullptr;
    std::size_t workers = 1;
    std::vector<CellCondition> only;  // empty: every (load, norm) pair

    std::vector<CellKey> cells() const {
        std::vector<CellKey> out;
        for (auto l : loads)
            for (auto n : norms)
                if (only.empty() || std::find(only.begin(), only.end(), CellCondition{l, n}) != only.end())
                    for (std::size_t r = 0; r < replications; ++r) out.push_back({l, n, r});
        return out;
    }

    // Run ids follow the full 4 x 3 x replications layout, so filtering cells
    // does not renumber the ones that remain.
    RunId run_id(const CellKey& k) const {
        return RunId{(index_of(k.load) * kAllNorms.size() + index_of(k.norm)) * replications + k.replication};
    }

    RunConfig cell_config(const CellKey& k) const {
        RunConfig c = base;
        c.condition = Condition{LoadCondition{k.load}, k.norm};
        c.seed = cell_seed(base_seed, k);
        c.run = run_id(k);
        return c;
    }
};

inline std::string policy_kind(const PolicySpec& p) {
    if (std::holds_alternative<ScriptedSpec>(p)) return "scripted";
    if (std::holds_alternative<ParametricLogitSpec>(p)) return "parametric";
    return "llm";
}

inline nlohmann::ordered_json policy_to_json(const PolicySpec& p) {
    nlohmann::ordered_json j;
    j["kind"] = policy_kind(p);
    if (const auto* s = std::get_if<ParametricLogitSpec>(&p)) {
        j["threshold"] = std::vector<double>(s->threshold.data(), s->threshold.data() + s->threshold.size());
        j["allocation"] = std::vector<double>(s->allocation.data(), s->allocation.data() + s->allocation.size());
        j["commentary"] = s->commentary;
    } else if (const auto* s = std::get_if<ScriptedSpec>(&p)) {
        auto steps = nlohmann::ordered_json::array();
        for (const auto& st : s->steps)
            steps.push_back({{"action", to_string(st.action)}, {"position", st.feed_position}, {"comment", st.commentary}});
        j["steps"] = std::move(steps);
    } else {
        const auto& l = std::get<LlmSpec>(p);
        j["base_url"] = l.base_url;
        j["model"] = l.model;
        j["temperature"] = l.temperature;
        j["timeout_seconds"] = l.timeout_seconds;
        j["max_retries"] = l.max_retries;
    }
    return j;
}

inline nlohmann::ordered_json config_to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["n_agents"] = c.n_agents;
    j["timesteps"] = c.timesteps;
    j["activation_p"] = c.activation_p;
    j["recency_decay"] = c.recency_decay;
    j["weights"] = {c.weights.recency, c.weights.relevance};
    j["history_window"] = c.history_window;
    j["expected_influencers"] = c.expected_influencers;
    j["expected_seed_posts"] = c.expected_seed_posts;
    return j;
}

struct CellOutcome {
    CellKey key;
    RunId run;
    std::uint64_t seed = 0;
    std::string file;
    std::string digest;
    bool ok = false;
    std::string error;
    std::size_t activations = 0;
    std::size_t exposure_rows = 0;
    std::size_t warnings = 0;
};

struct ExperimentResult {
    std::vector<CellOutcome> cells;
    nlohmann::ordered_json manifest;
    std::string manifest_digest;

    bool ok() const {
        return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.ok; });
    }
};

using TransportFactory = std::function<std::unique_ptr<Transport>()>;

// Runs every cell (in parallel up to plan.workers), writes one JSONL log per
// cell and manifest.json into out_dir. Failed cells are recorded, not fatal.
inline ExperimentResult run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out_dir,
                                       const TransportFactory& transports = {}) {
    if (!plan.population || !plan.corpus) throw ConfigError("experiment plan needs a population and a corpus");
    if (plan.replications == 0) throw ConfigError("replications must be at least 1");
    plan.base.validate();
    std::filesystem::create_directories(out_dir);

    const auto keys = plan.cells();
    std::vector<CellOutcome> outcomes(keys.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < keys.size(); i = next++) {
            auto& out = outcomes[i];
            out.key = keys[i];
            const auto cfg = plan.cell_config(keys[i]);
            out.run = cfg.run;
            out.seed = cfg.seed;
            out.file = cell_file_name(keys[i]);
            try {
                std::unique_ptr<Transport> transport;
                if (std::holds_alternative<LlmSpec>(plan.policy)) {
                    if (!transports) throw ConfigError("LLM policy needs a transport");
                    transport = transports();
                }
                auto res = run(cfg, plan.policy, *plan.population, *plan.corpus, transport.get());
                const auto text = to_jsonl(res.log);
                write_text_file((out_dir / out.file).string(), text);
                out.digest = sha256_hex(text);
                out.activations = res.activations.size();
                out.exposure_rows = res.log.exposures().size();
                out.warnings = res.warnings.size();
                out.ok = true;
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
        }
    };
    const auto n_workers = std::max<std::size_t>(1, std::min(plan.workers, keys.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    ExperimentResult res;
    res.cells = outcomes;
    auto& m = res.manifest;
    m["plan"] = {{"loads", nlohmann::ordered_json::array()},
                 {"norms", nlohmann::ordered_json::array()},
                 {"replications", plan.replications},
                 {"base_seed", plan.base_seed}};
    for (auto l : plan.loads) m["plan"]["loads"].push_back(to_string(l));
    for (auto n : plan.norms) m["plan"]["norms"].push_back(to_string(n));
    if (!plan.only.empty()) {
        auto only = nlohmann::ordered_json::array();
        for (const auto& [l, n] : plan.only) only.push_back(std::string(to_string(l)) + "," + std::string(to_string(n)));
        m["plan"]["only"] = std::move(only);
    }
    m["config"] = config_to_json(plan.base);
    m["policy"] = policy_to_json(plan.policy);
    m["population_sha256"] = sha256_hex(population_to_jsonl(*plan.population));
    m["corpus_sha256"] = sha256_hex(corpus_to_jsonl(*plan.corpus));
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : outcomes) {
        nlohmann::ordered_json cj;
        cj["load"] = to_string(c.key.load);
        cj["norm"] = to_string(c.key.norm);
        cj["replication"] = c.key.replication;
        cj["run"] = c.run.value;
        cj["seed"] = c.seed;
        cj["file"] = c.file;
        cj["status"] = c.ok ? "ok" : "failed";
        if (c.ok) {
            cj["sha256"] = c.digest;
            cj["activations"] = c.activations;
            cj["exposure_rows"] = c.exposure_rows;
            cj["warnings"] = c.warnings;
        } else {
            cj["error"] = c.error;
        }
        cells.push_back(std::move(cj));
    }
    m["cells"] = std::move(cells);
    const auto text = m.dump(2) + "\n";
    write_text_file((out_dir / "manifest.json").string(), text);
    res.manifest_digest = sha256_hex(text);
    return res;
}

// ---------------------------------------------------------------------------
// Reading an experiment back

struct CellLog {
    CellKey key;
    EventLog log;
};

// Loads every successful cell listed in the manifest, verifying digests.
inline std::vector<CellLog> load_experiment(const std::filesystem::path& dir) {
    const auto manifest_text = read_text_file((dir / "manifest.json").string());
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(manifest_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError((dir / "manifest.json").string() + ": " + e.what());
    }
    std::vector<CellLog> out;
    for (const auto& c : m.at("cells")) {
        if (c.at("status").get<std::string>() != "ok") continue;
        const auto file = (dir / c.at("file").get<std::string>()).string();
        const auto text = read_text_file(file);
        if (sha256_hex(text) != c.at("sha256").get<std::string>())
            throw ParseError(file + ": digest does not match manifest");
        const auto load = parse_load(c.at("load").get<std::string>());
        const auto norm = parse_norm(c.at("norm").get<std::string>());
        if (!load || !norm) throw ParseError(file + ": unknown cell condition in manifest");
        out.push_back({CellKey{*load, *norm, c.at("replication").get<std::size_t>()}, parse_event_log(text, file)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Descriptive audits (pure functions of the logs)

struct LoadAuditRow {
    std::size_t target = 0;
    std::size_t activations = 0;
    double mean = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
    bool empty = true;  // no activation with a non-empty feed
};

// Realized algorithmic posts per activation, grouped by cell condition.
// Activations are recovered from exposure rows keyed by (run, t, agent).
template <class LogRange>
std::map<CellCondition, LoadAuditRow> realized_load_audit(const LogRange& logs,
                                                          const std::vector<CellCondition>& expected = {}) {
    std::map<CellCondition, std::map<std::tuple<std::uint64_t, Timestep, std::uint64_t>, std::size_t>> per_activation;
    for (const EventLog& log : logs)
        for (const auto& e : log.entries())
            if (const auto* r = std::get_if<ExposureRecord>(&e)) {
                auto& m = per_activation[{r->condition.load.level, r->condition.norm}];
                auto& count = m[{r->run.value, r->timestep, r->agent.value}];
                if (r->source == FeedSource::Algorithmic) ++count;
            }
    std::map<CellCondition, LoadAuditRow> out;
    for (const auto& c : expected) out[c] = LoadAuditRow{LoadCondition{c.first}.algorithmic_count()};
    for (const auto& [cond, acts] : per_activation) {
        auto& row = out[cond];
        row.target = LoadCondition{cond.first}.algorithmic_count();
        row.activations = acts.size();
        row.empty = acts.empty();
        row.min = std::numeric_limits<std::size_t>::max();
        double sum = 0.0;
        for (const auto& [k, n] : acts) {
            sum += static_cast<double>(n);
            row.min = std::min(row.min, n);
            row.max = std::max(row.max, n);
        }
        row.mean = acts.empty() ? 0.0 : sum / static_cast<double>(acts.size());
        if (acts.empty()) row.min = 0;
    }
    return out;
}

struct ShareRow {
    std::size_t rows = 0;
    std::array<std::size_t, 4> counts{};  // read, like, repost, quote
    std::array<double, 4> shares{};
};

template <class LogRange>
std::map<CellCondition, ShareRow> descriptive_shares(const LogRange& logs) {
    std::map<CellCondition, ShareRow> out;
    for (const EventLog& log : logs)
        for (const auto& e : log.entries())
            if (const auto* r = std::get_if<ExposureRecord>(&e)) {
                auto& row = out[{r->condition.load.level, r->condition.norm}];
                ++row.rows;
                ++row.counts[static_cast<std::size_t>(r->action)];
            }
    for (auto& [c, row] : out)
        for (std::size_t a = 0; a < 4; ++a)
            row.shares[a] = row.rows ? static_cast<double>(row.counts[a]) / static_cast<double>(row.rows) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Config file (JSON). Every key is optional; unknown keys are rejected.
//
// {"n_agents", "timesteps", "activation_p", "seed", "replications", "workers",
//  "recency_decay", "weights": [rec, rel], "history_window",
//  "population": {"path": str} | {"seed": int},
//  "corpus": {"path": str} | {"seed": int},
//  "policy": {"kind": "mock" | "parametric" | "scripted" | "llm", ...}}

struct ExperimentConfig {
    ExperimentPlan plan;
    std::optional<std::string> population_path;
    std::uint64_t population_seed = 1;
    std::optional<std::string> corpus_path;
    std::uint64_t corpus_seed = 1;
};

inline PolicySpec policy_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "mock") return default_parametric_spec();
    if (kind == "parametric") {
        auto s = default_parametric_spec();
        if (j.contains("threshold")) {
            const auto v = j.at("threshold").get<std::vector<double>>();
            s.threshold = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        if (j.contains("allocation")) {
            const auto v = j.at("allocation").get<std::vector<double>>();
            s.allocation = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        if (j.contains("commentary")) s.commentary = j.at("commentary").get<std::string>();
        s.validate();
        return s;
    }
    if (kind == "scripted") {
        ScriptedSpec s;
        for (const auto& st : j.at("steps")) {
            ScriptStep step;
            const auto a = parse_action(st.at("action").get<std::string>());
            if (!a) throw ConfigError("scripted step has unknown action");
            step.action = *a;
            step.feed_position = st.value("position", std::size_t{0});
            step.commentary = st.value("comment", std::string{});
            s.steps.push_back(std::move(step));
        }
        return s;
    }
    if (kind == "llm") {
        LlmSpec s;
        s.base_url = j.value("base_url", s.base_url);
        s.model = j.value("model", s.model);
        s.temperature = j.value("temperature", s.temperature);
        s.timeout_seconds = j.value("timeout_seconds", s.timeout_seconds);
        s.max_retries = j.value("max_retries", s.max_retries);
        return s;
    }
    throw ConfigError("unknown policy kind '" + kind + "'");
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known{"n_agents",     "timesteps",     "activation_p", "seed",
                                                "replications", "workers",       "recency_decay", "weights",
                                                "history_window", "population",  "corpus",        "policy"};
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
    try {
        ExperimentConfig c;
        auto& b = c.plan.base;
        b.n_agents = j.value("n_agents", b.n_agents);
        b.timesteps = j.value("timesteps", b.timesteps);
        b.activation_p = j.value("activation_p", b.activation_p);
        b.recency_decay = j.value("recency_decay", b.recency_decay);
        b.history_window = j.value("history_window", b.history_window);
        if (j.contains("weights")) {
            const auto w = j.at("weights").get<std::vector<double>>();
            if (w.size() != 2) throw ConfigError("weights must be [recency, relevance]");
            b.weights = {w[0], w[1]};
        }
        c.plan.base_seed = j.value("seed", c.plan.base_seed);
        c.plan.replications = j.value("replications", c.plan.replications);
        c.plan.workers = j.value("workers", c.plan.workers);
        if (j.contains("population")) {
            const auto& p = j.at("population");
            if (p.contains("path")) c.population_path = p.at("path").get<std::string>();
            c.population_seed = p.value("seed", c.population_seed);
        }
        if (j.contains("corpus")) {
            const auto& p = j.at("corpus");
            if (p.contains("path")) c.corpus_path = p.at("path").get<std::string>();
            c.corpus_seed = p.value("seed", c.corpus_seed);
        }
        if (j.contains("policy")) c.plan.policy = policy_from_json(j.at("policy"));
        b.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

}  // namespace socialsim

#endif  // SOCIALSIM_HARNESS_HPP
