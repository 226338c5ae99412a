#ifndef SOCIALSIM_CLI_HPP
#define SOCIALSIM_CLI_HPP

// Command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 usage or configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "harness.hpp"
#include "http_transport.hpp"
#include "io.hpp"
#include "population.hpp"
#include "report.hpp"
#include "stats/design.hpp"
#include "stats/logistic.hpp"
#include "stats/multinomial.hpp"
#include "stats/predict.hpp"
#include "transport.hpp"

namespace socialsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Raised for runtime failures that should exit 1 with a message.
struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "load=high,norm=repost" in either order.
inline CellCondition parse_cell(const std::string& s) {
    std::optional<LoadLevel> load;
    std::optional<NormRegime> norm;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = std::min(s.find(',', start), s.size());
        const auto part = s.substr(start, end - start);
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw ConfigError("--cell expects load=<level>,norm=<regime>, got '" + s + "'");
        const auto key = part.substr(0, eq), value = part.substr(eq + 1);
        if (key == "load") {
            load = parse_load(value);
            if (!load) throw ConfigError("unknown load level '" + value + "'");
        } else if (key == "norm") {
            norm = parse_norm(value);
            if (!norm) throw ConfigError("unknown norm regime '" + value + "'");
        } else {
            throw ConfigError("unknown --cell key '" + key + "'");
        }
        start = end + 1;
    }
    if (!load || !norm) throw ConfigError("--cell needs both load and norm");
    return {*load, *norm};
}

inline nlohmann::json read_json_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw ConfigError(path + ": file not found");
    const auto text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out;
    std::vector<std::string> cells;
    std::string policy;
    std::string transport = "mock";
    std::string fixtures;
    std::string record;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> replications;
};

inline int cmd_simulate(const SimulateArgs& a) {
    ExperimentConfig cfg;
    Population population;
    SeedCorpus corpus;
    try {
        cfg = experiment_config_from_json(read_json_file(a.config));
        auto& plan = cfg.plan;
        if (a.seed) plan.base_seed = *a.seed;
        if (a.workers) plan.workers = *a.workers;
        if (a.replications) plan.replications = *a.replications;
        if (plan.replications == 0) throw ConfigError("replications must be at least 1");
        for (const auto& c : a.cells) plan.only.push_back(parse_cell(c));

        if (a.policy == "mock") {
            plan.policy = default_parametric_spec();
        } else if (a.policy == "scripted") {
            if (!std::holds_alternative<ScriptedSpec>(plan.policy))
                throw ConfigError("--policy scripted needs a scripted policy block in the config");
        } else if (a.policy == "parametric") {
            if (!std::holds_alternative<ParametricLogitSpec>(plan.policy)) plan.policy = default_parametric_spec();
        } else if (a.policy == "llm") {
            if (!std::holds_alternative<LlmSpec>(plan.policy)) plan.policy = LlmSpec{};
        }
        if (a.transport == "fixtures" && a.fixtures.empty()) throw ConfigError("--transport fixtures needs --fixtures");

        if (cfg.population_path) {
            population = load_population(*cfg.population_path);
            if (population.profiles.size() != plan.base.n_agents)
                throw ConfigError(*cfg.population_path + ": has " + std::to_string(population.profiles.size()) +
                                  " agents but n_agents is " + std::to_string(plan.base.n_agents));
        } else {
            population = generate_population(plan.base.n_agents, cfg.population_seed);
        }
        if (cfg.corpus_path) {
            auto loaded = load_corpus(*cfg.corpus_path);
            for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
            corpus = std::move(loaded.corpus);
        } else {
            corpus = generate_seed_corpus(cfg.corpus_seed);
        }
        plan.base.expected_seed_posts = corpus.bodies.size();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    auto& plan = cfg.plan;
    plan.population = &population;
    plan.corpus = &corpus;

    std::optional<FixtureTransport> fixtures;
    if (a.transport == "fixtures") {
        try {
            fixtures = FixtureTransport::load(a.fixtures);
        } catch (const ParseError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitUsage;
        }
    }
    std::string api_key = api_key_from_env();
    if (a.transport == "live" && std::holds_alternative<LlmSpec>(plan.policy) && api_key.empty())
        std::cerr << "note: " << kApiKeyEnv << " is not set; sending requests without credentials\n";

    // Every cell forwards to one base transport. The live one opens a client
    // per request, so it is safe to share across worker threads.
    std::unique_ptr<Transport> owned;
    Transport* base = nullptr;
    if (a.transport == "mock") {
        owned = std::make_unique<FunctionTransport>(mock_completion);
    } else if (a.transport == "live") {
        const auto llm = std::holds_alternative<LlmSpec>(plan.policy) ? std::get<LlmSpec>(plan.policy) : LlmSpec{};
        owned = std::make_unique<FunctionTransport>([llm, api_key](const ChatRequest& r) {
            HttpTransport http(llm.base_url, api_key, llm.timeout_seconds);
            return http.complete(r);
        });
    }
    base = owned ? owned.get() : &*fixtures;
    std::unique_ptr<RecordingTransport> recorder;
    if (!a.record.empty()) {
        recorder = std::make_unique<RecordingTransport>(*base);
        base = recorder.get();
    }
    const TransportFactory factory = [base]() -> std::unique_ptr<Transport> {
        return std::make_unique<FunctionTransport>([base](const ChatRequest& r) { return base->complete(r); });
    };

    ExperimentResult res;
    try {
        res = run_experiment(plan, a.out, factory);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    if (recorder) write_text_file(a.record, recorder->to_jsonl());
    for (const auto& c : res.cells) {
        std::cout << c.file << ": " << (c.ok ? "ok" : "FAILED") << " (" << c.exposure_rows << " exposure rows, "
                  << c.activations << " activations)";
        if (!c.ok) std::cout << " " << c.error;
        std::cout << "\n";
    }
    std::cout << "manifest sha256 " << res.manifest_digest << "\n";
    return res.ok() ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string logs;
    std::string out;
    std::string stage = "both";
    double l2 = 0.0;
};

inline int cmd_analyze(const AnalyzeArgs& a) {
    std::vector<CellLog> cells;
    try {
        if (!std::filesystem::exists(std::filesystem::path(a.logs) / "manifest.json"))
            throw RuntimeFailure(a.logs + ": no manifest.json (not a simulate output directory)");
        cells = load_experiment(a.logs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    std::vector<EventLog> logs;
    std::vector<ExposureRecord> rows;
    for (auto& c : cells) {
        for (auto& r : c.log.exposures()) rows.push_back(r);
        logs.push_back(std::move(c.log));
    }
    if (rows.empty()) {
        std::cerr << "error: " << a.logs << ": logs contain no exposure records\n";
        return kExitRuntime;
    }
    std::filesystem::create_directories(a.out);
    const auto out = std::filesystem::path(a.out);
    stats::FitOptions opt;
    opt.l2_penalty = a.l2;

    nlohmann::ordered_json summary;
    summary["exposure_rows"] = rows.size();
    if (a.stage == "threshold" || a.stage == "both") {
        const auto dm = stats::build_design_matrix(rows, {stats::Stage::Threshold, true});
        const auto m = stats::fit_binary_logistic(dm, opt);
        write_text_file((out / "threshold_coefficients.csv").string(), report::coefficients_csv(m));
        write_text_file((out / "threshold_model.json").string(), report::model_to_json(m).dump(2) + "\n");
        summary["threshold"] = report::metrics_json(m);
        std::cout << "threshold: " << m.n_obs << " rows, McFadden " << report::num(m.metrics.mcfadden, 4) << ", AIC "
                  << report::num(m.metrics.aic, 10) << (m.convergence.converged ? "" : " (not converged)") << "\n";
    }
    if (a.stage == "allocation" || a.stage == "both") {
        const auto dm = stats::build_design_matrix(rows, {stats::Stage::Allocation, true});
        if (dm.x.rows() == 0) {
            std::cerr << "warning: no engaged rows; allocation model skipped\n";
            summary["allocation"] = nullptr;
        } else {
            const auto m = stats::fit_multinomial_logistic(dm, opt);
            write_text_file((out / "allocation_coefficients.csv").string(), report::coefficients_csv(m));
            write_text_file((out / "allocation_model.json").string(), report::model_to_json(m).dump(2) + "\n");
            summary["allocation"] = report::metrics_json(m);
            std::cout << "allocation: " << m.n_obs << " rows, McFadden " << report::num(m.metrics.mcfadden, 4)
                      << (m.convergence.converged ? "" : " (not converged)") << "\n";
        }
    }
    std::vector<CellCondition> expected;
    for (const auto& c : cells) expected.push_back({c.key.load, c.key.norm});
    write_text_file((out / "descriptive_shares.csv").string(),
                    report::shares_csv(descriptive_shares(logs), realized_load_audit(logs, expected)));
    write_text_file((out / "fit_summary.json").string(), summary.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string analysis;
    std::string out;
    std::string grid;
    double max_composite = 6.0;
};

inline int cmd_report(const ReportArgs& a) {
    const auto dir = std::filesystem::path(a.analysis);
    const auto shares_path = dir / "descriptive_shares.csv";
    const auto thr_path = dir / "threshold_model.json";
    const auto alloc_path = dir / "allocation_model.json";
    if (!std::filesystem::exists(shares_path)) {
        std::cerr << "error: missing analysis file " << shares_path.string() << "\n";
        return kExitRuntime;
    }
    if (!std::filesystem::exists(thr_path) && !std::filesystem::exists(alloc_path)) {
        std::cerr << "error: missing analysis file " << thr_path.string() << "\n";
        return kExitRuntime;
    }
    std::vector<stats::Scenario> grid;
    try {
        if (!a.grid.empty()) {
            if (!std::filesystem::exists(a.grid)) throw ConfigError(a.grid + ": file not found");
            grid = report::parse_scenario_grid(read_text_file(a.grid), a.grid);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        const auto shares = report::parse_shares_csv(read_text_file(shares_path.string()), shares_path.string());
        std::optional<stats::FittedModel> thr, alloc;
        if (std::filesystem::exists(thr_path))
            thr = report::model_from_json(nlohmann::json::parse(read_text_file(thr_path.string())));
        if (std::filesystem::exists(alloc_path))
            alloc = report::model_from_json(nlohmann::json::parse(read_text_file(alloc_path.string())));

        const auto out = std::filesystem::path(a.out);
        std::filesystem::create_directories(out);
        const auto xs = report::composite_grid(a.max_composite);
        if (grid.empty()) grid = stats::factorial_grid(xs);

        std::vector<std::string> figures;
        write_text_file((out / "shares.svg").string(), report::shares_svg(shares));
        figures.push_back("shares.svg");
        if (thr) {
            write_text_file((out / "threshold_curves.svg").string(),
                            report::curves_svg(*thr, 0, "Predicted probability of engagement", xs));
            figures.push_back("threshold_curves.svg");
            write_text_file((out / "threshold_predictions.csv").string(),
                            report::predictions_csv(stats::predicted_probabilities(*thr, grid), stats::Stage::Threshold));
        }
        if (alloc) {
            for (std::size_t o = 0; o < 3; ++o) {
                const std::string name = std::string("allocation_") + stats::kAllocationOutcomes[o] + "_curves.svg";
                write_text_file((out / name).string(),
                                report::curves_svg(*alloc, o,
                                                   std::string("Predicted probability of ") +
                                                       stats::kAllocationOutcomes[o] + " given engagement",
                                                   xs));
                figures.push_back(name);
            }
            write_text_file((out / "allocation_predictions.csv").string(),
                            report::predictions_csv(stats::predicted_probabilities(*alloc, grid), stats::Stage::Allocation));
        }

        std::string md = "# Simulation report\n\n## Action shares\n\n";
        md += report::shares_markdown(shares);
        md += "\n![Action shares by condition](shares.svg)\n";
        if (thr) {
            md += "\n## Engagement threshold model\n\n" + report::metrics_markdown(*thr) + "\n" +
                  report::coefficients_markdown(*thr) + "\n![Engagement curves](threshold_curves.svg)\n";
        }
        if (alloc) {
            md += "\n## Allocation model (reference: like)\n\n" + report::metrics_markdown(*alloc) + "\n" +
                  report::coefficients_markdown(*alloc) + "\n";
            for (std::size_t o = 0; o < 3; ++o)
                md += std::string("![") + stats::kAllocationOutcomes[o] + " curves](allocation_" +
                      stats::kAllocationOutcomes[o] + "_curves.svg)\n";
        }
        md += "\nTimesteps are 3-minute intervals; composite = log(1 + likes + reshares) at exposure.\n";
        write_text_file((out / "report.md").string(), md);
        for (const auto& f : figures) std::cout << (out / f).string() << "\n";
        std::cout << (out / "report.md").string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

inline int cmd_gen_population(const std::string& out, std::size_t n, std::uint64_t seed) {
    try {
        const auto pop = generate_population(n, seed);
        save_population(out, pop);
        std::cout << out << ": " << pop.profiles.size() << " agents, " << pop.graph.edge_count() << " follow edges\n";
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

inline int cmd_gen_corpus(const std::string& out, std::size_t count, std::uint64_t seed) {
    try {
        const auto corpus = generate_seed_corpus(seed, count);
        save_corpus(out, corpus);
        std::cout << out << ": " << corpus.bodies.size() << " seed posts\n";
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Agent-based social media simulation: generate inputs, run experiments, fit models, report."};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Run the factorial experiment (or selected cells) and write logs");
    s->add_option("--config", sim.config, "Experiment config (JSON)")->required();
    s->add_option("--out", sim.out, "Output directory for logs and manifest")->required();
    s->add_option("--cell", sim.cells, "Run only this cell: load=<lowest|low|medium|high>,norm=<none|like|repost>");
    s->add_option("--policy", sim.policy, "Override the config policy")
        ->check(CLI::IsMember({"mock", "parametric", "scripted", "llm"}));
    s->add_option("--transport", sim.transport, "LLM transport")
        ->check(CLI::IsMember({"live", "fixtures", "mock"}))
        ->capture_default_str();
    s->add_option("--fixtures", sim.fixtures, "Recorded responses (JSONL) for --transport fixtures");
    s->add_option("--record", sim.record, "Write every model response to this fixture file");
    s->add_option("--seed", sim.seed, "Override the base seed");
    s->add_option("--workers", sim.workers, "Cells run in parallel")->check(CLI::PositiveNumber);
    s->add_option("--replications", sim.replications, "Replications per cell");

    AnalyzeArgs an;
    auto* z = app.add_subcommand("analyze", "Fit the threshold and allocation models to simulate output");
    z->add_option("--logs", an.logs, "Directory written by simulate")->required();
    z->add_option("--out", an.out, "Output directory for tables")->required();
    z->add_option("--stage", an.stage, "Which model to fit")
        ->check(CLI::IsMember({"threshold", "allocation", "both"}))
        ->capture_default_str();
    z->add_option("--l2", an.l2, "Optional L2 penalty on non-intercept terms")->capture_default_str();

    ReportArgs rp;
    auto* r = app.add_subcommand("report", "Render SVG figures and a Markdown report from analyze output");
    r->add_option("--analysis", rp.analysis, "Directory written by analyze")->required();
    r->add_option("--out", rp.out, "Output directory")->required();
    r->add_option("--grid", rp.grid, "Scenario grid CSV (composite,load,norm) for prediction tables");
    r->add_option("--max-composite", rp.max_composite, "Upper end of the composite axis")->capture_default_str();

    std::string pop_out;
    std::size_t pop_n = 558;
    std::uint64_t pop_seed = 1;
    auto* gp = app.add_subcommand("gen-population", "Generate a synthetic population (JSONL)");
    gp->add_option("--out", pop_out, "Output file")->required();
    gp->add_option("--agents", pop_n, "Number of agents")->capture_default_str();
    gp->add_option("--seed", pop_seed, "Generator seed")->capture_default_str();

    std::string corpus_out;
    std::size_t corpus_n = kSeedPostCount;
    std::uint64_t corpus_seed = 1;
    auto* gc = app.add_subcommand("gen-corpus", "Generate a synthetic seed corpus (JSONL)");
    gc->add_option("--out", corpus_out, "Output file")->required();
    gc->add_option("--count", corpus_n, "Number of seed posts")->capture_default_str();
    gc->add_option("--seed", corpus_seed, "Generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }
    try {
        if (*s) return cmd_simulate(sim);
        if (*z) return cmd_analyze(an);
        if (*r) return cmd_report(rp);
        if (*gp) return cmd_gen_population(pop_out, pop_n, pop_seed);
        if (*gc) return cmd_gen_corpus(corpus_out, corpus_n, corpus_seed);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace socialsim::cli

#endif  // SOCIALSIM_CLI_HPP
