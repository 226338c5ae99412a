// Acceptance suite: one PASS/FAIL line per criterion; exit status is nonzero
// when any gating criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "socialsim/engine.hpp"
#include "socialsim/harness.hpp"
#include "socialsim/http_transport.hpp"
#include "socialsim/policy.hpp"
#include "socialsim/stats/design.hpp"
#include "socialsim/stats/logistic.hpp"
#include "socialsim/stats/multinomial.hpp"
#include "socialsim/stats/published.hpp"
#include "support.hpp"

using namespace socialsim;
using namespace socialsim::stats;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// Shared full-scale inputs.
const Population& population() {
    static const Population p = generate_population(558, 2024);
    return p;
}

const SeedCorpus& corpus() {
    static const SeedCorpus c = generate_seed_corpus(2024);
    return c;
}

// ---------------------------------------------------------------------------

Verdict table_consistency() {
    const auto t0 = Clock::now();
    auto rows = published_threshold_table();
    const auto alloc = published_allocation_table();
    rows.insert(rows.end(), alloc.begin(), alloc.end());
    const auto rep = table_consistency_check(rows);
    const double secs = seconds_since(t0);
    std::size_t or_ok = 0;
    for (const auto& r : rep.rows) or_ok += r.or_ok ? 1 : 0;
    std::string d = std::to_string(or_ok) + "/" + std::to_string(rep.rows.size()) + " rows with exp(B) within 1% of OR";
    for (const auto& f : rep.failures) d += "; " + f;
    d += "; " + fmt(secs * 1e3, 3) + " ms";
    return {rep.ok() && secs < 1.0, d};
}

Verdict fit_identities() {
    const auto t0 = Clock::now();
    const PublishedFit pub;
    const auto m = fit_metrics(-72042.0, -142968.27, 24, 1);
    const double secs = seconds_since(t0);
    const bool ok = m.aic == 144132.0 && std::abs(m.lr_chi2 - 141852.5) <= 0.1 &&
                    std::abs(m.mcfadden - pub.mcfadden) <= 0.001 && m.df == pub.df && secs < 1.0;
    return {ok, "AIC " + fmt(m.aic, 9) + ", chi2(" + std::to_string(m.df) + ") " + fmt(m.lr_chi2, 9) + ", McFadden " +
                    fmt(m.mcfadden, 5)};
}

Verdict design_df() {
    const auto names = column_names({Stage::Threshold, true});
    const auto row = design_row(1.0, LoadLevel::High, NormRegime::RepostDominant);
    const std::size_t predictors = names.size() - 1;
    const bool ok = predictors == 23 && names.front() == "(Intercept)" && row.size() == 24 &&
                    fit_metrics(-1.0, -2.0, names.size(), 1).df == 23;
    return {ok, std::to_string(predictors) + " predictor columns plus intercept"};
}

Verdict coefficient_recovery() {
    const auto t0 = Clock::now();
    const auto spec = default_parametric_spec();
    const ParametricModel truth(spec);

    // Twelve cells at full scale supply realistic exposure covariates.
    std::vector<std::future<RunResult>> jobs;
    for (auto l : kAllLoads)
        for (auto n : kAllNorms) {
            RunConfig cfg;
            cfg.condition = {LoadCondition{l}, n};
            cfg.seed = cell_seed(404, {l, n, 0});
            cfg.run = RunId{static_cast<std::uint64_t>(index_of(l) * 3 + index_of(n))};
            jobs.push_back(std::async(std::launch::async,
                                      [cfg, &spec] { return run(cfg, spec, population(), corpus()); }));
        }
    std::vector<ExposureRecord> rows;
    for (auto& j : jobs) {
        const auto r = j.get();
        for (const auto& e : r.log.exposures()) rows.push_back(e);
    }

    // Each row's outcome is drawn from the known two-stage model.
    CounterRng rng(777);
    std::size_t engaged = 0;
    for (auto& r : rows) {
        const double pop = popularity_composite(r.likes_at_exposure, r.reshares_at_exposure);
        const auto l = r.condition.load.level;
        const auto n = r.condition.norm;
        r.action = ActionKind::Read;
        if (rng.uniform() < truth.engage_probability(pop, l, n)) {
            r.action = ParametricModel::draw_allocation(truth.allocation_probabilities(pop, l, n), rng.uniform());
            ++engaged;
        }
    }

    const auto th = fit_binary_logistic(build_design_matrix(rows, {Stage::Threshold, true}));
    const auto al = fit_multinomial_logistic(build_design_matrix(rows, {Stage::Allocation, true}));

    std::size_t bad = 0;
    double worst = 0.0;
    std::string worst_label;
    auto check = [&](const Coefficient& c, double b) {
        const double tol = std::max(0.1, 3.0 * c.se);
        const double ratio = std::abs(c.estimate - b) / tol;
        if (!(ratio <= 1.0)) ++bad;
        if (!(ratio <= worst)) {
            worst = ratio;
            worst_label = c.label();
        }
    };
    for (Eigen::Index j = 0; j < 24; ++j) check(th.coefficients[static_cast<std::size_t>(j)], spec.threshold[j]);
    for (Eigen::Index j = 0; j < 48; ++j) check(al.coefficients[static_cast<std::size_t>(j)], spec.allocation[j]);
    const double secs = seconds_since(t0);
    const bool ok = bad == 0 && rows.size() >= 200000 && th.convergence.converged && al.convergence.converged &&
                    secs < 180.0;
    return {ok, std::to_string(rows.size()) + " rows (" + std::to_string(engaged) + " engaged); " +
                    std::to_string(72 - bad) + "/72 coefficients within max(0.1, 3 SE); worst " + worst_label + " at " +
                    fmt(worst, 3) + " of tolerance; " + fmt(secs, 3) + " s"};
}

Verdict closed_forms() {
    Eigen::VectorXi yb(100);
    for (int i = 0; i < 100; ++i) yb[i] = i < 25 ? 1 : 0;
    const auto b = fit_binary_logistic(Eigen::MatrixXd::Ones(100, 1), yb, {"(Intercept)"});
    Eigen::VectorXi ym(100);
    for (int i = 0; i < 100; ++i) ym[i] = i < 60 ? 0 : (i < 90 ? 1 : 2);
    const auto m = fit_multinomial_logistic(Eigen::MatrixXd::Ones(100, 1), ym, {"(Intercept)"});
    const bool ok = std::abs(b.beta[0] + 1.098612) <= 1e-6 && std::abs(m.beta[0] + 0.693147) <= 1e-6 &&
                    std::abs(m.beta[1] + 1.791759) <= 1e-6;
    return {ok, "binary " + fmt(b.beta[0], 9) + "; multinomial (" + fmt(m.beta[0], 9) + ", " + fmt(m.beta[1], 9) + ")"};
}

Verdict gradient_check() {
    // A real design slice: 24 columns, both stages.
    std::vector<ExposureRecord> recs;
    CounterRng r(31);
    const ParametricModel truth(default_parametric_spec());
    for (int i = 0; i < 3000; ++i) {
        ExposureRecord e;
        e.condition = {LoadCondition{kAllLoads[r.below(4)]}, kAllNorms[r.below(3)]};
        e.likes_at_exposure = r.below(12);
        e.reshares_at_exposure = r.below(5);
        const double pop = popularity_composite(e.likes_at_exposure, e.reshares_at_exposure);
        const auto p = truth.allocation_probabilities(pop, e.condition.load.level, e.condition.norm);
        e.action = r.uniform() < 0.4 ? ParametricModel::draw_allocation(p, r.uniform()) : ActionKind::Read;
        recs.push_back(e);
    }
    const auto td = build_design_matrix(recs, {Stage::Threshold, true});
    const auto ad = build_design_matrix(recs, {Stage::Allocation, true});
    MultinomialLikelihood lik(ad.x, ad.y, {1, 2});

    double worst = 0.0;
    auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(1.0, std::abs(an)); };
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd bt(24), ba(48);
        for (Eigen::Index j = 0; j < 24; ++j) bt[j] = 0.3 * r.normal();
        for (Eigen::Index j = 0; j < 48; ++j) ba[j] = 0.3 * r.normal();
        const auto gt = binary_gradient(td.x, td.y, bt);
        const auto ga = lik.gradient(ba);
        const double h = 1e-5;
        for (Eigen::Index j = 0; j < 24; ++j) {
            Eigen::VectorXd p = bt, m = bt;
            p[j] += h;
            m[j] -= h;
            worst = std::max(worst, rel((binary_loglik(td.x, td.y, p) - binary_loglik(td.x, td.y, m)) / (2 * h), gt[j]));
        }
        for (Eigen::Index j = 0; j < 48; ++j) {
            Eigen::VectorXd p = ba, m = ba;
            p[j] += h;
            m[j] -= h;
            worst = std::max(worst, rel((lik.loglik(p) - lik.loglik(m)) / (2 * h), ga[j]));
        }
    }
    return {worst <= 1e-5, "max relative error " + fmt(worst, 3) + " over 10 points x 72 parameters"};
}

// Default-scale run with the offline model responder behind the LLM policy.
const RunResult& mock_run() {
    static const RunResult res = [] {
        FunctionTransport mock(mock_completion);
        RunConfig cfg;
        cfg.seed = 8;
        cfg.condition = {LoadCondition{LoadLevel::Medium}, NormRegime::RepostDominant};
        return run(cfg, LlmSpec{}, population(), corpus(), &mock);
    }();
    return res;
}

Verdict conservation() {
    const auto& res = mock_run();
    std::map<std::uint64_t, PopularityCounters> recount;
    for (const auto& c : res.log.creations()) recount[c.post.value];
    for (const auto& e : res.log.exposures()) {
        auto& c = recount[e.post.value];
        if (e.action == ActionKind::Like) ++c.likes;
        if (e.action == ActionKind::Repost) ++c.reposts;
        if (e.action == ActionKind::Quote) ++c.quotes;
    }
    std::size_t mismatched = 0, reshared = 0;
    for (std::size_t i = 0; i < res.final_counters.size(); ++i) {
        const auto& f = res.final_counters[i];
        const auto it = recount.find(i);
        if (it == recount.end() || !(it->second == f)) ++mismatched;
        if (reshares(f) != f.reposts + f.quotes) ++mismatched;
        reshared += reshares(f) > 0 ? 1 : 0;
    }
    const bool ok = mismatched == 0 && recount.size() == res.final_counters.size();
    return {ok, std::to_string(res.final_counters.size()) + " posts, " + std::to_string(mismatched) + " mismatches, " +
                    std::to_string(reshared) + " reshared posts, " + std::to_string(res.log.exposures().size()) +
                    " exposure rows"};
}

Verdict activation_stats() {
    const auto& res = mock_run();
    const double n = static_cast<double>(res.activations.size());
    const double sd = std::sqrt(267840 * 0.01 * 0.99);
    return {std::abs(n - 2678.4) <= 4 * 51.5, fmt(n, 6) + " activations (expected 2678.4, sd " + fmt(sd, 4) + ", " +
                                                  fmt(n / 480.0, 3) + " per step)"};
}

Verdict load_audit() {
    std::vector<std::future<RunResult>> jobs;
    const auto spec = default_parametric_spec();
    for (auto l : kAllLoads)
        for (auto n : kAllNorms) {
            RunConfig cfg;
            cfg.condition = {LoadCondition{l}, n};
            cfg.seed = cell_seed(909, {l, n, 0});
            cfg.run = RunId{static_cast<std::uint64_t>(index_of(l) * 3 + index_of(n))};
            jobs.push_back(std::async(std::launch::async,
                                      [cfg, &spec] { return run(cfg, spec, population(), corpus()); }));
        }
    std::vector<EventLog> logs;
    bool exceeded = false;
    for (auto& j : jobs) {
        auto r = j.get();
        const auto cond = r.log.exposures().front().condition;
        for (const auto& a : r.activations)
            if (a.feed_size > cond.load.total() || a.algorithmic > cond.load.algorithmic_count()) exceeded = true;
        logs.push_back(std::move(r.log));
    }
    const auto audit = realized_load_audit(logs);
    bool ok = audit.size() == 12 && !exceeded;
    std::ostringstream d;
    std::map<LoadLevel, std::pair<double, double>> range;
    for (const auto& [cell, row] : audit) {
        if (row.empty || std::abs(row.mean - static_cast<double>(row.target)) > 0.5 || row.max > row.target) ok = false;
        auto& [lo, hi] = range.try_emplace(cell.first, 1e9, -1e9).first->second;
        lo = std::min(lo, row.mean);
        hi = std::max(hi, row.mean);
    }
    for (const auto& [l, r] : range)
        d << to_string(l) << " " << LoadCondition{l}.algorithmic_count() << ": mean " << fmt(r.first, 5) << "-"
          << fmt(r.second, 5) << "; ";
    d << (exceeded ? "feed above target seen" : "no feed above target");
    return {ok, d.str()};
}

Verdict determinism() {
    namespace fs = std::filesystem;
    const auto root = socialsim::testing::scratch_dir("acceptance_determinism");
    ExperimentPlan plan;
    plan.population = &population();
    plan.corpus = &corpus();
    plan.policy = LlmSpec{};
    plan.base_seed = 12;
    plan.base.timesteps = 240;
    plan.workers = std::max(1u, std::thread::hardware_concurrency());

    FunctionTransport mock(mock_completion);
    RecordingTransport recorder(mock);
    auto forward = [](Transport& t) {
        return TransportFactory([&t]() -> std::unique_ptr<Transport> {
            return std::make_unique<FunctionTransport>([&t](const ChatRequest& r) { return t.complete(r); });
        });
    };
    const auto recorded = run_experiment(plan, root / "record", forward(recorder));
    write_text_file((root / "fixtures.jsonl").string(), recorder.to_jsonl());

    auto fixtures = FixtureTransport::load((root / "fixtures.jsonl").string());
    const auto a = run_experiment(plan, root / "a", forward(fixtures));
    plan.workers = 1;
    const auto b = run_experiment(plan, root / "b", forward(fixtures));

    const auto ta = read_text_file((root / "a" / "manifest.json").string());
    const auto tb = read_text_file((root / "b" / "manifest.json").string());
    bool logs_equal = a.cells.size() == b.cells.size();
    std::size_t warnings = 0;
    for (std::size_t i = 0; logs_equal && i < a.cells.size(); ++i) {
        logs_equal = a.cells[i].digest == b.cells[i].digest && a.cells[i].digest == recorded.cells[i].digest &&
                     read_text_file((root / "a" / a.cells[i].file).string()) ==
                         read_text_file((root / "b" / b.cells[i].file).string());
        warnings += a.cells[i].warnings + b.cells[i].warnings;
    }
    const bool ok = recorded.ok() && a.ok() && b.ok() && ta == tb && logs_equal && warnings == 0;
    return {ok, std::to_string(recorder.size()) + " recorded responses; manifests " + (ta == tb ? "identical" : "differ") +
                    " (sha256 " + a.manifest_digest.substr(0, 16) + "...); cell logs " +
                    (logs_equal ? "identical" : "differ") + "; " + std::to_string(warnings) + " fixture misses"};
}

Verdict tiny_trace() {
    const auto w = socialsim::testing::tiny_world();
    const auto res = run(w.config, w.script, w.population, w.corpus);
    const auto got = to_jsonl(res.log);
    const auto want = read_text_file(socialsim::testing::data_path("tiny_trace.jsonl"));
    std::istringstream gs(got), ws(want);
    std::string g, x;
    std::size_t line = 0, first_diff = 0;
    while (true) {
        const bool hg = static_cast<bool>(std::getline(gs, g));
        const bool hw = static_cast<bool>(std::getline(ws, x));
        if (!hg && !hw) break;
        ++line;
        if ((hg != hw || g != x) && first_diff == 0) first_diff = line;
    }
    const bool all_active = res.activations.size() == 50;
    std::string d = std::to_string(line) + " lines";
    if (first_diff) d += "; first difference at line " + std::to_string(first_diff);
    if (!all_active) d += "; only " + std::to_string(res.activations.size()) + " of 50 activations";
    return {first_diff == 0 && all_active, d};
}

Verdict parser_fuzz() {
    Feed feed;
    feed.entries = {{PostId{3}, 1, 0, FeedSource::Followed}, {PostId{17}, 0, 2, FeedSource::Algorithmic}};
    std::mt19937_64 gen(20240);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(gen() % n); };
    const std::vector<std::string> actions{"read", "like", "repost", "quote", "LIKE", "share", "", "5"};
    const std::vector<std::string> ids{"3", "17", "4", "-1", "\"3\"", "3.5", "1e2", "null", "99999999999999999999"};
    const std::vector<std::string> comments{"\"hi\"", "\"\"", "3", "null", "[\"x\"]"};

    std::size_t invalid = 0, structured_bad = 0, structured_total = 0, panics = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string s;
        bool expect_read = false;
        switch (i % 3) {
            case 0: {  // raw bytes
                const auto len = pick(80);
                for (std::size_t k = 0; k < len; ++k) s.push_back(static_cast<char>(gen() & 0xff));
                break;
            }
            case 1: {  // JSON-ish characters
                static const std::string alphabet = "{}[]\":,0123456789 actionpost_idlikequoterepostcomment\\n";
                const auto len = pick(60);
                for (std::size_t k = 0; k < len; ++k) s.push_back(alphabet[pick(alphabet.size())]);
                break;
            }
            default: {  // structured objects, some violating an invariant
                const auto& a = actions[pick(actions.size())];
                const bool has_id = pick(4) != 0, has_comment = pick(2) != 0;
                const auto& id = ids[pick(ids.size())];
                const auto& c = comments[pick(comments.size())];
                s = "{\"action\":\"" + a + "\"";
                if (has_id) s += ",\"post_id\":" + id;
                if (has_comment) s += ",\"comment\":" + c;
                s += "}";
                std::string lower = a;
                for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                const bool known = lower == "read" || lower == "like" || lower == "repost" || lower == "quote";
                const bool id_ok = has_id && (id == "3" || id == "17");
                const bool comment_ok = has_comment && c == "\"hi\"";
                expect_read = !known || (lower != "read" && !id_ok) || (lower == "quote" && !comment_ok);
                ++structured_total;
                break;
            }
        }
        try {
            const auto out = parse_response(s, feed);
            if (!is_valid_decision(out.decision, feed)) ++invalid;
            if (expect_read && !out.decision.is_read_all()) ++structured_bad;
        } catch (...) {
            ++panics;
        }
    }
    const bool ok = invalid == 0 && structured_bad == 0 && panics == 0;
    return {ok, "10000 inputs; " + std::to_string(panics) + " exceptions, " + std::to_string(invalid) +
                    " invalid decisions, " + std::to_string(structured_bad) + "/" + std::to_string(structured_total) +
                    " structured violations not degraded to read"};
}

// Live endpoint only; never gates.
std::optional<Verdict> live_run() {
    const auto key = api_key_from_env();
    if (key.empty()) return std::nullopt;
    LlmSpec spec;
    if (const char* url = std::getenv("SOCIALSIM_LLM_BASE_URL")) spec.base_url = url;
    spec.api_key = key;
    HttpTransport http(spec.base_url, key, spec.timeout_seconds);
    const auto pop = generate_population(100, 5);
    RunConfig cfg;
    cfg.n_agents = 100;
    cfg.timesteps = 120;
    cfg.seed = 5;
    const auto res = run(cfg, spec, pop, corpus(), &http);
    std::size_t reads = 0, total = 0;
    for (const auto& e : res.log.exposures()) {
        ++total;
        reads += e.action == ActionKind::Read ? 1 : 0;
    }
    const double share = total ? static_cast<double>(reads) / static_cast<double>(total) : 0.0;
    const bool in_paper_band = share >= 0.731 && share <= 0.980;
    return Verdict{share >= 0.5 && share < 1.0,
                   "read share " + fmt(share, 4) + " over " + std::to_string(total) + " rows; paper band [0.731, 0.980] " +
                       (in_paper_band ? "contains it" : "does not contain it")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"published odds ratios equal exp(B) within 1%", table_consistency},
        {"fit statistics back-solve", fit_identities},
        {"threshold design has 23 predictors", design_df},
        {"coefficient recovery from the parametric policy", coefficient_recovery},
        {"closed-form intercept-only fits", closed_forms},
        {"analytic gradients match finite differences", gradient_check},
        {"engine counters equal log recount", conservation},
        {"activation count matches Bernoulli(0.01)", activation_stats},
        {"realized algorithmic load per cell", load_audit},
        {"fixture replay is byte-identical", determinism},
        {"tiny trace equals the hand-written log", tiny_trace},
        {"response parser survives fuzzing", parser_fuzz},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " -- "
                  << v.detail << " [" << fmt(seconds_since(t0), 3) << " s]" << std::endl;
    }
    try {
        if (const auto live = live_run())
            std::cout << (live->pass ? "PASS" : "FAIL") << " criterion 13 (non-gating): live reduced run -- "
                      << live->detail << std::endl;
        else
            std::cout << "SKIP criterion 13 (non-gating): " << kApiKeyEnv << " not set" << std::endl;
    } catch (const std::exception& e) {
        std::cout << "FAIL criterion 13 (non-gating): live reduced run -- exception: " << e.what() << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " gating criteria failed" : "all gating criteria passed") << std::endl;
    return failed ? 1 : 0;
}
