#ifndef SOCIALSIM_POPULATION_HPP
#define SOCIALSIM_POPULATION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "io.hpp"
#include "rng.hpp"
#include "text.hpp"

namespace socialsim {

struct AgentProfile {
    AgentId id;
    std::string name;
    std::vector<std::string> interest_keywords;  // sorted, unique
    bool verified = false;
    bool influencer = false;

    friend bool operator==(const AgentProfile&, const AgentProfile&) = default;
};

// Directed follower -> followee edges. Agent ids are dense: 0..n-1.
class FollowGraph {
public:
    FollowGraph() = default;
    explicit FollowGraph(std::size_t n) : followees_(n) {}

    std::size_t size() const { return followees_.size(); }

    void add_edge(AgentId follower, AgentId followee) {
        if (follower == followee) throw ConfigError("self-edge on agent " + std::to_string(follower.value));
        auto& v = followees_.at(follower.value);
        auto it = std::lower_bound(v.begin(), v.end(), followee);
        if (it == v.end() || *it != followee) v.insert(it, followee);
    }

    bool follows(AgentId follower, AgentId followee) const {
        const auto& v = followees_.at(follower.value);
        return std::binary_search(v.begin(), v.end(), followee);
    }

    const std::vector<AgentId>& followees(AgentId a) const { return followees_.at(a.value); }

    std::vector<std::size_t> in_degrees() const {
        std::vector<std::size_t> deg(followees_.size(), 0);
        for (const auto& v : followees_)
            for (auto f : v) ++deg[f.value];
        return deg;
    }

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (const auto& v : followees_) e += v.size();
        return e;
    }

    friend bool operator==(const FollowGraph&, const FollowGraph&) = default;

private:
    std::vector<std::vector<AgentId>> followees_;
};

struct Population {
    std::vector<AgentProfile> profiles;
    FollowGraph graph;

    std::vector<AgentId> influencers() const {
        std::vector<AgentId> out;
        for (const auto& p : profiles)
            if (p.influencer) out.push_back(p.id);
        return out;
    }

    friend bool operator==(const Population&, const Population&) = default;
};

struct SeedCorpus {
    std::vector<std::string> bodies;

    std::vector<std::size_t> token_counts() const {
        std::vector<std::size_t> out;
        out.reserve(bodies.size());
        for (const auto& b : bodies) out.push_back(count_tokens(b));
        return out;
    }

    friend bool operator==(const SeedCorpus&, const SeedCorpus&) = default;
};

inline constexpr std::size_t kInfluencerCount = 8;
inline constexpr std::size_t kSeedPostCount = 50;
inline constexpr std::size_t kMinSeedTokens = 150;
inline constexpr std::size_t kMaxSeedTokens = 300;

// Top-k agents by in-degree, ties to the smaller id.
inline std::vector<AgentId> top_by_in_degree(const FollowGraph& g, std::size_t k) {
    const auto deg = g.in_degrees();
    std::vector<std::uint64_t> order(deg.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return deg[a] > deg[b]; });
    std::vector<AgentId> out;
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.emplace_back(order[i]);
    std::sort(out.begin(), out.end());
    return out;
}

inline void flag_influencers(Population& pop, std::size_t k = kInfluencerCount) {
    for (auto& p : pop.profiles) p.influencer = false;
    for (auto id : top_by_in_degree(pop.graph, k)) pop.profiles[id.value].influencer = true;
}

// ---------------------------------------------------------------------------
// Synthetic generation

namespace vocab {
// Topical words shared by profile keywords and synthetic post bodies, so
// keyword/content overlap is meaningful for relevance ranking.
inline constexpr std::array<std::string_view, 48> kTopics{
    "deepseek", "model",      "open-source", "reasoning", "benchmark", "gpu",       "chips",
    "training", "inference",  "cost",        "startup",   "investors", "nvidia",    "export",
    "policy",   "china",      "innovation",  "coding",    "math",      "chatbot",   "api",
    "pricing",  "efficiency", "distillation", "weights",  "license",   "research",  "talent",
    "compute",  "stocks",     "market",      "education", "privacy",   "security",  "regulation",
    "app",      "download",   "ranking",     "hype",      "users",     "developers", "cloud",
    "energy",   "datacenter", "agents",      "robotics",  "future",    "competition"};

inline constexpr std::array<std::string_view, 40> kFiller{
    "the",   "a",     "of",   "and",    "to",    "in",     "is",      "that",   "it",    "for",
    "on",    "with",  "this", "as",     "we",    "they",   "are",     "be",     "more",  "new",
    "not",   "but",   "from", "about",  "than",  "people", "really",  "think",  "today", "some",
    "many", "could",  "will", "just",   "very",  "now",    "already", "still",  "much",  "next"};
}  // namespace vocab

struct PopulationOptions {
    double in_degree_exponent = 2.5;
    std::size_t influencer_count = kInfluencerCount;
    // Every agent follows at least this many influencers (other than itself),
    // so the followed-account slot of each feed has supply from t = 0.
    std::size_t min_influencer_follows = 2;
    std::size_t min_keywords = 3;
    std::size_t max_keywords = 6;
    double verified_p = 0.05;
};

namespace detail {

// Discrete power law on [1, kmax]: P(k) ∝ k^-alpha, inverse-CDF sampling.
class PowerLawSampler {
public:
    PowerLawSampler(std::size_t kmax, double alpha) : cdf_(kmax) {
        double acc = 0.0;
        for (std::size_t k = 1; k <= kmax; ++k) {
            acc += std::pow(static_cast<double>(k), -alpha);
            cdf_[k - 1] = acc;
        }
        for (auto& c : cdf_) c /= acc;
    }
    std::size_t draw(CounterRng& rng) const {
        const double u = rng.uniform();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return static_cast<std::size_t>(it - cdf_.begin()) + 1;
    }

private:
    std::vector<double> cdf_;
};

// k distinct values from [0, n) excluding `skip`, by partial Fisher-Yates.
inline std::vector<std::uint64_t> sample_distinct(CounterRng& rng, std::size_t n, std::size_t k,
                                                  std::uint64_t skip = ~std::uint64_t{0}) {
    std::vector<std::uint64_t> pool;
    pool.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        if (i != skip) pool.push_back(i);
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace detail

inline Population generate_population(std::size_t n, std::uint64_t seed,
                                      const PopulationOptions& opt = {}) {
    if (n < 10) throw ConfigError("population needs at least 10 agents, got " + std::to_string(n));
    if (opt.in_degree_exponent <= 1.0) throw ConfigError("in-degree exponent must exceed 1");
    if (opt.min_keywords == 0 || opt.max_keywords < opt.min_keywords)
        throw ConfigError("invalid keyword count range");

    CounterRng root(seed);
    auto rng = root.split({static_cast<std::uint64_t>(StreamLabel::Population)});

    Population pop;
    pop.graph = FollowGraph(n);
    pop.profiles.resize(n);

    // Keywords and names first so the graph draws do not shift them.
    for (std::size_t i = 0; i < n; ++i) {
        auto& p = pop.profiles[i];
        p.id = AgentId{i};
        p.name = "user_" + std::to_string(i);
        const auto nk = opt.min_keywords + rng.below(opt.max_keywords - opt.min_keywords + 1);
        for (auto idx : detail::sample_distinct(rng, vocab::kTopics.size(), nk))
            p.interest_keywords.emplace_back(vocab::kTopics[idx]);
        std::sort(p.interest_keywords.begin(), p.interest_keywords.end());
        p.verified = rng.bernoulli(opt.verified_p);
    }

    // Heavy-tailed in-degree: each agent draws a follower count, then that
    // many distinct followers uniformly from everyone else.
    detail::PowerLawSampler sampler(n - 1, opt.in_degree_exponent);
    for (std::size_t j = 0; j < n; ++j) {
        const auto d = sampler.draw(rng);
        for (auto f : detail::sample_distinct(rng, n, d, j)) pop.graph.add_edge(AgentId{f}, AgentId{j});
    }

    // Guarantee followed-account supply. Edges added here only point at the
    // current top set, so the top set by in-degree does not change.
    const auto top = top_by_in_degree(pop.graph, opt.influencer_count);
    for (std::size_t i = 0; i < n; ++i) {
        const AgentId me{i};
        std::vector<AgentId> candidates;
        std::size_t have = 0;
        for (auto inf : top) {
            if (inf == me) continue;
            if (pop.graph.follows(me, inf)) ++have;
            else candidates.push_back(inf);
        }
        while (have < opt.min_influencer_follows && !candidates.empty()) {
            const auto pick = rng.below(candidates.size());
            pop.graph.add_edge(me, candidates[pick]);
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
            ++have;
        }
    }

    flag_influencers(pop, opt.influencer_count);
    for (auto& p : pop.profiles)
        if (p.influencer) p.verified = true;
    return pop;
}

inline SeedCorpus generate_seed_corpus(std::uint64_t seed, std::size_t count = kSeedPostCount) {
    CounterRng rng = CounterRng(seed).split({static_cast<std::uint64_t>(StreamLabel::Corpus)});
    SeedCorpus corpus;
    std::set<std::string> seen;
    while (corpus.bodies.size() < count) {
        const auto ntok = kMinSeedTokens + rng.below(kMaxSeedTokens - kMinSeedTokens + 1);
        // Each post leans on a handful of focal topics.
        std::array<std::size_t, 4> focal{};
        for (auto& f : focal) f = rng.below(vocab::kTopics.size());
        std::string body;
        for (std::size_t t = 0; t < ntok; ++t) {
            if (t) body += (rng.below(12) == 0 ? ". " : " ");
            const double u = rng.uniform();
            if (u < 0.25) body += vocab::kTopics[focal[rng.below(focal.size())]];
            else if (u < 0.35) body += vocab::kTopics[rng.below(vocab::kTopics.size())];
            else body += vocab::kFiller[rng.below(vocab::kFiller.size())];
        }
        body += ".";
        if (seen.insert(body).second) corpus.bodies.push_back(std::move(body));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// JSON Lines persistence
//
// Population: {"id": int, "name": str, "keywords": [str], "verified": bool, "follows": [int]}
// Corpus:     {"content": str}

inline std::string population_to_jsonl(const Population& pop) {
    std::string out;
    for (const auto& p : pop.profiles) {
        nlohmann::ordered_json j;
        j["id"] = p.id.value;
        j["name"] = p.name;
        j["keywords"] = p.interest_keywords;
        j["verified"] = p.verified;
        auto follows = nlohmann::json::array();
        for (auto f : pop.graph.followees(p.id)) follows.push_back(f.value);
        j["follows"] = std::move(follows);
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::string corpus_to_jsonl(const SeedCorpus& c) {
    std::string out;
    for (const auto& b : c.bodies) {
        nlohmann::ordered_json j;
        j["content"] = b;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline void save_population(const std::string& path, const Population& pop) {
    write_text_file(path, population_to_jsonl(pop));
}

inline void save_corpus(const std::string& path, const SeedCorpus& c) {
    write_text_file(path, corpus_to_jsonl(c));
}

inline Population parse_population_jsonl(const std::string& text, const std::string& source = "<population>") {
    struct Row {
        AgentProfile profile;
        std::vector<std::uint64_t> follows;
        std::size_t line;
    };
    std::vector<Row> rows;
    detail::for_each_jsonl_line(source, text, [&](const nlohmann::json& j, std::size_t lineno) {
        Row r;
        r.line = lineno;
        const auto id = j.at("id").get<std::int64_t>();
        if (id < 0) throw ParseError(source + ":" + std::to_string(lineno) + ": negative id");
        r.profile.id = AgentId{static_cast<std::uint64_t>(id)};
        r.profile.name = j.at("name").get<std::string>();
        for (const auto& k : j.at("keywords")) r.profile.interest_keywords.push_back(k.get<std::string>());
        std::sort(r.profile.interest_keywords.begin(), r.profile.interest_keywords.end());
        r.profile.interest_keywords.erase(
            std::unique(r.profile.interest_keywords.begin(), r.profile.interest_keywords.end()),
            r.profile.interest_keywords.end());
        if (r.profile.interest_keywords.empty())
            throw ParseError(source + ":" + std::to_string(lineno) + ": keywords must be non-empty");
        r.profile.verified = j.at("verified").get<bool>();
        for (const auto& f : j.at("follows")) {
            const auto v = f.get<std::int64_t>();
            if (v < 0) throw ParseError(source + ":" + std::to_string(lineno) + ": negative followee id");
            if (v == id) throw ParseError(source + ":" + std::to_string(lineno) + ": self-edge on agent " + std::to_string(id));
            r.follows.push_back(static_cast<std::uint64_t>(v));
        }
        rows.push_back(std::move(r));
    });

    const std::size_t n = rows.size();
    std::vector<const Row*> by_id(n, nullptr);
    for (const auto& r : rows) {
        const auto id = r.profile.id.value;
        if (id >= n)
            throw ParseError(source + ":" + std::to_string(r.line) + ": id " + std::to_string(id) +
                             " outside 0.." + std::to_string(n - 1) + " (ids must be contiguous)");
        if (by_id[id]) throw ParseError(source + ":" + std::to_string(r.line) + ": duplicate id " + std::to_string(id));
        by_id[id] = &r;
    }

    Population pop;
    pop.graph = FollowGraph(n);
    for (std::size_t i = 0; i < n; ++i) {
        pop.profiles.push_back(by_id[i]->profile);
        for (auto f : by_id[i]->follows) {
            if (f >= n)
                throw ParseError(source + ":" + std::to_string(by_id[i]->line) + ": unknown followee " + std::to_string(f));
            pop.graph.add_edge(AgentId{i}, AgentId{f});
        }
    }
    flag_influencers(pop);
    return pop;
}

inline Population load_population(const std::string& path) {
    return parse_population_jsonl(read_text_file(path), path);
}

struct CorpusLoadResult {
    SeedCorpus corpus;
    std::vector<std::string> warnings;
};

inline CorpusLoadResult parse_corpus_jsonl(const std::string& text, const std::string& source = "<corpus>") {
    CorpusLoadResult res;
    std::set<std::string> seen;
    detail::for_each_jsonl_line(source, text, [&](const nlohmann::json& j, std::size_t lineno) {
        auto body = j.at("content").get<std::string>();
        if (!seen.insert(body).second)
            throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate post body");
        const auto nt = count_tokens(body);
        if (nt < kMinSeedTokens || nt > kMaxSeedTokens)
            res.warnings.push_back(source + ":" + std::to_string(lineno) + ": " + std::to_string(nt) +
                                   " tokens, outside [150, 300]");
        res.corpus.bodies.push_back(std::move(body));
    });
    return res;
}

inline CorpusLoadResult load_corpus(const std::string& path) {
    return parse_corpus_jsonl(read_text_file(path), path);
}

}  // namespace socialsim

#endif  // SOCIALSIM_POPULATION_HPP
