#ifndef SOCIALSIM_CORE_HPP
#define SOCIALSIM_CORE_HPP

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace socialsim {

// Thrown for invalid configuration (bad population size, wrong influencer
// count, malformed run parameters). The CLI maps it to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown by the file loaders; the message names the offending line.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class Tag>
struct Id {
    std::uint64_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::uint64_t v) : value(v) {}

    friend constexpr auto operator<=>(const Id&, const Id&) = default;
};

struct AgentTag {};
struct PostTag {};
struct RunTag {};

using AgentId = Id<AgentTag>;
using PostId = Id<PostTag>;
using RunId = Id<RunTag>;

using Timestep = std::int32_t;

enum class ActionKind { Read, Like, Repost, Quote };

inline constexpr std::array<ActionKind, 4> kAllActions{
    ActionKind::Read, ActionKind::Like, ActionKind::Repost, ActionKind::Quote};

inline constexpr std::string_view to_string(ActionKind a) {
    switch (a) {
        case ActionKind::Read: return "read";
        case ActionKind::Like: return "like";
        case ActionKind::Repost: return "repost";
        case ActionKind::Quote: return "quote";
    }
    return "read";
}

inline std::optional<ActionKind> parse_action(std::string_view s) {
    for (auto a : kAllActions)
        if (to_string(a) == s) return a;
    return std::nullopt;
}

inline constexpr bool is_engagement(ActionKind a) { return a != ActionKind::Read; }

// ---------------------------------------------------------------------------
// Information load: three followed-account posts plus K algorithmic posts.

enum class LoadLevel { Lowest, Low, Medium, High };

inline constexpr std::array<LoadLevel, 4> kAllLoads{
    LoadLevel::Lowest, LoadLevel::Low, LoadLevel::Medium, LoadLevel::High};

struct LoadCondition {
    LoadLevel level = LoadLevel::Lowest;

    static constexpr std::size_t followed_count = 3;

    constexpr std::size_t algorithmic_count() const {
        switch (level) {
            case LoadLevel::Lowest: return 4;
            case LoadLevel::Low: return 7;
            case LoadLevel::Medium: return 15;
            case LoadLevel::High: return 30;
        }
        return 4;
    }
    constexpr std::size_t total() const { return followed_count + algorithmic_count(); }

    friend constexpr bool operator==(const LoadCondition&, const LoadCondition&) = default;
};

inline constexpr std::string_view to_string(LoadLevel l) {
    switch (l) {
        case LoadLevel::Lowest: return "lowest";
        case LoadLevel::Low: return "low";
        case LoadLevel::Medium: return "medium";
        case LoadLevel::High: return "high";
    }
    return "lowest";
}

inline std::optional<LoadLevel> parse_load(std::string_view s) {
    for (auto l : kAllLoads)
        if (to_string(l) == s) return l;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Descriptive-norm regimes delivered through the system prompt.

enum class NormRegime { NoNorm, LikeDominant, RepostDominant };

inline constexpr std::array<NormRegime, 3> kAllNorms{
    NormRegime::NoNorm, NormRegime::LikeDominant, NormRegime::RepostDominant};

inline constexpr std::string_view to_string(NormRegime n) {
    switch (n) {
        case NormRegime::NoNorm: return "none";
        case NormRegime::LikeDominant: return "like";
        case NormRegime::RepostDominant: return "repost";
    }
    return "none";
}

inline std::optional<NormRegime> parse_norm(std::string_view s) {
    for (auto n : kAllNorms)
        if (to_string(n) == s) return n;
    return std::nullopt;
}

// Prevalence-only wording; no imperative and no participation rate.
inline constexpr std::string_view norm_prompt_fragment(NormRegime n) {
    switch (n) {
        case NormRegime::NoNorm: return "";
        case NormRegime::LikeDominant:
            return "When users here engage with posts, they typically like (about 80%), "
                   "repost (about 15%), or quote (about 5%).";
        case NormRegime::RepostDominant:
            return "When users here redistribute posts, they typically repost (about 90%) "
                   "rather than quote (about 10%).";
    }
    return "";
}

struct Condition {
    LoadCondition load;
    NormRegime norm = NormRegime::NoNorm;

    friend constexpr bool operator==(const Condition&, const Condition&) = default;
};

inline std::string to_string(const Condition& c) {
    return "load=" + std::string(to_string(c.load.level)) + ",norm=" + std::string(to_string(c.norm));
}

// ---------------------------------------------------------------------------
// Popularity

struct PopularityCounters {
    std::uint64_t likes = 0;
    std::uint64_t reposts = 0;
    std::uint64_t quotes = 0;

    friend constexpr bool operator==(const PopularityCounters&, const PopularityCounters&) = default;
};

// Reposts and quotes are shown as one combined redistribution count.
inline constexpr std::uint64_t reshares(const PopularityCounters& c) { return c.reposts + c.quotes; }

// ln(1 + likes + reshares). Zero-engagement posts map to 0.
inline double popularity_composite(std::uint64_t likes, std::uint64_t reshares) {
    return std::log1p(static_cast<double>(likes) + static_cast<double>(reshares));
}

// ---------------------------------------------------------------------------
// Posts and records

enum class PostKind { Seed, Repost, Quote };

inline constexpr std::string_view to_string(PostKind k) {
    switch (k) {
        case PostKind::Seed: return "seed";
        case PostKind::Repost: return "repost";
        case PostKind::Quote: return "quote";
    }
    return "seed";
}

inline std::optional<PostKind> parse_post_kind(std::string_view s) {
    if (s == "seed") return PostKind::Seed;
    if (s == "repost") return PostKind::Repost;
    if (s == "quote") return PostKind::Quote;
    return std::nullopt;
}

struct Post {
    PostId id;
    AgentId author;
    std::string content;
    PostKind kind = PostKind::Seed;
    std::optional<PostId> source_link;
    Timestep created_at = 0;
    PopularityCounters counters;
};

// Builds the body of a quote post: commentary followed by the embedded source.
inline std::string quote_content(std::string_view commentary, std::string_view source_content) {
    std::string out;
    out.reserve(commentary.size() + source_content.size() + 4);
    out.append(commentary);
    out.append("\n\n> ");
    out.append(source_content);
    return out;
}

// Which feed slot produced an exposure. Followed-slot shortfalls are
// backfilled by the recommender and labeled Algorithmic.
enum class FeedSource { Followed, Algorithmic };

inline constexpr std::string_view to_string(FeedSource s) {
    return s == FeedSource::Followed ? "followed" : "algorithmic";
}

// One agent x post x activation row; the regression unit.
struct ExposureRecord {
    RunId run;
    Condition condition;
    Timestep timestep = 0;
    AgentId agent;
    PostId post;
    std::uint64_t likes_at_exposure = 0;
    std::uint64_t reshares_at_exposure = 0;
    ActionKind action = ActionKind::Read;
    FeedSource source = FeedSource::Algorithmic;

    friend bool operator==(const ExposureRecord&, const ExposureRecord&) = default;
};

// Logged whenever a post enters the world (seeds at t=0, reposts, quotes).
struct PostCreatedRecord {
    RunId run;
    Timestep timestep = 0;
    PostId post;
    PostKind kind = PostKind::Seed;
    std::optional<PostId> source_link;
    AgentId author;

    friend bool operator==(const PostCreatedRecord&, const PostCreatedRecord&) = default;
};

// ---------------------------------------------------------------------------
// Run parameterization. The decision policy is passed separately to the engine.

struct RankingWeights {
    double recency = 0.7;
    double relevance = 0.3;
};

struct RunConfig {
    std::size_t n_agents = 558;
    Timestep timesteps = 480;
    double activation_p = 0.01;
    std::uint64_t seed = 1;
    RunId run{0};
    Condition condition;
    double recency_decay = 0.01;  // per timestep
    RankingWeights weights;
    std::size_t history_window = 8;
    // Initialization expectations; small hand-built worlds override them.
    std::size_t expected_influencers = 8;
    std::size_t expected_seed_posts = 50;

    void validate() const {
        if (!(activation_p > 0.0 && activation_p < 1.0))
            throw ConfigError("activation_p must lie in (0, 1)");
        if (timesteps <= 0) throw ConfigError("timesteps must be positive");
        if (std::abs(weights.recency + weights.relevance - 1.0) > 1e-9)
            throw ConfigError("ranking weights must sum to 1");
        if (weights.recency < 0.0 || weights.relevance < 0.0)
            throw ConfigError("ranking weights must be non-negative");
        if (recency_decay < 0.0) throw ConfigError("recency_decay must be non-negative");
    }
};

}  // namespace socialsim

template <class Tag>
struct std::hash<socialsim::Id<Tag>> {
    std::size_t operator()(const socialsim::Id<Tag>& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};

#endif  // SOCIALSIM_CORE_HPP
