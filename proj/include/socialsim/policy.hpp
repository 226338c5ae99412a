#ifndef SOCIALSIM_POLICY_HPP
#define SOCIALSIM_POLICY_HPP

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "core.hpp"
#include "population.hpp"
#include "recommender.hpp"
#include "rng.hpp"
#include "stats/design.hpp"
#include "transport.hpp"
#include "world.hpp"

namespace socialsim {

// Everything a policy may look at for one activation.
struct DecisionContext {
    Feed feed;
    std::vector<std::string> contents;  // parallel to feed.entries
    AgentProfile profile;
    std::vector<Interaction> recent_history;  // oldest first, at most the history window
    NormRegime regime = NormRegime::NoNorm;
    // Not shown to LLM agents; the parametric policy needs it for its design row.
    LoadLevel load = LoadLevel::Lowest;
    Timestep now = 0;
};

inline DecisionContext make_context(const WorldState& world, AgentId agent, Feed feed, const Condition& cond,
                                    Timestep now) {
    DecisionContext ctx;
    ctx.contents.reserve(feed.size());
    for (const auto& e : feed.entries) ctx.contents.push_back(world.post(e.post).content);
    ctx.feed = std::move(feed);
    ctx.profile = world.population().profiles.at(agent.value);
    const auto& h = world.recent_history(agent);
    ctx.recent_history.assign(h.begin(), h.end());
    ctx.regime = cond.norm;
    ctx.load = cond.load.level;
    ctx.now = now;
    return ctx;
}

struct Engagement {
    PostId target;
    ActionKind action = ActionKind::Like;  // Like, Repost or Quote
    std::optional<std::string> commentary;  // present iff Quote

    friend bool operator==(const Engagement&, const Engagement&) = default;
};

// Either read the whole feed or engage exactly one post.
struct Decision {
    std::optional<Engagement> engagement;

    static Decision read_all() { return {}; }
    static Decision engage(PostId target, ActionKind action, std::optional<std::string> commentary = std::nullopt) {
        return {Engagement{target, action, std::move(commentary)}};
    }

    bool is_read_all() const { return !engagement.has_value(); }

    friend bool operator==(const Decision&, const Decision&) = default;
};

inline bool is_valid_decision(const Decision& d, const Feed& feed) {
    if (d.is_read_all()) return true;
    const auto& e = *d.engagement;
    if (!is_engagement(e.action)) return false;
    if (!feed.contains(e.target)) return false;
    const bool has_comment = e.commentary.has_value() && !e.commentary->empty();
    if (e.action == ActionKind::Quote) return has_comment;
    return !e.commentary.has_value();
}

// ---------------------------------------------------------------------------
// Prompt

struct ChatPrompt {
    std::string system;
    std::string user;

    std::string text() const { return system + "\n\n" + user; }
};

inline constexpr std::string_view kSystemFraming =
    "You are a user of a Weibo-like microblogging platform. You will see your profile, your most recent "
    "interactions, and the posts currently in your feed. Each post shows its cumulative likes and its "
    "cumulative reshares (reposts and quotes combined).\n"
    "For this session, choose exactly one action: read (no engagement with any post), like one post, "
    "repost one post (share it unchanged), or quote one post (share it with your own comment).";

inline constexpr std::string_view kResponseInstruction =
    "Respond with a single JSON object and nothing else, for example "
    "{\"action\": \"like\", \"post_id\": 12}. The \"action\" field is one of \"read\", \"like\", "
    "\"repost\", \"quote\". \"post_id\" is required unless the action is \"read\". "
    "\"comment\" is required for \"quote\" and must be omitted otherwise.";

// Pure function of the context. The norm section is present only when the
// regime carries a fragment; the load condition is never mentioned.
inline ChatPrompt build_prompt(const DecisionContext& ctx) {
    ChatPrompt p;
    p.system = std::string(kSystemFraming);
    const auto fragment = norm_prompt_fragment(ctx.regime);
    if (!fragment.empty()) {
        p.system += "\n\nCommunity context: ";
        p.system += fragment;
    }
    p.system += "\n\n";
    p.system += kResponseInstruction;

    std::string& u = p.user;
    u += "Your profile:\n";
    u += "- name: " + ctx.profile.name + "\n";
    u += "- interests: ";
    for (std::size_t i = 0; i < ctx.profile.interest_keywords.size(); ++i) {
        if (i) u += ", ";
        u += ctx.profile.interest_keywords[i];
    }
    u += "\n- verified: ";
    u += ctx.profile.verified ? "yes" : "no";
    u += "\n\nYour recent interactions (oldest first):\n";
    if (ctx.recent_history.empty()) u += "- none\n";
    for (const auto& h : ctx.recent_history)
        u += "- " + std::string(to_string(h.action)) + " post " + std::to_string(h.post.value) + "\n";
    u += "\nPosts in your feed:\n";
    for (std::size_t i = 0; i < ctx.feed.entries.size(); ++i) {
        const auto& e = ctx.feed.entries[i];
        u += "\n[post_id=" + std::to_string(e.post.value) + "] likes=" + std::to_string(e.likes_at_exposure) +
             " reshares=" + std::to_string(e.reshares_at_exposure) + "\n";
        u += ctx.contents.at(i);
        u += "\n";
    }
    return p;
}

// ---------------------------------------------------------------------------
// Response parsing

struct ParseOutcome {
    Decision decision;
    std::optional<std::string> warning;
};

namespace detail {

inline std::optional<nlohmann::json> extract_json_object(const std::string& raw) {
    auto j = nlohmann::json::parse(raw, nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
    // Models often wrap the object in prose or code fences.
    const auto b = raw.find('{');
    const auto e = raw.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e <= b) return std::nullopt;
    j = nlohmann::json::parse(raw.substr(b, e - b + 1), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
    return std::nullopt;
}

inline std::string lower_ascii(std::string s) {
    for (auto& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

}  // namespace detail

// Total: anything that does not describe a valid decision for `feed` becomes
// ReadAll with a warning.
inline ParseOutcome parse_response(const std::string& raw, const Feed& feed) {
    auto fail = [](std::string why) { return ParseOutcome{Decision::read_all(), std::move(why)}; };

    const auto obj = detail::extract_json_object(raw);
    if (!obj) return fail("response is not a JSON object");
    const auto act_it = obj->find("action");
    if (act_it == obj->end() || !act_it->is_string()) return fail("missing string field 'action'");
    const auto action = parse_action(detail::lower_ascii(act_it->get<std::string>()));
    if (!action) return fail("unknown action '" + act_it->get<std::string>() + "'");
    if (*action == ActionKind::Read) return {Decision::read_all(), std::nullopt};

    const auto id_it = obj->find("post_id");
    if (id_it == obj->end()) return fail("missing 'post_id'");
    std::optional<std::uint64_t> id;
    if (id_it->is_number_unsigned()) id = id_it->get<std::uint64_t>();
    else if (id_it->is_number_integer() && id_it->get<std::int64_t>() >= 0)
        id = static_cast<std::uint64_t>(id_it->get<std::int64_t>());
    if (!id) return fail("'post_id' must be a non-negative integer");
    const PostId target{*id};
    if (!feed.contains(target)) return fail("post " + std::to_string(*id) + " is not in the feed");

    std::optional<std::string> comment;
    const auto c_it = obj->find("comment");
    if (c_it != obj->end() && c_it->is_string() && !c_it->get<std::string>().empty())
        comment = c_it->get<std::string>();

    if (*action == ActionKind::Quote) {
        if (!comment) return fail("quote without a non-empty 'comment'");
        return {Decision::engage(target, ActionKind::Quote, std::move(comment)), std::nullopt};
    }
    return {Decision::engage(target, *action), std::nullopt};
}

// ---------------------------------------------------------------------------
// Policy specifications

// One scripted activation. Read means ReadAll; otherwise the post at
// `feed_position` is engaged (ReadAll if the feed is shorter).
struct ScriptStep {
    ActionKind action = ActionKind::Read;
    std::size_t feed_position = 0;
    std::string commentary;
};

struct ScriptedSpec {
    std::vector<ScriptStep> steps;  // consumed one per non-empty activation, then ReadAll
};

struct ParametricLogitSpec {
    Eigen::VectorXd threshold;   // 24 coefficients, design layout of stats::column_names
    Eigen::VectorXd allocation;  // 48: repost-vs-like equation, then quote-vs-like
    std::string commentary = "Adding my own take on this.";

    void validate() const {
        if (threshold.size() != static_cast<Eigen::Index>(stats::kFullColumns))
            throw ConfigError("threshold coefficients must have 24 entries");
        if (allocation.size() != static_cast<Eigen::Index>(2 * stats::kFullColumns))
            throw ConfigError("allocation coefficients must have 48 entries");
    }
};

struct LlmSpec {
    std::string base_url = "http://localhost:8000/v1";
    std::string model = "qwen3-8b";
    double temperature = 0.6;
    double timeout_seconds = 60.0;
    int max_retries = 3;
    std::string api_key;
};

using PolicySpec = std::variant<ScriptedSpec, ParametricLogitSpec, LlmSpec>;

// Default generating process for mock runs and recovery tests: engagement
// falls with load and rises with popularity; the norm regimes tilt the
// like/repost/quote split.
inline ParametricLogitSpec default_parametric_spec() {
    ParametricLogitSpec s;
    s.threshold.resize(24);
    s.threshold << -2.6, 0.8,               // intercept, pop
        -0.2, -0.4, -0.6,                   // load
        0.25, -0.3,                         // norm
        -0.05, -0.1, -0.15,                 // pop x load
        0.1, 0.2,                           // pop x norm
        0.0, 0.05, 0.1,                     // load x like
        -0.05, -0.1, -0.15,                 // load x repost
        0.0, -0.05, -0.1,                   // pop x load x like
        0.05, 0.1, 0.15;                    // pop x load x repost
    s.allocation.resize(48);
    s.allocation << -2.5, 0.2, 0.1, 0.15, 0.2, -0.6, 2.6,  // repost vs like
        0.0, 0.05, 0.1, 0.0, 0.1,
        0.0, 0.0, 0.0, 0.1, 0.2, 0.3,
        0.0, 0.0, 0.0, 0.0, 0.05, 0.1,
        -1.0, -0.3, -0.2, -0.3, -0.4, -0.8, -0.3,  // quote vs like
        0.05, 0.05, 0.1, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// Policies

class Policy {
public:
    virtual ~Policy() = default;
    virtual Decision decide(const DecisionContext& ctx, CounterRng& rng) = 0;

    const std::vector<std::string>& warnings() const { return warnings_; }

protected:
    void warn(std::string w) { warnings_.push_back(std::move(w)); }

private:
    std::vector<std::string> warnings_;
};

class ScriptedPolicy : public Policy {
public:
    explicit ScriptedPolicy(ScriptedSpec spec) : spec_(std::move(spec)) {}

    Decision decide(const DecisionContext& ctx, CounterRng&) override {
        if (ctx.feed.empty()) return Decision::read_all();
        if (next_ >= spec_.steps.size()) return Decision::read_all();
        const auto& s = spec_.steps[next_++];
        if (s.action == ActionKind::Read || s.feed_position >= ctx.feed.size()) return Decision::read_all();
        const auto target = ctx.feed.entries[s.feed_position].post;
        if (s.action == ActionKind::Quote)
            return Decision::engage(target, ActionKind::Quote, s.commentary.empty() ? "Quoting this." : s.commentary);
        return Decision::engage(target, s.action);
    }

private:
    ScriptedSpec spec_;
    std::size_t next_ = 0;
};

inline double logistic(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// Row-level generating model shared by the policy and by recovery tests.
class ParametricModel {
public:
    explicit ParametricModel(ParametricLogitSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    double threshold_eta(double composite, LoadLevel load, NormRegime norm) const {
        return stats::design_row(composite, load, norm).dot(spec_.threshold);
    }

    double engage_probability(double composite, LoadLevel load, NormRegime norm) const {
        return logistic(threshold_eta(composite, load, norm));
    }

    // (like, repost, quote) probabilities given engagement.
    std::array<double, 3> allocation_probabilities(double composite, LoadLevel load, NormRegime norm) const {
        const auto x = stats::design_row(composite, load, norm);
        const auto k = static_cast<Eigen::Index>(stats::kFullColumns);
        const double er = x.dot(spec_.allocation.segment(0, k));
        const double eq = x.dot(spec_.allocation.segment(k, k));
        const double m = std::max({0.0, er, eq});
        const double a = std::exp(-m), b = std::exp(er - m), c = std::exp(eq - m);
        const double s = a + b + c;
        return {a / s, b / s, c / s};
    }

    static ActionKind draw_allocation(const std::array<double, 3>& probs, double u) {
        if (u < probs[0]) return ActionKind::Like;
        if (u < probs[0] + probs[1]) return ActionKind::Repost;
        return ActionKind::Quote;
    }

    const ParametricLogitSpec& spec() const { return spec_; }

private:
    ParametricLogitSpec spec_;
};

// Each feed post passes the threshold independently via a latent logistic
// utility eta + logit(u) > 0; if several pass, the highest latent utility wins.
// The winner's action is then drawn from the allocation softmax.
class ParametricLogitPolicy : public Policy {
public:
    explicit ParametricLogitPolicy(ParametricLogitSpec spec) : model_(std::move(spec)) {}

    Decision decide(const DecisionContext& ctx, CounterRng& rng) override {
        std::optional<std::size_t> best;
        double best_utility = 0.0;
        for (std::size_t i = 0; i < ctx.feed.size(); ++i) {
            const auto& e = ctx.feed.entries[i];
            const double pop = popularity_composite(e.likes_at_exposure, e.reshares_at_exposure);
            const double eta = model_.threshold_eta(pop, ctx.load, ctx.regime);
            double u = rng.uniform();
            if (u <= 0.0) u = std::numeric_limits<double>::min();
            const double utility = eta + std::log(u / (1.0 - u));
            if (utility > 0.0 && (!best || utility > best_utility)) {
                best = i;
                best_utility = utility;
            }
        }
        if (!best) return Decision::read_all();
        const auto& e = ctx.feed.entries[*best];
        const double pop = popularity_composite(e.likes_at_exposure, e.reshares_at_exposure);
        const auto action =
            ParametricModel::draw_allocation(model_.allocation_probabilities(pop, ctx.load, ctx.regime), rng.uniform());
        if (action == ActionKind::Quote) return Decision::engage(e.post, action, model_.spec().commentary);
        return Decision::engage(e.post, action);
    }

    const ParametricModel& model() const { return model_; }

private:
    ParametricModel model_;
};

// Prompt -> transport (with retries) -> parse. Failures degrade to ReadAll.
class LlmPolicy : public Policy {
public:
    LlmPolicy(LlmSpec spec, Transport& transport) : spec_(std::move(spec)), transport_(transport) {}

    Decision decide(const DecisionContext& ctx, CounterRng&) override {
        if (ctx.feed.empty()) return Decision::read_all();
        const auto prompt = build_prompt(ctx);
        const ChatRequest req{spec_.model, spec_.temperature, prompt.system, prompt.user};
        TransportResult res;
        for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
            res = transport_.complete(req);
            if (res.ok()) break;
        }
        if (!res.ok()) {
            warn("t=" + std::to_string(ctx.now) + " agent " + std::to_string(ctx.profile.id.value) +
                 ": transport failed after retries: " + res.error);
            return Decision::read_all();
        }
        auto parsed = parse_response(*res.text, ctx.feed);
        if (parsed.warning)
            warn("t=" + std::to_string(ctx.now) + " agent " + std::to_string(ctx.profile.id.value) + ": " +
                 *parsed.warning);
        return parsed.decision;
    }

private:
    LlmSpec spec_;
    Transport& transport_;
};

// A fresh policy per run; `transport` is required for LlmSpec.
inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec, Transport* transport = nullptr) {
    if (const auto* s = std::get_if<ScriptedSpec>(&spec)) return std::make_unique<ScriptedPolicy>(*s);
    if (const auto* s = std::get_if<ParametricLogitSpec>(&spec)) return std::make_unique<ParametricLogitPolicy>(*s);
    const auto& llm = std::get<LlmSpec>(spec);
    if (!transport) throw ConfigError("LLM policy requires a transport");
    return std::make_unique<LlmPolicy>(llm, *transport);
}

}  // namespace socialsim

#endif  // SOCIALSIM_POLICY_HPP
