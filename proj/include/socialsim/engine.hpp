#ifndef SOCIALSIM_ENGINE_HPP
#define SOCIALSIM_ENGINE_HPP

#include <string>
#include <vector>

#include "core.hpp"
#include "event_log.hpp"
#include "policy.hpp"
#include "population.hpp"
#include "recommender.hpp"
#include "rng.hpp"
#include "world.hpp"

namespace socialsim {

struct ActivationStat {
    Timestep timestep = 0;
    AgentId agent;
    std::size_t feed_size = 0;
    std::size_t algorithmic = 0;
};

struct RunResult {
    EventLog log;
    std::vector<ActivationStat> activations;
    std::vector<std::string> warnings;
    std::vector<PopularityCounters> final_counters;  // indexed by PostId
};

// Seeds enter at t=0, assigned round-robin over influencers in ascending id.
inline WorldState initialize(const Population& population, const SeedCorpus& corpus, const RunConfig& config,
                             EventLog* log = nullptr) {
    const auto influencers = population.influencers();
    if (influencers.size() != config.expected_influencers)
        throw ConfigError("expected " + std::to_string(config.expected_influencers) + " influencers, found " +
                          std::to_string(influencers.size()));
    if (corpus.bodies.size() != config.expected_seed_posts)
        throw ConfigError("expected " + std::to_string(config.expected_seed_posts) + " seed posts, found " +
                          std::to_string(corpus.bodies.size()));
    if (population.graph.size() != population.profiles.size())
        throw ConfigError("follow graph and profile list disagree on population size");

    WorldState world(population, config.history_window);
    for (std::size_t i = 0; i < corpus.bodies.size(); ++i) {
        Post p;
        p.id = world.next_post_id();
        p.author = influencers[i % influencers.size()];
        p.content = corpus.bodies[i];
        p.kind = PostKind::Seed;
        p.created_at = 0;
        const auto& added = world.add_post(std::move(p));
        if (log) log->append(PostCreatedRecord{config.run, 0, added.id, PostKind::Seed, std::nullopt, added.author});
    }
    return world;
}

// Applies one decision: exposure rows for the whole feed, counter update on the
// target, and a new post for reposts and quotes.
inline void apply_decision(WorldState& world, AgentId agent, const Feed& feed, const Decision& decision,
                           const RunConfig& config, Timestep t, EventLog& log) {
    for (const auto& e : feed.entries) {
        ExposureRecord r;
        r.run = config.run;
        r.condition = config.condition;
        r.timestep = t;
        r.agent = agent;
        r.post = e.post;
        r.likes_at_exposure = e.likes_at_exposure;
        r.reshares_at_exposure = e.reshares_at_exposure;
        r.action = (decision.engagement && decision.engagement->target == e.post) ? decision.engagement->action
                                                                                 : ActionKind::Read;
        r.source = e.source;
        log.append(r);
    }
    if (decision.is_read_all()) return;

    const auto& eng = *decision.engagement;
    auto& counters = world.counters(eng.target);
    switch (eng.action) {
        case ActionKind::Like: ++counters.likes; break;
        case ActionKind::Repost: ++counters.reposts; break;
        case ActionKind::Quote: ++counters.quotes; break;
        case ActionKind::Read: break;
    }
    world.record_interaction(agent, Interaction{eng.action, eng.target, t});

    if (eng.action == ActionKind::Repost || eng.action == ActionKind::Quote) {
        const auto& source = world.post(eng.target);
        Post p;
        p.id = world.next_post_id();
        p.author = agent;
        p.kind = eng.action == ActionKind::Repost ? PostKind::Repost : PostKind::Quote;
        p.content = p.kind == PostKind::Repost ? source.content : quote_content(eng.commentary.value_or(""), source.content);
        p.source_link = eng.target;
        p.created_at = t;
        const auto& added = world.add_post(std::move(p));
        log.append(PostCreatedRecord{config.run, t, added.id, added.kind, added.source_link, agent});
    }
}

// Streams: activation and decision draws are keyed by (timestep, agent), so
// they do not depend on how many draws any other activation consumed.
inline CounterRng activation_stream(const CounterRng& root, Timestep t, AgentId a) {
    return root.split({static_cast<std::uint64_t>(StreamLabel::Activation), static_cast<std::uint64_t>(t), a.value});
}

inline CounterRng decision_stream(const CounterRng& root, Timestep t, AgentId a) {
    return root.split({static_cast<std::uint64_t>(StreamLabel::Decision), static_cast<std::uint64_t>(t), a.value});
}

// Agents activated at t, ascending id.
inline std::vector<AgentId> activated_agents(const CounterRng& root, Timestep t, std::size_t n_agents, double p) {
    std::vector<AgentId> out;
    for (std::size_t i = 0; i < n_agents; ++i) {
        auto s = activation_stream(root, t, AgentId{i});
        if (s.bernoulli(p)) out.emplace_back(i);
    }
    return out;
}

// One timestep. Activated agents act sequentially in ascending id and see the
// updates of earlier agents in the same timestep.
inline void step(WorldState& world, Timestep t, const RunConfig& config, Policy& policy, const CounterRng& root,
                 EventLog& log, std::vector<ActivationStat>* stats = nullptr) {
    const auto n = world.population().profiles.size();
    for (auto agent : activated_agents(root, t, n, config.activation_p)) {
        auto feed = select_feed(agent, world, config.condition.load, t, config.weights, config.recency_decay);
        if (stats) stats->push_back({t, agent, feed.size(), realized_algorithmic_count(feed)});
        if (feed.empty()) continue;
        auto ctx = make_context(world, agent, feed, config.condition, t);
        auto rng = decision_stream(root, t, agent);
        auto decision = policy.decide(ctx, rng);
        if (!is_valid_decision(decision, feed)) decision = Decision::read_all();
        apply_decision(world, agent, feed, decision, config, t, log);
    }
}

inline RunResult run(const RunConfig& config, Policy& policy, const Population& population, const SeedCorpus& corpus) {
    config.validate();
    if (population.profiles.size() != config.n_agents)
        throw ConfigError("config expects " + std::to_string(config.n_agents) + " agents, population has " +
                          std::to_string(population.profiles.size()));
    RunResult res;
    auto world = initialize(population, corpus, config, &res.log);
    const CounterRng root(config.seed);
    for (Timestep t = 0; t < config.timesteps; ++t) step(world, t, config, policy, root, res.log, &res.activations);
    res.warnings = policy.warnings();
    res.final_counters.reserve(world.post_count());
    for (const auto& p : world.posts()) res.final_counters.push_back(p.counters);
    return res;
}

inline RunResult run(const RunConfig& config, const PolicySpec& spec, const Population& population,
                     const SeedCorpus& corpus, Transport* transport = nullptr) {
    auto policy = make_policy(spec, transport);
    return run(config, *policy, population, corpus);
}

}  // namespace socialsim

#endif  // SOCIALSIM_ENGINE_HPP
