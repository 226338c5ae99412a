#ifndef SOCIALSIM_TESTS_SUPPORT_HPP
#define SOCIALSIM_TESTS_SUPPORT_HPP

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "socialsim/core.hpp"
#include "socialsim/engine.hpp"
#include "socialsim/population.hpp"

namespace socialsim::testing {

inline std::string data_path(const std::string& name) { return std::string(SOCIALSIM_TEST_DATA) + "/" + name; }

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::path(SOCIALSIM_TEST_SCRATCH) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

// Five agents; agent 0 is the only influencer and posts the only seed.
// Agents 1-4 follow 0, agent 0 follows 1. Interest keywords never occur in
// any content, so ranking reduces to recency with ties on ascending id.
struct TinyWorld {
    Population population;
    SeedCorpus corpus;
    RunConfig config;
    ScriptedSpec script;
};

inline TinyWorld tiny_world() {
    TinyWorld w;
    w.population.graph = FollowGraph(5);
    for (std::size_t i = 0; i < 5; ++i)
        w.population.profiles.push_back({AgentId{i}, "user_" + std::to_string(i), {"zeta"}, i == 0, i == 0});
    for (std::size_t i = 1; i < 5; ++i) w.population.graph.add_edge(AgentId{i}, AgentId{0});
    w.population.graph.add_edge(AgentId{0}, AgentId{1});
    w.corpus.bodies = {"alpha beta gamma"};
    w.config.n_agents = 5;
    w.config.timesteps = 10;
    w.config.activation_p = 0.999999;
    w.config.seed = 11;
    w.config.expected_influencers = 1;
    w.config.expected_seed_posts = 1;
    // One step per non-empty activation, in activation order.
    w.script.steps = {
        {ActionKind::Like, 0, ""},      // t0 a1
        {ActionKind::Read, 0, ""},      // t0 a2
        {ActionKind::Repost, 0, ""},    // t0 a3
        {ActionKind::Read, 0, ""},      // t0 a4
        {ActionKind::Quote, 0, "Nice."},  // t1 a0
        {ActionKind::Read, 0, ""},      // t1 a1
        {ActionKind::Read, 0, ""},      // t1 a2
    };
    return w;
}

// A generated world of n agents with its own config.
struct SmallWorld {
    Population population;
    SeedCorpus corpus;
    RunConfig config;
};

inline SmallWorld small_world(std::size_t n, std::uint64_t seed, Timestep timesteps, double p) {
    SmallWorld w{generate_population(n, seed), generate_seed_corpus(seed), {}};
    w.config.n_agents = n;
    w.config.timesteps = timesteps;
    w.config.activation_p = p;
    w.config.seed = seed;
    return w;
}

}  // namespace socialsim::testing

#endif  // SOCIALSIM_TESTS_SUPPORT_HPP
