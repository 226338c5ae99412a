#ifndef SOCIALSIM_RECOMMENDER_HPP
#define SOCIALSIM_RECOMMENDER_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "core.hpp"
#include "population.hpp"
#include "text.hpp"
#include "world.hpp"

namespace socialsim {

struct FeedEntry {
    PostId post;
    std::uint64_t likes_at_exposure = 0;
    std::uint64_t reshares_at_exposure = 0;
    FeedSource source = FeedSource::Algorithmic;

    friend bool operator==(const FeedEntry&, const FeedEntry&) = default;
};

// Ordered: followed entries first, then algorithmic, each by descending score.
struct Feed {
    std::vector<FeedEntry> entries;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }

    bool contains(PostId id) const {
        return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.post == id; });
    }
    const FeedEntry* find(PostId id) const {
        for (const auto& e : entries)
            if (e.post == id) return &e;
        return nullptr;
    }
};

inline double recency_score(Timestep now, Timestep created_at, double decay) {
    return std::exp(-decay * static_cast<double>(now - created_at));
}

// w_rec * exp(-decay * age) + w_rel * jaccard(content tokens, interest keywords).
inline double score_post(const Post& post, const AgentProfile& agent, Timestep now,
                         const RankingWeights& w, double decay) {
    return w.recency * recency_score(now, post.created_at, decay) +
           w.relevance * jaccard(topic_tokens(post.content), agent.interest_keywords);
}

namespace detail {

struct Scored {
    double score;
    PostId id;
};

// Higher score first; equal scores resolve to the smaller PostId.
inline bool ranks_before(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

inline void take_top(std::vector<Scored>& pool, std::size_t k) {
    k = std::min(k, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(), ranks_before);
    pool.resize(k);
}

}  // namespace detail

// Up to three best-scoring eligible posts by followees, then the best remaining
// eligible posts up to the algorithmic quota. A followed shortfall is added to
// the algorithmic quota. Eligible: not the agent's own post and not already
// engaged (non-read) by the agent. Counter snapshots are taken here.
inline Feed select_feed(AgentId agent, const WorldState& world, LoadCondition load, Timestep now,
                        const RankingWeights& w, double decay) {
    const auto& followees = world.population().graph.followees(agent);
    const auto& keywords = world.keyword_tokens(agent);

    std::vector<detail::Scored> followed, others;
    for (const auto& p : world.posts()) {
        if (p.author == agent || world.has_engaged(agent, p.id)) continue;
        const double s = w.recency * recency_score(now, p.created_at, decay) +
                         w.relevance * jaccard_ids(keywords, world.post_tokens(p.id));
        if (std::binary_search(followees.begin(), followees.end(), p.author)) followed.push_back({s, p.id});
        else others.push_back({s, p.id});
    }

    // Followed posts that miss the top three stay in the algorithmic pool.
    std::sort(followed.begin(), followed.end(), detail::ranks_before);
    const std::size_t n_followed = std::min(LoadCondition::followed_count, followed.size());
    others.insert(others.end(), followed.begin() + static_cast<std::ptrdiff_t>(n_followed), followed.end());
    followed.resize(n_followed);

    const std::size_t quota = load.algorithmic_count() + (LoadCondition::followed_count - n_followed);
    detail::take_top(others, quota);

    Feed feed;
    feed.entries.reserve(followed.size() + others.size());
    auto push = [&](const detail::Scored& s, FeedSource src) {
        const auto& c = world.post(s.id).counters;
        feed.entries.push_back({s.id, c.likes, reshares(c), src});
    };
    for (const auto& s : followed) push(s, FeedSource::Followed);
    for (const auto& s : others) push(s, FeedSource::Algorithmic);
    return feed;
}

inline std::size_t realized_algorithmic_count(const Feed& feed) {
    return static_cast<std::size_t>(std::count_if(feed.entries.begin(), feed.entries.end(),
                                                  [](const auto& e) { return e.source == FeedSource::Algorithmic; }));
}

}  // namespace socialsim

#endif  // SOCIALSIM_RECOMMENDER_HPP
