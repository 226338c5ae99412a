#ifndef SOCIALSIM_WORLD_HPP
#define SOCIALSIM_WORLD_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "core.hpp"
#include "population.hpp"
#include "text.hpp"

namespace socialsim {

// Interns topic tokens so relevance scoring works on sorted integer sets.
class TokenTable {
public:
    std::uint32_t intern(const std::string& tok) {
        auto [it, inserted] = ids_.try_emplace(tok, static_cast<std::uint32_t>(ids_.size()));
        return it->second;
    }

    std::vector<std::uint32_t> intern_all(const std::vector<std::string>& toks) {
        std::vector<std::uint32_t> out;
        out.reserve(toks.size());
        for (const auto& t : toks) out.push_back(intern(t));
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    std::unordered_map<std::string, std::uint32_t> ids_;
};

using TokenSet = std::vector<std::uint32_t>;  // sorted, unique

// Jaccard via binary search of the (small) keyword set in the (large) post set.
inline double jaccard_ids(const TokenSet& keywords, const TokenSet& content) {
    if (keywords.empty() && content.empty()) return 0.0;
    std::size_t inter = 0;
    for (auto k : keywords)
        if (std::binary_search(content.begin(), content.end(), k)) ++inter;
    const std::size_t uni = keywords.size() + content.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct Interaction {
    ActionKind action = ActionKind::Read;
    PostId post;
    Timestep timestep = 0;

    friend bool operator==(const Interaction&, const Interaction&) = default;
};

// Mutable simulation state for one run. Mutated only by the engine.
class WorldState {
public:
    WorldState() = default;
    WorldState(const Population& pop, std::size_t history_window)
        : population_(&pop), history_window_(history_window),
          engaged_(pop.profiles.size()), history_(pop.profiles.size()) {
        keyword_sets_.reserve(pop.profiles.size());
        for (const auto& p : pop.profiles) keyword_sets_.push_back(tokens_.intern_all(p.interest_keywords));
    }

    const Population& population() const { return *population_; }
    const std::vector<Post>& posts() const { return posts_; }
    const Post& post(PostId id) const { return posts_.at(id.value); }
    std::size_t post_count() const { return posts_.size(); }

    const TokenSet& post_tokens(PostId id) const { return *post_tokens_.at(id.value); }
    const TokenSet& keyword_tokens(AgentId a) const { return keyword_sets_.at(a.value); }

    bool has_engaged(AgentId a, PostId p) const { return engaged_.at(a.value).contains(p); }

    const std::deque<Interaction>& recent_history(AgentId a) const { return history_.at(a.value); }

    PostId next_post_id() const { return PostId{posts_.size()}; }

    // Appends a post; its id must equal next_post_id().
    const Post& add_post(Post p) {
        if (p.id != next_post_id()) throw std::logic_error("post ids must be allocated in order");
        if (p.kind == PostKind::Seed) {
            post_tokens_.push_back(std::make_shared<TokenSet>(tokens_.intern_all(topic_tokens(p.content))));
        } else {
            if (!p.source_link || p.source_link->value >= posts_.size())
                throw std::logic_error("repost/quote must link an existing earlier post");
            if (p.kind == PostKind::Repost) post_tokens_.push_back(post_tokens_[p.source_link->value]);
            else post_tokens_.push_back(std::make_shared<TokenSet>(tokens_.intern_all(topic_tokens(p.content))));
        }
        posts_.push_back(std::move(p));
        return posts_.back();
    }

    PopularityCounters& counters(PostId id) { return posts_.at(id.value).counters; }

    void record_interaction(AgentId a, Interaction it) {
        if (is_engagement(it.action)) engaged_.at(a.value).insert(it.post);
        auto& h = history_.at(a.value);
        h.push_back(it);
        while (h.size() > history_window_) h.pop_front();
    }

private:
    const Population* population_ = nullptr;
    std::size_t history_window_ = 8;
    std::vector<Post> posts_;
    std::vector<std::shared_ptr<const TokenSet>> post_tokens_;
    TokenTable tokens_;
    std::vector<TokenSet> keyword_sets_;
    std::vector<std::unordered_set<PostId>> engaged_;
    std::vector<std::deque<Interaction>> history_;
};

}  // namespace socialsim

#endif  // SOCIALSIM_WORLD_HPP
