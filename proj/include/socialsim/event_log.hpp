#ifndef SOCIALSIM_EVENT_LOG_HPP
#define SOCIALSIM_EVENT_LOG_HPP

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "digest.hpp"
#include "io.hpp"

namespace socialsim {

using LogEntry = std::variant<ExposureRecord, PostCreatedRecord>;

// Append-only, ordered by (timestep, agent, feed position); post-creation
// records follow the exposures of the activation that produced them.
class EventLog {
public:
    void append(LogEntry e) { entries_.push_back(std::move(e)); }

    const std::vector<LogEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    std::vector<ExposureRecord> exposures() const {
        std::vector<ExposureRecord> out;
        for (const auto& e : entries_)
            if (const auto* r = std::get_if<ExposureRecord>(&e)) out.push_back(*r);
        return out;
    }

    std::vector<PostCreatedRecord> creations() const {
        std::vector<PostCreatedRecord> out;
        for (const auto& e : entries_)
            if (const auto* r = std::get_if<PostCreatedRecord>(&e)) out.push_back(*r);
        return out;
    }

    friend bool operator==(const EventLog&, const EventLog&) = default;

private:
    std::vector<LogEntry> entries_;
};

// ---------------------------------------------------------------------------
// JSON Lines format
//
// exposure: {"run","load","norm","t","agent","post","likes","reshares","action","feed"}
// creation: {"kind","run","t","post","author","source"}   (source null for seeds)

inline std::string to_json_line(const ExposureRecord& r) {
    nlohmann::ordered_json j;
    j["run"] = r.run.value;
    j["load"] = to_string(r.condition.load.level);
    j["norm"] = to_string(r.condition.norm);
    j["t"] = r.timestep;
    j["agent"] = r.agent.value;
    j["post"] = r.post.value;
    j["likes"] = r.likes_at_exposure;
    j["reshares"] = r.reshares_at_exposure;
    j["action"] = to_string(r.action);
    j["feed"] = to_string(r.source);
    return j.dump();
}

inline std::string to_json_line(const PostCreatedRecord& r) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(r.kind);
    j["run"] = r.run.value;
    j["t"] = r.timestep;
    j["post"] = r.post.value;
    j["author"] = r.author.value;
    if (r.source_link) j["source"] = r.source_link->value;
    else j["source"] = nullptr;
    return j.dump();
}

inline std::string to_jsonl(const EventLog& log) {
    std::string out;
    for (const auto& e : log.entries()) {
        std::visit([&](const auto& r) { out += to_json_line(r); }, e);
        out += '\n';
    }
    return out;
}

inline std::string log_digest(const EventLog& log) { return sha256_hex(to_jsonl(log)); }

inline EventLog parse_event_log(const std::string& text, const std::string& source = "<log>") {
    EventLog log;
    detail::for_each_jsonl_line(source, text, [&](const nlohmann::json& j, std::size_t lineno) {
        auto bad = [&](const std::string& what) {
            return ParseError(source + ":" + std::to_string(lineno) + ": " + what);
        };
        if (j.contains("kind")) {
            PostCreatedRecord r;
            const auto kind = parse_post_kind(j.at("kind").get<std::string>());
            if (!kind) throw bad("unknown post kind");
            r.kind = *kind;
            r.run = RunId{j.at("run").get<std::uint64_t>()};
            r.timestep = j.at("t").get<Timestep>();
            r.post = PostId{j.at("post").get<std::uint64_t>()};
            r.author = AgentId{j.at("author").get<std::uint64_t>()};
            if (!j.at("source").is_null()) r.source_link = PostId{j.at("source").get<std::uint64_t>()};
            log.append(r);
            return;
        }
        ExposureRecord r;
        r.run = RunId{j.at("run").get<std::uint64_t>()};
        const auto load = parse_load(j.at("load").get<std::string>());
        const auto norm = parse_norm(j.at("norm").get<std::string>());
        const auto action = parse_action(j.at("action").get<std::string>());
        if (!load || !norm || !action) throw bad("unknown load, norm or action value");
        r.condition = Condition{LoadCondition{*load}, *norm};
        r.timestep = j.at("t").get<Timestep>();
        r.agent = AgentId{j.at("agent").get<std::uint64_t>()};
        r.post = PostId{j.at("post").get<std::uint64_t>()};
        r.likes_at_exposure = j.at("likes").get<std::uint64_t>();
        r.reshares_at_exposure = j.at("reshares").get<std::uint64_t>();
        r.action = *action;
        r.source = j.value("feed", std::string("algorithmic")) == "followed" ? FeedSource::Followed
                                                                           : FeedSource::Algorithmic;
        log.append(r);
    });
    return log;
}

inline EventLog load_event_log(const std::string& path) { return parse_event_log(read_text_file(path), path); }

}  // namespace socialsim

#endif  // SOCIALSIM_EVENT_LOG_HPP
