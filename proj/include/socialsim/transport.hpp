#ifndef SOCIALSIM_TRANSPORT_HPP
#define SOCIALSIM_TRANSPORT_HPP

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "digest.hpp"
#include "io.hpp"

namespace socialsim {

struct ChatRequest {
    std::string model;
    double temperature = 0.6;
    std::string system;
    std::string user;

    // OpenAI-compatible request body; keys in fixed order.
    nlohmann::ordered_json body() const {
        nlohmann::ordered_json j;
        j["model"] = model;
        j["temperature"] = temperature;
        j["messages"] = nlohmann::ordered_json::array(
            {nlohmann::ordered_json{{"role", "system"}, {"content", system}},
             nlohmann::ordered_json{{"role", "user"}, {"content", user}}});
        return j;
    }

    // Fixture key: SHA-256 of the serialized body.
    std::string hash() const { return sha256_hex(body().dump()); }
};

struct TransportResult {
    std::optional<std::string> text;
    std::string error;

    bool ok() const { return text.has_value(); }
    static TransportResult success(std::string t) { return {std::move(t), {}}; }
    static TransportResult failure(std::string e) { return {std::nullopt, std::move(e)}; }
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResult complete(const ChatRequest& request) = 0;
};

// Replays recorded model outputs keyed by request hash; misses are failures.
class FixtureTransport : public Transport {
public:
    FixtureTransport() = default;
    explicit FixtureTransport(std::map<std::string, std::string> responses) : responses_(std::move(responses)) {}

    static FixtureTransport from_jsonl(const std::string& text, const std::string& source = "<fixtures>") {
        std::map<std::string, std::string> m;
        detail::for_each_jsonl_line(source, text, [&](const nlohmann::json& j, std::size_t) {
            m[j.at("request_hash").get<std::string>()] = j.at("response_text").get<std::string>();
        });
        return FixtureTransport(std::move(m));
    }

    static FixtureTransport load(const std::string& path) { return from_jsonl(read_text_file(path), path); }

    TransportResult complete(const ChatRequest& request) override {
        auto it = responses_.find(request.hash());
        if (it == responses_.end()) return TransportResult::failure("no fixture for request " + request.hash());
        return TransportResult::success(it->second);
    }

    std::size_t size() const { return responses_.size(); }

private:
    std::map<std::string, std::string> responses_;
};

// Forwards to an inner transport and keeps every successful exchange.
class RecordingTransport : public Transport {
public:
    explicit RecordingTransport(Transport& inner) : inner_(inner) {}

    TransportResult complete(const ChatRequest& request) override {
        auto res = inner_.complete(request);
        if (res.ok()) {
            std::lock_guard lock(mu_);
            recorded_[request.hash()] = *res.text;
        }
        return res;
    }

    std::string to_jsonl() const {
        std::lock_guard lock(mu_);
        std::string out;
        for (const auto& [h, text] : recorded_) {
            nlohmann::ordered_json j;
            j["request_hash"] = h;
            j["response_text"] = text;
            out += j.dump() + "\n";
        }
        return out;
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return recorded_.size();
    }

private:
    Transport& inner_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> recorded_;
};

// Adapts a callable; used for offline responders in tests and the CLI.
class FunctionTransport : public Transport {
public:
    explicit FunctionTransport(std::function<TransportResult(const ChatRequest&)> fn) : fn_(std::move(fn)) {}
    TransportResult complete(const ChatRequest& request) override { return fn_(request); }

private:
    std::function<TransportResult(const ChatRequest&)> fn_;
};


// Offline stand-in for a model: a deterministic function of the request that
// reads most of the time and otherwise engages a post listed in the prompt.
inline TransportResult mock_completion(const ChatRequest& request) {
    std::vector<std::string> ids;
    const std::string marker = "[post_id=";
    for (auto pos = request.user.find(marker); pos != std::string::npos; pos = request.user.find(marker, pos + 1)) {
        const auto b = pos + marker.size();
        const auto e = request.user.find(']', b);
        if (e != std::string::npos) ids.push_back(request.user.substr(b, e - b));
    }
    const auto h = std::stoull(request.hash().substr(0, 15), nullptr, 16);
    if (ids.empty() || h % 10 < 7) return TransportResult::success("{\"action\": \"read\"}");
    const auto& id = ids[(h / 10) % ids.size()];
    switch (h % 10) {
        case 7: return TransportResult::success("{\"action\": \"like\", \"post_id\": " + id + "}");
        case 8: return TransportResult::success("{\"action\": \"repost\", \"post_id\": " + id + "}");
        default:
            return TransportResult::success("{\"action\": \"quote\", \"post_id\": " + id +
                                            ", \"comment\": \"Worth a look.\"}");
    }
}

}  // namespace socialsim

#endif  // SOCIALSIM_TRANSPORT_HPP
