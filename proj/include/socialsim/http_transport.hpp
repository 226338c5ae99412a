#ifndef SOCIALSIM_HTTP_TRANSPORT_HPP
#define SOCIALSIM_HTTP_TRANSPORT_HPP

// Live transport for OpenAI-compatible chat-completions servers. Kept out of
// the other headers so only programs that talk to a server pull in httplib.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <cstdlib>
#include <string>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "transport.hpp"

namespace socialsim {

inline constexpr const char* kApiKeyEnv = "SOCIALSIM_LLM_API_KEY";

inline std::string api_key_from_env() {
    const char* v = std::getenv(kApiKeyEnv);
    return v ? std::string(v) : std::string();
}

// Splits "scheme://host[:port]/path" into ("scheme://host[:port]", "/path").
inline std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || scheme == 0) throw ConfigError("base URL needs a scheme: '" + url + "'");
    const auto path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, ""};
    std::string p = url.substr(path);
    while (!p.empty() && p.back() == '/') p.pop_back();
    return {url.substr(0, path), p};
}

class HttpTransport : public Transport {
public:
    HttpTransport(const std::string& base_url, std::string api_key, double timeout_seconds)
        : api_key_(std::move(api_key)) {
        auto [origin, path] = split_base_url(base_url);
        path_ = path + "/chat/completions";
        client_ = std::make_unique<httplib::Client>(origin);
        const auto secs = static_cast<time_t>(timeout_seconds);
        const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
        client_->set_connection_timeout(secs, usecs);
        client_->set_read_timeout(secs, usecs);
        client_->set_write_timeout(secs, usecs);
    }

    TransportResult complete(const ChatRequest& request) override {
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        auto res = client_->Post(path_, headers, request.body().dump(), "application/json");
        if (!res) return TransportResult::failure("HTTP error: " + httplib::to_string(res.error()));
        if (res->status != 200) return TransportResult::failure("HTTP status " + std::to_string(res->status));
        try {
            const auto j = nlohmann::json::parse(res->body);
            return TransportResult::success(j.at("choices").at(0).at("message").at("content").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            return TransportResult::failure(std::string("malformed completion body: ") + e.what());
        }
    }

private:
    std::string api_key_;
    std::string path_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace socialsim

#endif  // SOCIALSIM_HTTP_TRANSPORT_HPP
