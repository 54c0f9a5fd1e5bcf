#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "personae/llm/backend.hpp"

namespace personae::llm {

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model = "gpt-3.5-turbo";
    int timeout_seconds = 60;
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};  // doubles per retry: 1s, 2s, 4s
};

/// Overlays PERSONAE_API_BASE, PERSONAE_API_KEY, PERSONAE_MODEL and
/// PERSONAE_TIMEOUT onto `base`.
inline HttpBackendConfig config_from_env(HttpBackendConfig base = {}) {
    if (const char* v = std::getenv("PERSONAE_API_BASE")) base.base_url = v;
    if (const char* v = std::getenv("PERSONAE_API_KEY")) base.api_key = v;
    if (const char* v = std::getenv("PERSONAE_MODEL")) base.model = v;
    if (const char* v = std::getenv("PERSONAE_TIMEOUT")) base.timeout_seconds = std::atoi(v);
    return base;
}

namespace detail {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

inline UrlParts split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_begin = url.find('/', host_begin);
    UrlParts parts;
    parts.origin = url.substr(0, path_begin);
    parts.path = path_begin == std::string::npos ? "" : url.substr(path_begin);
    while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
    return parts;
}

inline bool is_transient_status(int status) { return status == 429 || status >= 500; }

} // namespace detail

/// OpenAI-style chat-completions client. Retries transport failures and
/// HTTP 429/5xx with exponential backoff; other statuses fail immediately.
class HttpBackend final : public Backend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {})
        : config_(std::move(config)),
          sleeper_(sleeper ? std::move(sleeper)
                           : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {}

    const HttpBackendConfig& config() const { return config_; }

    static nlohmann::json request_body(const ChatRequest& req, const std::string& default_model) {
        nlohmann::json body;
        body["model"] = req.model.empty() ? default_model : req.model;
        body["messages"] = nlohmann::json::array();
        for (const auto& m : req.messages)
            body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
        body["temperature"] = req.temperature;
        body["max_tokens"] = req.max_tokens;
        if (!req.stop_markers.empty()) body["stop"] = req.stop_markers;
        return body;
    }

    static ChatResponse parse_response(const std::string& payload) {
        auto j = nlohmann::json::parse(payload, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
            throw BackendUnavailable("malformed chat completion payload");
        const auto& choice = j["choices"][0];
        ChatResponse r;
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string())
            r.content = choice["message"]["content"].get<std::string>();
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
            r.finish_reason = parse_finish_reason(choice["finish_reason"].get<std::string>());
        else
            r.finish_reason = FinishReason::other;
        if (j.contains("usage") && j["usage"].is_object()) {
            const auto& u = j["usage"];
            r.usage.prompt_tokens = u.value("prompt_tokens", 0);
            r.usage.completion_tokens = u.value("completion_tokens", 0);
            r.usage.total_tokens = u.value("total_tokens", 0);
        }
        return r;
    }

private:
    ChatResponse do_complete(const ChatRequest& request) override {
        const auto url = detail::split_url(config_.base_url);
        const std::string body = request_body(request, config_.model).dump();
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) sleeper_(config_.backoff_base * (1 << (attempt - 1)));

            httplib::Client client(url.origin);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            client.set_write_timeout(config_.timeout_seconds, 0);
            auto res = client.Post(url.path + "/chat/completions", headers, body, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 200) return parse_response(res->body);
            if (res->status == 401 || res->status == 403)
                throw AuthFailure("backend rejected credentials (HTTP " + std::to_string(res->status) + ")");
            if (!detail::is_transient_status(res->status))
                throw InvalidRequest("backend rejected request (HTTP " + std::to_string(res->status) +
                                     "): " + res->body);
            last_error = "HTTP " + std::to_string(res->status);
        }
        throw BackendUnavailable("retries exhausted: " + last_error);
    }

    HttpBackendConfig config_;
    Sleeper sleeper_;
};

} // namespace personae::llm
