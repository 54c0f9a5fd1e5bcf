#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "personae/error.hpp"
#include "personae/util/text.hpp"

namespace personae::llm {

enum class Role { system, user, assistant };

NLOHMANN_JSON_SERIALIZE_ENUM(Role, {{Role::system, "system"},
                                    {Role::user, "user"},
                                    {Role::assistant, "assistant"}})

inline std::string_view to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ChatMessage, role, content)

// Sampling defaults. The creative dialog of a scenario wants some variety;
// verdict, segmentation and rewrite calls should be reproducible.
inline constexpr double kScenarioTemperature = 0.7;
inline constexpr double kClassificationTemperature = 0.0;

struct ChatRequest {
    std::string model;  // empty: backend default
    std::vector<ChatMessage> messages;
    double temperature = kClassificationTemperature;
    int max_tokens = 1024;
    std::vector<std::string> stop_markers;

    /// Concatenated content of every message, the text mock matchers test.
    std::string joined_content() const {
        std::string all;
        for (const auto& m : messages) {
            if (!all.empty()) all += '\n';
            all += m.content;
        }
        return all;
    }
};

inline void validate(const ChatRequest& req) {
    if (req.messages.empty()) throw InvalidRequest("chat request has no messages");
    if (!(req.temperature >= 0.0 && req.temperature <= 2.0))
        throw InvalidRequest("temperature must lie in [0, 2]");
    if (req.max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");
    for (const auto& m : req.messages) {
        if (m.role != Role::system && text::is_blank(m.content))
            throw InvalidRequest(std::string(to_string(m.role)) + " message has empty content");
    }
}

enum class FinishReason { stop, length, other };

NLOHMANN_JSON_SERIALIZE_ENUM(FinishReason, {{FinishReason::other, "other"},
                                            {FinishReason::stop, "stop"},
                                            {FinishReason::length, "length"}})

inline FinishReason parse_finish_reason(std::string_view s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    return FinishReason::other;
}

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t total_tokens = 0;

    friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TokenUsage, prompt_tokens, completion_tokens, total_tokens)

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::stop;
    TokenUsage usage;

    // A truncated completion can be resumed with a continuation request.
    bool may_continue() const { return finish_reason == FinishReason::length; }

    friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ChatResponse, content, finish_reason, usage)

inline ChatRequest make_request(std::string prompt, double temperature,
                                std::string model = {}) {
    ChatRequest req;
    req.model = std::move(model);
    req.temperature = temperature;
    req.messages.push_back({Role::user, std::move(prompt)});
    return req;
}

} // namespace personae::llm
