#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "personae/llm/backend.hpp"
#include "personae/util/files.hpp"

namespace personae::llm {

/// One scripted reply. A missing matcher is a wildcard; otherwise the entry
/// may only answer requests whose joined content contains the matcher text.
struct ScriptEntry {
    std::optional<std::string> matcher;
    std::string response;
    FinishReason finish_reason = FinishReason::stop;
};

/// Deterministic replay backend for offline runs. Each complete() consumes
/// the first unconsumed entry whose matcher accepts the request.
class MockBackend final : public Backend {
public:
    explicit MockBackend(std::vector<ScriptEntry> entries)
        : entries_(std::move(entries)), consumed_(entries_.size(), false) {}

    std::size_t remaining() const {
        std::lock_guard lock(mu_);
        std::size_t n = 0;
        for (bool c : consumed_) n += c ? 0 : 1;
        return n;
    }

    std::vector<ChatRequest> calls() const {
        std::lock_guard lock(mu_);
        return calls_;
    }

    std::size_t call_count() const {
        std::lock_guard lock(mu_);
        return calls_.size();
    }

private:
    ChatResponse do_complete(const ChatRequest& request) override {
        std::lock_guard lock(mu_);
        calls_.push_back(request);
        const std::string content = request.joined_content();
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (consumed_[i]) continue;
            const auto& e = entries_[i];
            if (e.matcher && content.find(*e.matcher) == std::string::npos) continue;
            consumed_[i] = true;
            ChatResponse r;
            r.content = e.response;
            r.finish_reason = e.finish_reason;
            r.usage.completion_tokens = static_cast<std::int64_t>(text::tokenize(e.response).size());
            r.usage.prompt_tokens = static_cast<std::int64_t>(text::tokenize(content).size());
            r.usage.total_tokens = r.usage.prompt_tokens + r.usage.completion_tokens;
            return r;
        }
        throw ScriptExhausted("mock script has no unconsumed entry matching the request");
    }

    std::vector<ScriptEntry> entries_;
    std::vector<bool> consumed_;
    std::vector<ChatRequest> calls_;
    mutable std::mutex mu_;
};

inline BackendHandle script_mock(std::vector<ScriptEntry> entries) {
    return std::make_shared<MockBackend>(std::move(entries));
}

inline ScriptEntry script_entry_from_json(const nlohmann::json& j) {
    ScriptEntry e;
    if (j.contains("match") && !j["match"].is_null()) {
        auto m = j["match"].get<std::string>();
        if (m != "*") e.matcher = std::move(m);
    }
    e.response = j.at("response").get<std::string>();
    e.finish_reason = parse_finish_reason(j.value("finish_reason", std::string("stop")));
    return e;
}

/// Parses a mock script: either a JSON array of entries or one JSON object
/// per line, each {"match": text|"*", "response": text, "finish_reason": ...}.
inline std::vector<ScriptEntry> parse_script(std::string_view contents) {
    std::vector<ScriptEntry> entries;
    auto body = text::trim(contents);
    if (!body.empty() && body.front() == '[') {
        for (const auto& j : nlohmann::json::parse(body)) entries.push_back(script_entry_from_json(j));
        return entries;
    }
    for (const auto& line : text::split_lines(contents)) {
        if (text::is_blank(line) || text::trim(line).front() == '#') continue;
        entries.push_back(script_entry_from_json(nlohmann::json::parse(line)));
    }
    return entries;
}

inline BackendHandle load_mock(const std::filesystem::path& path) {
    try {
        return script_mock(parse_script(files::read_all(path)));
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError("malformed mock script " + path.string() + ": " + e.what());
    }
}

} // namespace personae::llm
