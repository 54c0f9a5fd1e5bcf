#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "personae/llm/http_backend.hpp"
#include "personae/llm/mock_backend.hpp"

using namespace personae;
using namespace personae::llm;

namespace {

ChatRequest ask(const std::string& text) { return make_request(text, kClassificationTemperature); }

ScriptEntry entry(std::string response, std::optional<std::string> matcher = std::nullopt,
                  FinishReason reason = FinishReason::stop) {
    return {std::move(matcher), std::move(response), reason};
}

} // namespace

TEST(ChatRequest, Validation) {
    ChatRequest empty;
    EXPECT_THROW(validate(empty), InvalidRequest);

    auto hot = ask("hi");
    hot.temperature = 2.5;
    EXPECT_THROW(validate(hot), InvalidRequest);
    hot.temperature = -0.1;
    EXPECT_THROW(validate(hot), InvalidRequest);

    auto zero_tokens = ask("hi");
    zero_tokens.max_tokens = 0;
    EXPECT_THROW(validate(zero_tokens), InvalidRequest);

    EXPECT_THROW(validate(ask("   ")), InvalidRequest);

    ChatRequest with_system = ask("hi");
    with_system.messages.insert(with_system.messages.begin(), {Role::system, ""});
    EXPECT_NO_THROW(validate(with_system));
}

TEST(ChatResponse, LengthMayContinue) {
    ChatResponse r;
    r.finish_reason = FinishReason::length;
    EXPECT_TRUE(r.may_continue());
    r.finish_reason = FinishReason::stop;
    EXPECT_FALSE(r.may_continue());
}

TEST(MockBackend, SingleEntryAnswersAnyRequest) {
    auto mock = script_mock({entry("FEYNMAN: ...")});
    auto r = complete(ask("anything"), *mock);
    EXPECT_EQ(r.content, "FEYNMAN: ...");
    EXPECT_EQ(r.finish_reason, FinishReason::stop);
}

TEST(MockBackend, EmptyMessagesIsInvalidRequest) {
    auto mock = script_mock({entry("x")});
    EXPECT_THROW(mock->complete(ChatRequest{}), InvalidRequest);
}

TEST(MockBackend, EmptyScriptIsExhausted) {
    auto mock = script_mock({});
    EXPECT_THROW(mock->complete(ask("hi")), ScriptExhausted);
}

TEST(MockBackend, RepliesInOrder) {
    auto mock = script_mock({entry("one"), entry("two"), entry("three")});
    EXPECT_EQ(mock->complete(ask("a")).content, "one");
    EXPECT_EQ(mock->complete(ask("b")).content, "two");
    EXPECT_EQ(mock->complete(ask("c")).content, "three");
    EXPECT_THROW(mock->complete(ask("d")), ScriptExhausted);
}

TEST(MockBackend, MatcherMissIsExhausted) {
    auto mock = script_mock({entry("verdict", "CLAIM:")});
    EXPECT_THROW(mock->complete(ask("no marker here")), ScriptExhausted);
    EXPECT_EQ(mock->complete(ask("CLAIM: x")).content, "verdict");
}

TEST(MockBackend, MatcherSkipsToFirstMatchingEntry) {
    auto mock = script_mock({entry("seg", "SEGMENT"), entry("atom", "ATOM")});
    EXPECT_EQ(mock->complete(ask("ATOM please")).content, "atom");
    EXPECT_EQ(std::static_pointer_cast<MockBackend>(mock)->remaining(), 1u);
    EXPECT_EQ(mock->complete(ask("SEGMENT please")).content, "seg");
}

TEST(MockBackend, ReplayIsDeterministic) {
    std::vector<ScriptEntry> script{entry("a"), entry("b", "x"), entry("c", std::nullopt, FinishReason::length)};
    auto run = [&] {
        auto mock = script_mock(script);
        std::vector<ChatResponse> out;
        for (const auto* q : {"1", "x2", "3"}) out.push_back(mock->complete(ask(q)));
        return out;
    };
    EXPECT_EQ(run(), run());
}

TEST(MockBackend, RecordsCalls) {
    auto mock = std::make_shared<MockBackend>(std::vector<ScriptEntry>{entry("a")});
    mock->complete(ask("hello"));
    ASSERT_EQ(mock->call_count(), 1u);
    EXPECT_EQ(mock->calls()[0].messages[0].content, "hello");
}

TEST(MockBackend, ConcurrentCallsConsumeEachEntryOnce) {
    std::vector<ScriptEntry> script;
    for (int i = 0; i < 64; ++i) script.push_back(entry(std::to_string(i)));
    auto mock = script_mock(script);
    std::vector<std::string> seen(64);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            for (int i = t; i < 64; i += 4) seen[static_cast<std::size_t>(i)] = mock->complete(ask("q")).content;
        });
    for (auto& t : threads) t.join();
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::unique(seen.begin(), seen.end()), seen.end());
}

TEST(MockScript, ParsesJsonArrayAndLines) {
    auto a = parse_script(R"([{"match":"*","response":"x"},{"match":"CLAIM:","response":"y","finish_reason":"length"}])");
    ASSERT_EQ(a.size(), 2u);
    EXPECT_FALSE(a[0].matcher.has_value());
    EXPECT_EQ(*a[1].matcher, "CLAIM:");
    EXPECT_EQ(a[1].finish_reason, FinishReason::length);

    auto b = parse_script("# comment\n{\"response\":\"x\"}\n\n{\"match\":\"m\",\"response\":\"y\"}\n");
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[1].response, "y");
}

TEST(MockScript, LoadMissingFileThrows) { EXPECT_THROW(load_mock("/nonexistent/script.json"), Error); }

// --- HTTP backend against an in-process server -----------------------------

namespace {

class FakeServer {
public:
    explicit FakeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

const char* kOkPayload =
    R"({"choices":[{"message":{"role":"assistant","content":"hello"},"finish_reason":"length"}],)"
    R"("usage":{"prompt_tokens":3,"completion_tokens":1,"total_tokens":4}})";

HttpBackendConfig config_for(const FakeServer& s) {
    HttpBackendConfig c;
    c.base_url = s.base_url();
    c.api_key = "secret";
    c.model = "test-model";
    c.timeout_seconds = 5;
    return c;
}

} // namespace

TEST(HttpBackend, SendsOpenAiShapedRequest) {
    nlohmann::json seen;
    std::string auth;
    FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(kOkPayload, "application/json");
    });
    HttpBackend backend(config_for(server));
    ChatRequest req = ask("first");
    req.messages.push_back({Role::assistant, "second"});
    req.stop_markers = {"END"};
    auto r = backend.complete(req);

    EXPECT_EQ(r.content, "hello");
    EXPECT_EQ(r.finish_reason, FinishReason::length);
    EXPECT_EQ(r.usage.total_tokens, 4);
    EXPECT_EQ(auth, "Bearer secret");
    EXPECT_EQ(seen["model"], "test-model");
    ASSERT_EQ(seen["messages"].size(), 2u);
    EXPECT_EQ(seen["messages"][0]["content"], "first");
    EXPECT_EQ(seen["messages"][1]["role"], "assistant");
    EXPECT_EQ(seen["stop"][0], "END");
    EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.0);
}

TEST(HttpBackend, RetriesTransientFailuresWithBackoff) {
    int hits = 0;
    FakeServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++hits < 3) {
            res.status = hits == 1 ? 503 : 429;
            return;
        }
        res.set_content(kOkPayload, "application/json");
    });
    std::vector<std::chrono::milliseconds> sleeps;
    HttpBackend backend(config_for(server), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    EXPECT_EQ(backend.complete(ask("x")).content, "hello");
    EXPECT_EQ(hits, 3);
    std::vector<std::chrono::milliseconds> expected{std::chrono::milliseconds(1000), std::chrono::milliseconds(2000)};
    EXPECT_EQ(sleeps, expected);
}

TEST(HttpBackend, ExhaustedRetriesAreBackendUnavailable) {
    int hits = 0;
    FakeServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 500;
    });
    std::vector<std::chrono::milliseconds> sleeps;
    HttpBackend backend(config_for(server), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    EXPECT_THROW(backend.complete(ask("x")), BackendUnavailable);
    EXPECT_EQ(hits, 4);
    ASSERT_EQ(sleeps.size(), 3u);
    EXPECT_EQ(sleeps.back(), std::chrono::milliseconds(4000));
}

TEST(HttpBackend, AuthFailureIsNotRetried) {
    int hits = 0;
    FakeServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
    });
    HttpBackend backend(config_for(server), [](std::chrono::milliseconds) {});
    EXPECT_THROW(backend.complete(ask("x")), AuthFailure);
    EXPECT_EQ(hits, 1);
}

TEST(HttpBackend, ClientErrorIsInvalidRequest) {
    FakeServer server([&](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    HttpBackend backend(config_for(server), [](std::chrono::milliseconds) {});
    EXPECT_THROW(backend.complete(ask("x")), InvalidRequest);
}

TEST(HttpBackend, UnreachableHostExhaustsRetries) {
    HttpBackendConfig c;
    c.base_url = "http://127.0.0.1:1/v1";
    c.timeout_seconds = 1;
    int sleeps = 0;
    HttpBackend backend(c, [&](std::chrono::milliseconds) { ++sleeps; });
    EXPECT_THROW(backend.complete(ask("x")), BackendUnavailable);
    EXPECT_EQ(sleeps, 3);
}

TEST(HttpBackend, MalformedPayload) {
    EXPECT_THROW(HttpBackend::parse_response("{}"), BackendUnavailable);
    EXPECT_THROW(HttpBackend::parse_response("not json"), BackendUnavailable);
}

TEST(HttpBackend, ConfigFromEnvironment) {
    setenv("PERSONAE_API_BASE", "http://example.test/v9", 1);
    setenv("PERSONAE_MODEL", "m", 1);
    auto c = config_from_env();
    EXPECT_EQ(c.base_url, "http://example.test/v9");
    EXPECT_EQ(c.model, "m");
    unsetenv("PERSONAE_API_BASE");
    unsetenv("PERSONAE_MODEL");
}
