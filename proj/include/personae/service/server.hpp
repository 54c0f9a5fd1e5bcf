#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "personae/deconfab/pipeline.hpp"
#include "personae/memory/store.hpp"
#include "personae/physics/params.hpp"
#include "personae/physics/render.hpp"
#include "personae/scenario/engine.hpp"

namespace personae::service {

struct SessionHandle {
    std::string session_id;
    files::Timestamp created_at{};
};

inline void to_json(nlohmann::json& j, const SessionHandle& h) {
    j = {{"session_id", h.session_id}, {"created_at", files::format_timestamp(h.created_at)}};
}

struct ServiceDeps {
    llm::BackendHandle gateway;
    retrieval::ProviderHandle provider;
    deconfab::PipelineConfig pipeline;
    deconfab::PersonaPair personae;
    std::shared_ptr<memory::MemoryStore> memory;
    std::string bearer_token;  // empty: no authentication
};

/// HTTP surface over the pipeline, the scenario engine, the memory store and
/// the diffraction grid. JSON field names match the library's types.
class Service {
public:
    explicit Service(ServiceDeps deps) : deps_(std::move(deps)) {
        if (!deps_.memory) deps_.memory = std::make_shared<memory::MemoryStore>();
    }

    void mount(httplib::Server& server) {
        if (!deps_.bearer_token.empty()) {
            server.set_pre_routing_handler([token = deps_.bearer_token](const httplib::Request& req,
                                                                        httplib::Response& res) {
                if (req.get_header_value("Authorization") == "Bearer " + token)
                    return httplib::Server::HandlerResponse::Unhandled;
                error(res, 401, "missing or wrong bearer token");
                return httplib::Server::HandlerResponse::Handled;
            });
        }
        server.Post("/deconfabulate", [this](const auto& req, auto& res) { handle_deconfabulate(req, res); });
        server.Post("/sessions", [this](const auto& req, auto& res) { handle_create(req, res); });
        server.Post(R"(/sessions/([^/]+)/nudge)", [this](const auto& req, auto& res) { handle_nudge(req, res); });
        server.Post(R"(/sessions/([^/]+)/continue)",
                    [this](const auto& req, auto& res) { handle_continue(req, res); });
        server.Post(R"(/sessions/([^/]+)/stop)", [this](const auto& req, auto& res) { handle_stop(req, res); });
        server.Get(R"(/sessions/([^/]+)/transcript)",
                   [this](const auto& req, auto& res) { handle_transcript(req, res); });
        server.Get("/memory/search", [this](const auto& req, auto& res) { handle_memory_search(req, res); });
        server.Get("/physics/grid", [this](const auto& req, auto& res) { handle_grid(req, res); });
    }

    const ServiceDeps& deps() const { return deps_; }

    /// Snapshot of a session's state, or nullopt for an unknown id.
    std::optional<scenario::Session> session(const std::string& id) const {
        auto slot = find(id);
        if (!slot) return std::nullopt;
        std::lock_guard lock(slot->mu);
        return slot->session;
    }

private:
    struct Slot {
        SessionHandle handle;
        scenario::Session session;
        std::mutex mu;
    };

    static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void error(httplib::Response& res, int status, const std::string& message) {
        send_json(res, status, {{"error", message}});
    }

    static std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res) {
        auto j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            error(res, 400, "request body must be a JSON object");
            return std::nullopt;
        }
        return j;
    }

    std::shared_ptr<Slot> find(const std::string& id) const {
        std::shared_lock lock(sessions_mu_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    std::string new_session_id() {
        static thread_local std::mt19937_64 rng{std::random_device{}()};
        char buf[48];
        std::snprintf(buf, sizeof buf, "s%04llx-%08llx", static_cast<unsigned long long>(++session_counter_),
                      static_cast<unsigned long long>(rng() & 0xffffffffULL));
        return buf;
    }

    void handle_deconfabulate(const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        if (!body->contains("response_text") || !(*body)["response_text"].is_string() ||
            text::is_blank((*body)["response_text"].get<std::string>())) {
            error(res, 400, "response_text must be a non-empty string");
            return;
        }
        deconfab::PipelineDeps deps{deps_.gateway, deps_.provider, deps_.pipeline, deps_.personae, deps_.memory};
        if (body->contains("options") && (*body)["options"].is_object()) {
            const auto& o = (*body)["options"];
            try {
                deps.config.retrieval.top_n = o.value("top_n", deps.config.retrieval.top_n);
                deps.config.retrieval.max_snippets = o.value("max_snippets", deps.config.retrieval.max_snippets);
                deps.config.llm_verdict_pass = o.value("llm_verdict_pass", deps.config.llm_verdict_pass);
            } catch (const nlohmann::json::exception&) {
                error(res, 400, "options have the wrong types");
                return;
            }
            if (deps.config.retrieval.top_n < 1 || deps.config.retrieval.max_snippets < 1) {
                error(res, 400, "top_n and max_snippets must be positive");
                return;
            }
        }
        try {
            auto report = deconfab::deconfabulate((*body)["response_text"].get<std::string>(), deps);
            send_json(res, 200, deconfab::report_to_json(report));
        } catch (const deconfab::DeconfabError& e) {
            send_json(res, 502, {{"error", e.what()}, {"partial_report", deconfab::report_to_json(e.partial())}});
        } catch (const PreconditionError& e) {
            error(res, 400, e.what());
        }
    }

    void handle_create(const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        scenario::ScenarioSpec spec;
        try {
            spec = body->at("scenario_spec").get<scenario::ScenarioSpec>();
            scenario::validate(spec);
        } catch (const std::exception& e) {
            error(res, 400, std::string("invalid scenario_spec: ") + e.what());
            return;
        }
        auto slot = std::make_shared<Slot>();
        slot->handle = {new_session_id(), files::Clock::now()};
        slot->session = scenario::start_session(spec, *deps_.gateway);
        {
            std::unique_lock lock(sessions_mu_);
            sessions_[slot->handle.session_id] = slot;
        }
        if (!slot->session.error_note.empty()) {
            send_json(res, 502, {{"error", slot->session.error_note},
                                 {"session_id", slot->handle.session_id},
                                 {"created_at", files::format_timestamp(slot->handle.created_at)}});
            return;
        }
        send_json(res, 201, slot->handle);
    }

    template <typename Op>
    void with_session(const httplib::Request& req, httplib::Response& res, Op op) {
        auto slot = find(req.matches[1].str());
        if (!slot) {
            error(res, 404, "unknown session id");
            return;
        }
        std::lock_guard lock(slot->mu);
        try {
            op(slot->session);
        } catch (const SessionStopped& e) {
            error(res, 409, e.what());
        } catch (const GatewayError& e) {
            error(res, 502, e.what());
        } catch (const PreconditionError& e) {
            error(res, 400, e.what());
        }
    }

    void handle_nudge(const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        if (!body->contains("text") || !(*body)["text"].is_string()) {
            error(res, 400, "text must be a string");
            return;
        }
        const auto directive = (*body)["text"].get<std::string>();
        with_session(req, res, [&](scenario::Session& s) {
            send_json(res, 200, scenario::nudge(s, directive, *deps_.gateway));
        });
    }

    void handle_continue(const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](scenario::Session& s) {
            send_json(res, 200, scenario::continue_session(s, *deps_.gateway));
        });
    }

    void handle_stop(const httplib::Request& req, httplib::Response& res) {
        with_session(req, res, [&](scenario::Session& s) {
            scenario::stop_session(s);
            send_json(res, 200, {{"status", s.status}});
        });
    }

    void handle_transcript(const httplib::Request& req, httplib::Response& res) {
        const auto format = req.has_param("format") ? req.get_param_value("format") : "structured";
        if (format != "plain" && format != "structured") {
            error(res, 400, "format must be plain or structured");
            return;
        }
        with_session(req, res, [&](scenario::Session& s) {
            if (format == "plain") {
                res.status = 200;
                res.set_content(scenario::export_plain(s), "text/plain");
            } else {
                res.status = 200;
                res.set_content(scenario::export_structured(s), "application/json");
            }
        });
    }

    void handle_memory_search(const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("q")) {
            error(res, 400, "q is required");
            return;
        }
        int k = 5;
        if (req.has_param("k")) {
            try {
                std::size_t used = 0;
                const auto raw = req.get_param_value("k");
                k = std::stoi(raw, &used);
                if (used != raw.size()) throw std::invalid_argument(raw);
            } catch (const std::exception&) {
                error(res, 400, "k must be an integer");
                return;
            }
        }
        if (k < 1) {
            error(res, 400, "k must be positive");
            return;
        }
        send_json(res, 200, deps_.memory->search(req.get_param_value("q"), k));
    }

    void handle_grid(const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> params;
        for (const auto& [key, value] : req.params) params[key] = value;
        try {
            auto grid = physics::evaluate(physics::grid_request_from(params));
            res.status = 200;
            res.set_content(physics::matrix_text(grid), "text/plain");
        } catch (const std::invalid_argument& e) {
            error(res, 400, e.what());
        } catch (const InvalidRange& e) {
            error(res, 400, e.what());
        }
    }

    ServiceDeps deps_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    mutable std::shared_mutex sessions_mu_;
    std::atomic<unsigned long long> session_counter_{0};
};

} // namespace personae::service
