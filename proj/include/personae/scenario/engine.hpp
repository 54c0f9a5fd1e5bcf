#pragma once

#include <array>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "personae/llm/backend.hpp"
#include "personae/scenario/types.hpp"
#include "personae/util/files.hpp"

namespace personae::scenario {

/// The operator's continuation prompt.
inline constexpr std::string_view kContinueSentinel = "...";

// --- persona selection -----------------------------------------------------

struct PersonaSuggestion {
    std::vector<Persona> personae;
    bool parse_failure = false;  // fewer personae parsed than requested
};

inline std::string count_word(int n) {
    static constexpr std::array<std::string_view, 11> words = {"zero", "one", "two",   "three", "four", "five",
                                                               "six",  "seven", "eight", "nine",  "ten"};
    return n >= 0 && n < static_cast<int>(words.size()) ? std::string(words[static_cast<std::size_t>(n)])
                                                        : std::to_string(n);
}

/// "Suggest the names of two " + criteria, e.g. criteria = "deceased
/// physicists, one a world-class expert in ...".
inline std::string persona_selection_prompt(const std::string& criteria, int count) {
    return "Suggest the names of " + count_word(count) + " " + std::string(text::trim(criteria));
}

/// Uppercased last word of a name: "Richard Feynman" -> "FEYNMAN".
inline std::string speaking_label_for(const std::string& name) {
    auto trimmed = text::trim(name);
    auto space = trimmed.find_last_of(' ');
    return text::to_upper(space == std::string_view::npos ? trimmed : trimmed.substr(space + 1));
}

/// Reads "Name Surname: description" lines (optionally numbered, bulleted
/// or bolded) out of a persona-selection reply.
inline std::vector<Persona> parse_persona_reply(const std::string& reply) {
    static const std::regex line_re(
        R"(^\s*(?:\d+[.)]\s*|[-*]\s+)?\**([A-Z][\w.'\-]*(?:\s+[A-Z][\w.'\-]*){1,3})\**\s*(?::|\s-\s|\s\xE2\x80\x93\s)\s*\**\s*(.+)$)");
    std::vector<Persona> out;
    std::set<std::string> seen;
    for (const auto& line : text::split_lines(reply)) {
        std::smatch m;
        if (!std::regex_match(line, m, line_re)) continue;
        std::string name = m[1].str();
        if (!seen.insert(name).second) continue;
        auto sentences = text::split_sentences(m[2].str());
        Persona p;
        p.name = name;
        p.epithet = sentences.empty() ? std::string(text::trim(m[2].str())) : sentences.front();
        p.speaking_label = speaking_label_for(name);
        out.push_back(std::move(p));
    }
    return out;
}

inline PersonaSuggestion suggest_personae(const std::string& criteria, llm::Backend& gateway, int count = 2) {
    if (text::is_blank(criteria)) throw PreconditionError("persona criteria are empty");
    if (count < 1) throw PreconditionError("persona count must be positive");
    auto reply = gateway.complete(llm::make_request(persona_selection_prompt(criteria, count), llm::kScenarioTemperature));
    PersonaSuggestion s;
    s.personae = parse_persona_reply(reply.content);
    if (s.personae.size() > static_cast<std::size_t>(count)) s.personae.resize(static_cast<std::size_t>(count));
    s.parse_failure = s.personae.size() < static_cast<std::size_t>(count);
    return s;
}

// --- composition -----------------------------------------------------------

/// Scenario prompt text, line by line: "Scenario:" with setting and brief,
/// "Props:" (omitted when there are none), formatting directives, and the
/// opening stage direction last.
inline std::string compose_scenario_text(const ScenarioSpec& spec) {
    validate(spec);
    std::vector<std::string> lines;
    std::string head = "Scenario: " + std::string(text::trim(spec.setting));
    if (!text::is_blank(spec.topical_brief)) head += " " + std::string(text::trim(spec.topical_brief));
    lines.push_back(std::move(head));
    if (!spec.props.empty()) {
        std::vector<std::string> props;
        for (const auto& p : spec.props) props.emplace_back(text::trim(p));
        lines.push_back("Props: " + text::join(props, " "));
    }
    for (const auto& d : spec.formatting_directives) lines.emplace_back(text::trim(d));
    lines.emplace_back(text::trim(spec.opening_direction));
    return text::join(lines, "\n");
}

inline llm::ChatRequest compose_scenario(const ScenarioSpec& spec) {
    return llm::make_request(compose_scenario_text(spec), llm::kScenarioTemperature);
}

// --- speaker attribution ---------------------------------------------------

inline std::vector<std::string> labels_of(const ScenarioSpec& spec) {
    std::vector<std::string> labels;
    for (const auto& p : spec.personae) labels.push_back(p.speaking_label);
    return labels;
}

/// Known labels that open a line of `text`, in order of first appearance.
inline std::vector<std::string> detect_speaker_labels(const std::string& body,
                                                      const std::vector<std::string>& labels) {
    std::vector<std::string> found;
    for (const auto& line : text::split_lines(body)) {
        for (const auto& label : labels) {
            if (line_opens_with_label(line, label) &&
                std::find(found.begin(), found.end(), label) == found.end())
                found.push_back(label);
        }
    }
    return found;
}

struct Segment {
    std::string speaker;  // empty: narration before anyone speaks
    std::string text;
};

/// Splits a model turn into per-speaker segments. Lines that open with no
/// known label continue the previous speaker's segment.
inline std::vector<Segment> attribute_segments(const std::string& body, const std::vector<std::string>& labels) {
    std::vector<Segment> out;
    for (const auto& line : text::split_lines(body)) {
        std::string speaker;
        for (const auto& label : labels)
            if (line_opens_with_label(line, label)) speaker = label;
        if (!speaker.empty() || out.empty()) {
            if (speaker.empty() && text::is_blank(line)) continue;
            out.push_back({speaker, line});
        } else {
            out.back().text += "\n" + line;
        }
    }
    return out;
}

// --- sessions --------------------------------------------------------------

inline std::string export_structured(const Session& session);

namespace detail {

inline void snapshot(const Session& s) {
    if (s.snapshot_path) files::write_atomic(*s.snapshot_path, export_structured(s));
}

inline llm::ChatRequest history_request(const Session& s, const std::string& next_operator_text) {
    llm::ChatRequest req;
    req.temperature = llm::kScenarioTemperature;
    for (const auto& t : s.turns) {
        // Blank model replies stay in the transcript but not in the request;
        // backends reject empty assistant messages.
        if (t.origin == Origin::model && text::is_blank(t.text)) continue;
        req.messages.push_back({t.origin == Origin::model ? llm::Role::assistant : llm::Role::user, t.text});
    }
    req.messages.push_back({llm::Role::user, next_operator_text});
    return req;
}

inline Turn make_turn(const Session& s, Origin origin, std::string body) {
    Turn t;
    t.index = static_cast<int>(s.turns.size());
    t.origin = origin;
    if (origin == Origin::model) t.speaker_labels = detect_speaker_labels(body, labels_of(s.spec));
    t.text = std::move(body);
    return t;
}

// Sends the history plus one operator turn; both turns are appended only
// when the backend answers, so the transcript never ends on an orphan prompt.
inline Turn exchange(Session& s, const std::string& operator_text, llm::Backend& gateway, bool is_continue) {
    if (!s.active()) throw SessionStopped("session is stopped");
    auto reply = gateway.complete(history_request(s, operator_text));
    s.turns.push_back(make_turn(s, Origin::operator_turn, operator_text));
    Turn model = make_turn(s, Origin::model, reply.content);
    model.truncated = reply.may_continue();
    s.turns.push_back(model);
    s.needs_continue = model.truncated;
    if (is_continue && text::is_blank(reply.content)) s.status = SessionStatus::stopped;
    snapshot(s);
    return model;
}

} // namespace detail

/// Sends the composed scenario and records the opening exchange. A gateway
/// failure leaves a stopped session holding only the prompt turn.
inline Session start_session(const ScenarioSpec& spec, llm::Backend& gateway,
                             std::optional<std::filesystem::path> snapshot_path = std::nullopt) {
    Session s;
    s.spec = spec;
    s.snapshot_path = std::move(snapshot_path);
    auto request = compose_scenario(spec);
    s.turns.push_back(detail::make_turn(s, Origin::operator_turn, request.messages.front().content));
    try {
        auto reply = gateway.complete(request);
        Turn model = detail::make_turn(s, Origin::model, reply.content);
        model.truncated = reply.may_continue();
        s.needs_continue = model.truncated;
        s.turns.push_back(std::move(model));
    } catch (const GatewayError& e) {
        s.status = SessionStatus::stopped;
        s.error_note = e.what();
    }
    detail::snapshot(s);
    return s;
}

/// Operator stage direction, usually in character ("NOETHER: ..."), and the
/// model's reply.
inline Turn nudge(Session& session, const std::string& directive, llm::Backend& gateway) {
    if (!session.active()) throw SessionStopped("session is stopped");
    if (text::is_blank(directive)) throw PreconditionError("nudge directive is empty");
    return detail::exchange(session, directive, gateway, false);
}

/// Sends the "..." sentinel. An empty reply ends the session.
inline Turn continue_session(Session& session, llm::Backend& gateway) {
    return detail::exchange(session, std::string(kContinueSentinel), gateway, true);
}

inline void stop_session(Session& session) {
    session.status = SessionStatus::stopped;
    detail::snapshot(session);
}

/// Opening exchange followed by the script's steps in order. The first
/// gateway failure stops the session and records the error.
inline Session run_script(const ScenarioSpec& spec, const NudgeScript& script, llm::Backend& gateway,
                          std::optional<std::filesystem::path> snapshot_path = std::nullopt) {
    validate(script);
    Session s = start_session(spec, gateway, std::move(snapshot_path));
    for (const auto& step : script.steps) {
        if (!s.active()) break;
        try {
            switch (step.kind) {
                case StepKind::nudge: nudge(s, step.text, gateway); break;
                case StepKind::continue_: continue_session(s, gateway); break;
                case StepKind::stop: stop_session(s); break;
            }
        } catch (const GatewayError& e) {
            s.status = SessionStatus::stopped;
            s.error_note = e.what();
            detail::snapshot(s);
        }
    }
    return s;
}

// --- transcripts -----------------------------------------------------------

enum class TranscriptFormat { plain, structured };

/// Alternating "PROMPT:" / "RESPONSE:" blocks.
inline std::string export_plain(const Session& session) {
    std::string out;
    for (const auto& t : session.turns) {
        out += t.origin == Origin::operator_turn ? "PROMPT:\n\n" : "RESPONSE:\n\n";
        out += t.text;
        out += "\n\n";
    }
    return out;
}

inline nlohmann::json session_to_json(const Session& session) {
    return {{"spec", session.spec},
            {"status", session.status},
            {"error_note", session.error_note},
            {"needs_continue", session.needs_continue},
            {"turns", session.turns}};
}

inline std::string export_structured(const Session& session) { return session_to_json(session).dump(2) + "\n"; }

inline std::string export_transcript(const Session& session, TranscriptFormat format) {
    return format == TranscriptFormat::plain ? export_plain(session) : export_structured(session);
}

/// Rebuilds a session from its structured export.
inline Session import_structured(const std::string& document) {
    auto j = nlohmann::json::parse(document);
    Session s;
    s.spec = j.at("spec").get<ScenarioSpec>();
    s.status = j.at("status").get<SessionStatus>();
    s.error_note = j.value("error_note", std::string{});
    s.needs_continue = j.value("needs_continue", false);
    s.turns = j.at("turns").get<std::vector<Turn>>();
    for (std::size_t i = 0; i < s.turns.size(); ++i)
        if (s.turns[i].index != static_cast<int>(i)) throw ParseFailure("turn indices are not contiguous");
    return s;
}

} // namespace personae::scenario
