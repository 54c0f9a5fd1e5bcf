#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "personae/error.hpp"
#include "personae/util/text.hpp"

namespace personae::scenario {

struct Persona {
    std::string name;
    std::string epithet;         // one-line expertise description
    std::string speaking_label;  // e.g. FEYNMAN, as written in the stage script

    friend bool operator==(const Persona&, const Persona&) = default;
};

inline void to_json(nlohmann::json& j, const Persona& p) {
    j = {{"name", p.name}, {"epithet", p.epithet}, {"speaking_label", p.speaking_label}};
}

inline void from_json(const nlohmann::json& j, Persona& p) {
    p.name = j.value("name", std::string{});
    p.epithet = j.value("epithet", std::string{});
    p.speaking_label = j.value("speaking_label", std::string{});
}

struct ScenarioSpec {
    std::string title;
    std::string setting;
    std::string topical_brief;
    std::vector<std::string> props;
    std::vector<Persona> personae;
    std::string opening_direction;
    std::vector<std::string> formatting_directives;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

inline void to_json(nlohmann::json& j, const ScenarioSpec& s) {
    j = {{"title", s.title},
         {"setting", s.setting},
         {"topical_brief", s.topical_brief},
         {"props", s.props},
         {"personae", s.personae},
         {"opening_direction", s.opening_direction},
         {"formatting_directives", s.formatting_directives}};
}

inline void from_json(const nlohmann::json& j, ScenarioSpec& s) {
    s.title = j.value("title", std::string{});
    s.setting = j.value("setting", std::string{});
    s.topical_brief = j.value("topical_brief", std::string{});
    s.props = j.value("props", std::vector<std::string>{});
    s.personae = j.value("personae", std::vector<Persona>{});
    s.opening_direction = j.value("opening_direction", std::string{});
    s.formatting_directives = j.value("formatting_directives", std::vector<std::string>{});
}

/// True when `line` opens with `label` followed by ':' or '(' (optionally
/// wrapped in markdown emphasis).
inline bool line_opens_with_label(std::string_view line, std::string_view label) {
    line = text::trim(line);
    while (!line.empty() && (line.front() == '*' || line.front() == '_')) line.remove_prefix(1);
    if (label.empty() || line.substr(0, label.size()) != label) return false;
    line.remove_prefix(label.size());
    while (!line.empty() && (line.front() == '*' || line.front() == '_')) line.remove_prefix(1);
    line = text::trim(line);
    return !line.empty() && (line.front() == ':' || line.front() == '(');
}

inline void validate(const ScenarioSpec& spec) {
    if (text::is_blank(spec.setting)) throw PreconditionError("scenario setting is empty");
    if (spec.personae.empty()) throw PreconditionError("scenario needs at least one persona");
    std::vector<std::string> labels;
    for (const auto& p : spec.personae) {
        if (text::is_blank(p.speaking_label)) throw PreconditionError("persona " + p.name + " has no speaking label");
        if (std::find(labels.begin(), labels.end(), p.speaking_label) != labels.end())
            throw PreconditionError("duplicate speaking label " + p.speaking_label);
        labels.push_back(p.speaking_label);
    }
    if (text::is_blank(spec.opening_direction)) throw PreconditionError("scenario has no opening direction");
    bool names_persona = false;
    for (const auto& l : labels) names_persona = names_persona || spec.opening_direction.find(l) != std::string::npos;
    if (!names_persona) throw PreconditionError("opening direction names no persona's speaking label");
}

enum class Origin { operator_turn, model };

NLOHMANN_JSON_SERIALIZE_ENUM(Origin, {{Origin::operator_turn, "operator"}, {Origin::model, "model"}})

struct Turn {
    int index = 0;
    Origin origin = Origin::operator_turn;
    std::string text;
    std::vector<std::string> speaker_labels;  // detected in model turns
    bool truncated = false;                   // model hit its length limit

    friend bool operator==(const Turn&, const Turn&) = default;
};

inline void to_json(nlohmann::json& j, const Turn& t) {
    j = {{"index", t.index}, {"origin", t.origin}, {"text", t.text}, {"speaker_labels", t.speaker_labels}};
    if (t.truncated) j["truncated"] = true;
}

inline void from_json(const nlohmann::json& j, Turn& t) {
    t.index = j.at("index").get<int>();
    t.origin = j.at("origin").get<Origin>();
    t.text = j.at("text").get<std::string>();
    t.speaker_labels = j.value("speaker_labels", std::vector<std::string>{});
    t.truncated = j.value("truncated", false);
}

enum class SessionStatus { active, stopped };

NLOHMANN_JSON_SERIALIZE_ENUM(SessionStatus, {{SessionStatus::active, "active"}, {SessionStatus::stopped, "stopped"}})

struct Session {
    ScenarioSpec spec;
    std::vector<Turn> turns;
    SessionStatus status = SessionStatus::active;
    std::string error_note;
    bool needs_continue = false;                 // last reply was cut off at the length limit
    std::optional<std::filesystem::path> snapshot_path;

    bool active() const { return status == SessionStatus::active; }
};

enum class StepKind { nudge, continue_, stop };

NLOHMANN_JSON_SERIALIZE_ENUM(StepKind, {{StepKind::nudge, "nudge"}, {StepKind::continue_, "continue"}, {StepKind::stop, "stop"}})

struct NudgeStep {
    StepKind kind = StepKind::nudge;
    std::string text;

    friend bool operator==(const NudgeStep&, const NudgeStep&) = default;
};

inline void to_json(nlohmann::json& j, const NudgeStep& s) { j = {{"kind", s.kind}, {"text", s.text}}; }

inline void from_json(const nlohmann::json& j, NudgeStep& s) {
    s.kind = j.value("kind", StepKind::nudge);
    s.text = j.value("text", std::string{});
}

struct NudgeScript {
    std::vector<NudgeStep> steps;
};

inline void validate(const NudgeScript& script) {
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        const auto& s = script.steps[i];
        if (s.kind == StepKind::stop && i + 1 != script.steps.size())
            throw PreconditionError("a stop step must be the last step");
        if (s.kind == StepKind::nudge && text::is_blank(s.text))
            throw PreconditionError("nudge step " + std::to_string(i) + " has no text");
    }
}

} // namespace personae::scenario
