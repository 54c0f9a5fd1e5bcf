#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "personae/scenario/types.hpp"
#include "personae/util/files.hpp"

namespace personae::scenario {

/// A scenario script file: the spec plus the operator's steps.
struct ScenarioFile {
    ScenarioSpec spec;
    NudgeScript script;
};

namespace detail {

// Scalars come through as strings; every field in the file schema is text.
inline nlohmann::json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Sequence: {
            auto arr = nlohmann::json::array();
            for (const auto& item : node) arr.push_back(yaml_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            auto obj = nlohmann::json::object();
            for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
        case YAML::NodeType::Scalar: return node.as<std::string>();
        default: return nullptr;
    }
}

} // namespace detail

/// Parses YAML (or JSON, which YAML accepts) with the fields title, setting,
/// topical_brief, props, personae[{name, epithet, speaking_label}],
/// opening_direction, formatting_directives and steps[{kind, text}].
inline ScenarioFile parse_scenario_file(const std::string& contents) {
    nlohmann::json j;
    try {
        j = detail::yaml_to_json(YAML::Load(contents));
    } catch (const YAML::Exception& e) {
        throw ParseFailure(std::string("scenario file is not valid YAML: ") + e.what());
    }
    if (!j.is_object()) throw ParseFailure("scenario file must be a mapping");
    for (const char* list_field : {"props", "personae", "formatting_directives", "steps"})
        if (j.contains(list_field) && j[list_field].is_null()) j[list_field] = nlohmann::json::array();
    ScenarioFile f;
    try {
        f.spec = j.get<ScenarioSpec>();
        if (j.contains("steps")) f.script.steps = j["steps"].get<std::vector<NudgeStep>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseFailure(std::string("scenario file has bad fields: ") + e.what());
    }
    validate(f.spec);
    validate(f.script);
    return f;
}

inline ScenarioFile load_scenario_file(const std::filesystem::path& path) {
    return parse_scenario_file(files::read_all(path));
}

} // namespace personae::scenario
