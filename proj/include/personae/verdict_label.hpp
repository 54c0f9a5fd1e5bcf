#pragma once

#include <array>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

namespace personae {

/// Outcome of adjudicating one claim against its evidence.
enum class VerdictLabel { Supported, PartiallySupported, NotSupported, Indeterminate };

NLOHMANN_JSON_SERIALIZE_ENUM(VerdictLabel, {{VerdictLabel::Indeterminate, "Indeterminate"},
                                            {VerdictLabel::Supported, "Supported"},
                                            {VerdictLabel::PartiallySupported, "PartiallySupported"},
                                            {VerdictLabel::NotSupported, "NotSupported"}})

inline constexpr std::array<VerdictLabel, 4> kAllVerdictLabels = {
    VerdictLabel::Supported, VerdictLabel::PartiallySupported, VerdictLabel::NotSupported,
    VerdictLabel::Indeterminate};

inline std::string_view to_string(VerdictLabel label) {
    switch (label) {
        case VerdictLabel::Supported: return "Supported";
        case VerdictLabel::PartiallySupported: return "PartiallySupported";
        case VerdictLabel::NotSupported: return "NotSupported";
        case VerdictLabel::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

inline std::optional<VerdictLabel> parse_verdict_label(std::string_view s) {
    for (auto label : kAllVerdictLabels)
        if (to_string(label) == s) return label;
    return std::nullopt;
}

} // namespace personae
