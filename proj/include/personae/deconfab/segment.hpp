#pragma once

#include <string>
#include <vector>

#include "personae/deconfab/types.hpp"
#include "personae/llm/backend.hpp"

namespace personae::deconfab {

namespace prompts {

// Each template opens with a distinct header line; mock scripts key on them.
inline constexpr std::string_view kSegmentHeader = "SEGMENT INTO ASSERTIONS";
inline constexpr std::string_view kAtomizeHeader = "DECOMPOSE INTO ATOMIC CLAIMS";

inline std::string segmentation(const std::string& response) {
    std::string p(kSegmentHeader);
    p += "\nSplit the RESPONSE below into its individual assertions. Copy each assertion "
         "verbatim from the response, one per line, each line starting with \"- \". "
         "Do not merge, reorder or rephrase anything.\n\nRESPONSE:\n";
    p += response;
    return p;
}

inline std::string atomization(const std::string& assertion) {
    std::string p(kAtomizeHeader);
    p += "\nRewrite the ASSERTION below as a list of atomic claims. Each claim must state "
         "exactly one checkable fact and must be understandable on its own. Write one claim "
         "per line, each line starting with \"- \".\n\nASSERTION: ";
    p += assertion;
    return p;
}

} // namespace prompts

/// Items of a bulleted or numbered list in model output. When no line carries
/// a list marker, every non-blank line is an item.
inline std::vector<std::string> parse_list(std::string_view output) {
    std::vector<std::string> marked;
    std::vector<std::string> plain;
    for (const auto& raw : text::split_lines(output)) {
        auto line = text::trim(raw);
        if (line.empty()) continue;
        std::size_t i = 0;
        bool has_marker = false;
        if (line.rfind("- ", 0) == 0 || line.rfind("* ", 0) == 0) {
            i = 2;
            has_marker = true;
        } else if (line.rfind("\xE2\x80\xA2", 0) == 0) {  // bullet
            i = 3;
            has_marker = true;
        } else {
            while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
            if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
                ++i;
                has_marker = true;
            } else {
                i = 0;
            }
        }
        auto item = std::string(text::trim(line.substr(i)));
        if (item.empty()) continue;
        (has_marker ? marked : plain).push_back(std::move(item));
    }
    return marked.empty() ? plain : marked;
}

struct Segmentation {
    std::vector<Assertion> assertions;
    bool fallback = false;  // sentence split used instead of model output
};

inline std::vector<Assertion> sentence_split_assertions(const std::string& response) {
    std::vector<Assertion> out;
    int id = 0;
    for (auto span : text::sentence_spans(response))
        out.push_back({id++, response.substr(span.begin, span.size()), span});
    return out;
}

/// Locates each item in `response` in order, comparing with whitespace
/// collapsed and case folded. Empty result when any item fails to align.
inline std::vector<Assertion> align_items(const std::string& response, const std::vector<std::string>& items) {
    const auto haystack = text::normalize_with_offsets(response);
    std::vector<Assertion> out;
    std::size_t cursor = 0;
    int id = 0;
    for (const auto& item : items) {
        auto needle = text::normalize(item);
        if (needle.empty()) return {};
        auto pos = haystack.text.find(needle, cursor);
        if (pos == std::string::npos) return {};
        text::Span span{haystack.source_offset[pos], haystack.source_offset[pos + needle.size() - 1] + 1};
        out.push_back({id++, response.substr(span.begin, span.size()), span});
        cursor = pos + needle.size();
    }
    return out;
}

/// Step 1: the response as a list of assertions with spans into it. A null
/// gateway, or model output that cannot be aligned, falls back to sentences.
inline Segmentation segment_assertions(const std::string& response, llm::Backend* gateway) {
    if (text::is_blank(response)) throw PreconditionError("response to segment is empty");
    if (gateway) {
        auto reply = gateway->complete(llm::make_request(prompts::segmentation(response),
                                                         llm::kClassificationTemperature));
        auto items = parse_list(reply.content);
        if (!items.empty()) {
            auto aligned = align_items(response, items);
            if (!aligned.empty()) return {std::move(aligned), false};
        }
    }
    return {sentence_split_assertions(response), true};
}

struct Atomization {
    std::vector<Claim> claims;
    bool fallback = false;  // the assertion itself kept as the only claim
};

inline std::string claim_id(int assertion_id, std::size_t index) {
    return "a" + std::to_string(assertion_id) + ".c" + std::to_string(index);
}

/// Step (1) of validation: one assertion decomposed into atomic claims.
/// Without a usable model reply the assertion stands as a single claim.
inline Atomization atomize_claims(const Assertion& assertion, llm::Backend* gateway) {
    if (text::is_blank(assertion.text)) throw PreconditionError("assertion text is empty");
    std::vector<std::string> items;
    if (gateway) {
        auto reply = gateway->complete(llm::make_request(prompts::atomization(assertion.text),
                                                         llm::kClassificationTemperature));
        items = parse_list(reply.content);
    }
    Atomization out;
    if (items.empty()) {
        out.fallback = true;
        items.push_back(assertion.text);
    } else if (items.size() == 1 && text::normalize(items[0]) == text::normalize(assertion.text)) {
        items[0] = assertion.text;
    }
    for (std::size_t i = 0; i < items.size(); ++i)
        out.claims.push_back({claim_id(assertion.id, i), assertion.id, items[i]});
    return out;
}

} // namespace personae::deconfab
