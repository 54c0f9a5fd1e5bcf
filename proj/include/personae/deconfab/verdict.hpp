#pragma once

#include <algorithm>
#include <cmath>
#include <regex>
#include <string>
#include <vector>

#include "personae/deconfab/types.hpp"
#include "personae/llm/backend.hpp"
#include "personae/retrieval/types.hpp"

namespace personae::deconfab {

inline constexpr std::string_view kNoEvidenceSentinel = "(none found)";

/// The persona-dialog adjudication prompt: a one-sentence scene naming the
/// two investigators and their task, then the CLAIM and numbered EVIDENCE.
inline llm::ChatRequest build_verdict_prompt(const Claim& claim, const retrieval::EvidenceBundle& evidence,
                                             const PersonaPair& personae = {}) {
    std::string p = "Imagine a dialog between " + personae.lead + " and " + personae.partner_relation + " " +
                    personae.partner +
                    " discussing whether the EVIDENCE given supports or refutes the CLAIM below in which "
                    "they use " +
                    personae.skills + " to come to a definite conclusion.\n\nCLAIM: " + claim.text +
                    "\n\nEVIDENCE:";
    if (evidence.snippets.empty()) {
        p += " ";
        p += kNoEvidenceSentinel;
    } else {
        for (std::size_t i = 0; i < evidence.snippets.size(); ++i)
            p += "\n" + std::to_string(i + 1) + ". " + evidence.snippets[i].snippet;
    }
    return llm::make_request(std::move(p), llm::kClassificationTemperature);
}

namespace detail {

struct Turn {
    std::string text;
};

// "Sherlock Holmes:", "Dr. Watson:", "HOLMES (smiling):", "*Watson*:".
inline const std::regex& speaker_prefix() {
    static const std::regex re(R"(^\s*[*_]*[A-Z][A-Za-z.'\- ]{0,40}[*_]*\s*(\([^)]*\))?\s*[*_]*:)");
    return re;
}

inline std::vector<Turn> split_turns(const std::string& dialog) {
    std::vector<Turn> turns;
    bool open = false;
    for (const auto& line : text::split_lines(dialog)) {
        if (text::is_blank(line)) {
            open = false;
            continue;
        }
        if (!open || std::regex_search(line, speaker_prefix())) {
            turns.push_back({line});
            open = true;
        } else {
            turns.back().text += "\n" + line;
        }
    }
    return turns;
}

struct Cue {
    VerdictLabel label;
    std::size_t begin;  // match position within the sentence
    std::size_t end;
};

inline bool has_negation(const std::string& lowered) {
    static const std::regex re(R"(\b(not|no|none|never|neither|nor|cannot|without|nothing|hardly|lacks?)\b|n't\b)");
    return std::regex_search(lowered, re);
}

inline std::optional<Cue> classify_sentence(const std::string& sentence) {
    auto trimmed = text::trim(sentence);
    if (!trimmed.empty() && trimmed.back() == '?') return std::nullopt;
    auto lowered = text::to_lower(sentence);
    // "supports or refutes" states the question, not an answer; blank it out
    // in place so match offsets still index the original sentence.
    static const std::regex alternative(R"(\bsupports?\s+or\s+refutes?\b)");
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> blanks;
    for (std::sregex_iterator it(lowered.begin(), lowered.end(), alternative), end; it != end; ++it)
        blanks.emplace_back(it->position(0), it->length(0));
    for (auto [at, len] : blanks) std::fill_n(lowered.begin() + at, len, ' ');
    std::smatch m;
    static const std::regex partial(R"(\b(partially|partly|partial)\s+support(s|ed|ing)?\b)");
    static const std::regex refuted(
        R"(\bnot\s+supported\b|\b(does|do|did)\s+not\s+support\b|\b(doesn't|don't|didn't|cannot|can't)\s+support\b|\bunsupported\b|\brefut(e|es|ed)\b)");
    static const std::regex supported(R"(\bdirectly\s+supports\b|\b(is|are|was)\s+supported\b|\bsupports\s+the\s+claim\b)");
    auto pos = [&](const std::smatch& sm) {
        return Cue{VerdictLabel::Indeterminate, static_cast<std::size_t>(sm.position(0)),
                   static_cast<std::size_t>(sm.position(0) + sm.length(0))};
    };
    if (std::regex_search(lowered, m, partial)) {
        auto c = pos(m);
        c.label = VerdictLabel::PartiallySupported;
        return c;
    }
    if (std::regex_search(lowered, m, refuted)) {
        auto c = pos(m);
        c.label = VerdictLabel::NotSupported;
        return c;
    }
    if (std::regex_search(lowered, m, supported)) {
        auto c = pos(m);
        c.label = has_negation(lowered) ? VerdictLabel::NotSupported : VerdictLabel::Supported;
        return c;
    }
    return std::nullopt;
}

// The clause around a match: bounded by , ; : or the sentence edges.
inline std::string clause_around(const std::string& sentence, std::size_t begin, std::size_t end) {
    std::size_t from = sentence.find_last_of(",;:", begin == 0 ? 0 : begin - 1);
    from = (from == std::string::npos || from >= begin) ? 0 : from + 1;
    std::size_t to = sentence.find_first_of(",;:", end);
    if (to == std::string::npos) to = sentence.size();
    auto clause = std::string(text::trim(std::string_view(sentence).substr(from, to - from)));
    while (!clause.empty() && (clause.back() == '.' || clause.back() == '!' || clause.back() == '?'))
        clause.pop_back();
    return clause;
}

} // namespace detail

/// Reads the persona dialog's conclusion. Only the closing turns are scanned
/// (the last quarter of the dialog, at least three turns) and the latest
/// sentence carrying a decision phrase wins. Partial support is checked
/// first, then refutation, then support; a support phrase under negation in
/// the same sentence reads as NotSupported.
inline Verdict parse_verdict(const std::string& dialog) {
    if (text::is_blank(dialog)) throw PreconditionError("dialog is empty");
    Verdict v;
    v.rationale_dialog = dialog;
    const auto turns = detail::split_turns(dialog);
    const std::size_t n = turns.size();
    const std::size_t window =
        std::min(n, std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * 0.25))));
    for (std::size_t t = n; t > n - window; --t) {
        const auto sentences = text::split_sentences(turns[t - 1].text);
        for (auto s = sentences.rbegin(); s != sentences.rend(); ++s) {
            if (auto cue = detail::classify_sentence(*s)) {
                v.label = cue->label;
                v.confidence_cue = detail::clause_around(*s, cue->begin, cue->end);
                return v;
            }
        }
    }
    return v;
}

inline constexpr std::string_view kClassifyHeader = "CLASSIFY VERDICT";

/// Optional second pass for dialogs the rule table leaves Indeterminate:
/// the model names the conclusion with one fixed label.
inline Verdict classify_with_llm(const std::string& dialog, llm::Backend& gateway) {
    std::string p(kClassifyHeader);
    p += "\nRead the DIALOG below and answer with exactly one of: SUPPORTED, PARTIALLY SUPPORTED, "
         "NOT SUPPORTED, INDETERMINATE. The answer names the conclusion the speakers reach about "
         "the claim.\n\nDIALOG:\n";
    p += dialog;
    auto reply = gateway.complete(llm::make_request(std::move(p), llm::kClassificationTemperature));
    auto answer = text::to_upper(text::trim(reply.content));
    Verdict v;
    v.rationale_dialog = dialog;
    if (answer.rfind("PARTIALLY SUPPORTED", 0) == 0) {
        v.label = VerdictLabel::PartiallySupported;
    } else if (answer.rfind("NOT SUPPORTED", 0) == 0) {
        v.label = VerdictLabel::NotSupported;
    } else if (answer.rfind("SUPPORTED", 0) == 0) {
        v.label = VerdictLabel::Supported;
    } else {
        return v;
    }
    v.confidence_cue = "classifier: " + std::string(text::trim(reply.content));
    return v;
}

} // namespace personae::deconfab
