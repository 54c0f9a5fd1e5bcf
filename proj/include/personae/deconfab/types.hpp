#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "personae/error.hpp"
#include "personae/retrieval/types.hpp"
#include "personae/util/text.hpp"
#include "personae/verdict_label.hpp"

namespace personae::deconfab {

struct Assertion {
    int id = 0;
    std::string text;
    text::Span span;  // byte offsets into the original response

    friend bool operator==(const Assertion&, const Assertion&) = default;
};

inline void to_json(nlohmann::json& j, const Assertion& a) {
    j = {{"id", a.id}, {"text", a.text}, {"span", {a.span.begin, a.span.end}}};
}

struct Claim {
    std::string id;
    int assertion_id = 0;
    std::string text;

    friend bool operator==(const Claim&, const Claim&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Claim, id, assertion_id, text)

struct Verdict {
    VerdictLabel label = VerdictLabel::Indeterminate;
    std::string rationale_dialog;
    std::string confidence_cue;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Verdict, label, rationale_dialog, confidence_cue)

struct VerifiedClaim {
    Claim claim;
    Verdict verdict;
    retrieval::EvidenceBundle evidence;
    double elapsed_ms = 0.0;
    std::vector<std::string> flags;
};

/// Names of the two investigators staged in the verdict dialog.
struct PersonaPair {
    std::string lead = "Sherlock Holmes";
    std::string partner = "Watson";
    std::string partner_relation = "his assistant";
    std::string skills = "their famous detective skills";
};

struct DeconfabReport {
    std::string original;
    std::string rewritten;
    std::vector<VerifiedClaim> claims;
    std::vector<std::string> dropped;
    std::vector<std::string> flags;
    double total_ms = 0.0;

    std::vector<const VerifiedClaim*> kept() const {
        std::vector<const VerifiedClaim*> out;
        for (const auto& c : claims)
            if (c.verdict.label == VerdictLabel::Supported) out.push_back(&c);
        return out;
    }
};

inline nlohmann::json verified_claim_to_json(const VerifiedClaim& vc, bool include_volatile = true) {
    nlohmann::json urls = nlohmann::json::array();
    for (const auto& h : vc.evidence.snippets) urls.push_back(h.url);
    nlohmann::json c = {{"claim", vc.claim},
                        {"verdict", vc.verdict},
                        {"evidence", vc.evidence},
                        {"source_urls", urls},
                        {"flags", vc.flags}};
    if (include_volatile) {
        c["elapsed_ms"] = vc.elapsed_ms;
    } else {
        c["evidence"].erase("retrieved_at");
    }
    return c;
}

/// Serialized report. With `include_volatile` false, timestamps and timings
/// are omitted so equal inputs serialize to equal bytes.
inline nlohmann::json report_to_json(const DeconfabReport& r, bool include_volatile = true) {
    nlohmann::json claims = nlohmann::json::array();
    for (const auto& vc : r.claims) claims.push_back(verified_claim_to_json(vc, include_volatile));
    nlohmann::json j = {{"original", r.original},
                        {"rewritten", r.rewritten},
                        {"claims", claims},
                        {"dropped", r.dropped},
                        {"flags", r.flags}};
    if (include_volatile) j["timing"] = {{"total_ms", r.total_ms}};
    return j;
}

/// Failure while verifying one claim; carries the claim id.
class ClaimVerificationError : public Error {
public:
    ClaimVerificationError(std::string claim_id, const std::string& what, bool gateway_failure)
        : Error("claim " + claim_id + ": " + what),
          claim_id_(std::move(claim_id)),
          gateway_failure_(gateway_failure) {}

    const std::string& claim_id() const { return claim_id_; }
    bool gateway_failure() const { return gateway_failure_; }

private:
    std::string claim_id_;
    bool gateway_failure_;
};

/// A fatal dependency failure during deconfabulation, with whatever part of
/// the report was finished before it.
class DeconfabError : public Error {
public:
    DeconfabError(const std::string& what, DeconfabReport partial)
        : Error(what), partial_(std::move(partial)) {}

    const DeconfabReport& partial() const { return partial_; }

private:
    DeconfabReport partial_;
};

} // namespace personae::deconfab
