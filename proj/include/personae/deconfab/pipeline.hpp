#pragma once

#include <chrono>
#include <future>
#include <memory>
#include <string>
#include <vector>

#include "personae/deconfab/segment.hpp"
#include "personae/deconfab/types.hpp"
#include "personae/deconfab/verdict.hpp"
#include "personae/llm/backend.hpp"
#include "personae/memory/store.hpp"
#include "personae/retrieval/evidence.hpp"

namespace personae::deconfab {

inline constexpr std::string_view kNoVerifiedDisclaimer = "No statements could be verified.";

struct PipelineConfig {
    retrieval::RetrievalConfig retrieval;
    bool llm_verdict_pass = false;   // second classification pass for Indeterminate dialogs
    bool parallel_claims = false;    // verify claims concurrently
};

struct PipelineDeps {
    llm::BackendHandle gateway;
    retrieval::ProviderHandle provider;
    PipelineConfig config;
    PersonaPair personae;
    std::shared_ptr<memory::MemoryStore> memory;  // optional sink for Supported claims
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

} // namespace detail

/// Verdict for one claim given evidence already in hand. An empty bundle can
/// never yield Supported or PartiallySupported; those degrade to Indeterminate.
inline Verdict adjudicate(const Claim& claim, const retrieval::EvidenceBundle& evidence, llm::Backend& gateway,
                          const PersonaPair& personae, bool llm_verdict_pass, std::vector<std::string>* flags = nullptr) {
    auto reply = gateway.complete(build_verdict_prompt(claim, evidence, personae));
    Verdict v = text::is_blank(reply.content) ? Verdict{} : parse_verdict(reply.content);
    v.rationale_dialog = reply.content;
    if (v.label == VerdictLabel::Indeterminate && llm_verdict_pass && !text::is_blank(reply.content)) {
        v = classify_with_llm(reply.content, gateway);
        if (flags) flags->push_back("llm_verdict_pass");
    }
    if (evidence.empty() &&
        (v.label == VerdictLabel::Supported || v.label == VerdictLabel::PartiallySupported)) {
        v.label = VerdictLabel::Indeterminate;
        v.confidence_cue.clear();
        if (flags) flags->push_back("empty_evidence_override");
    }
    return v;
}

/// Steps (2)-(4) for one claim: broad site selection, site-scoped snippet
/// search, the persona-dialog prompt and its parsed verdict.
inline VerifiedClaim verify_claim(const Claim& claim, const PipelineDeps& deps) {
    if (!deps.gateway || !deps.provider) throw PreconditionError("verify_claim needs a gateway and a provider");
    const auto started = std::chrono::steady_clock::now();
    const auto& rc = deps.config.retrieval;
    VerifiedClaim out;
    out.claim = claim;
    out.evidence.claim_text = claim.text;
    try {
        std::vector<retrieval::RankedSite> sites;
        try {
            sites = retrieval::select_sites(claim.text, *deps.provider, rc.top_n, rc.allowlist);
        } catch (const EmptyResults&) {
            out.evidence.retrieved_at = files::Clock::now();
            out.flags.push_back("no_search_results");
            out.elapsed_ms = detail::elapsed_ms(started);
            return out;
        }
        out.evidence = retrieval::collect_snippets(claim.text, sites, *deps.provider, rc.max_snippets,
                                                   rc.snippet_chars, rc.parallel);
        out.verdict = adjudicate(claim, out.evidence, *deps.gateway, deps.personae, deps.config.llm_verdict_pass,
                                 &out.flags);
    } catch (const GatewayError& e) {
        throw ClaimVerificationError(claim.id, e.what(), true);
    } catch (const ProviderUnavailable& e) {
        throw ClaimVerificationError(claim.id, e.what(), false);
    }
    out.elapsed_ms = detail::elapsed_ms(started);
    return out;
}

inline constexpr std::string_view kRewriteHeader = "REASSEMBLE VALIDATED CLAIMS";

/// Step (5): the surviving claims rewritten in the original's style. With no
/// survivors the fixed disclaimer is returned without calling the model.
inline std::string reassemble(const std::string& original, const std::vector<VerifiedClaim>& survivors,
                              llm::Backend* gateway) {
    if (survivors.empty()) return std::string(kNoVerifiedDisclaimer);
    for (const auto& s : survivors)
        if (s.verdict.label != VerdictLabel::Supported)
            throw PreconditionError("reassemble accepts Supported claims only (" + s.claim.id + ")");
    if (!gateway) throw PreconditionError("reassemble needs a gateway when claims survive");
    std::string p(kRewriteHeader);
    p += "\nRewrite the ORIGINAL RESPONSE using only the VALIDATED CLAIMS listed below. Match the "
         "original's voice, register and formatting. State nothing that is not among the validated "
         "claims.\n\nORIGINAL RESPONSE:\n";
    p += original;
    p += "\n\nVALIDATED CLAIMS:";
    for (const auto& s : survivors) p += "\n- " + s.claim.text;
    return gateway->complete(llm::make_request(std::move(p), llm::kClassificationTemperature)).content;
}

/// Full five-step pass over a response. Only Supported claims survive into
/// the rewrite; everything else is listed in `dropped`. A fatal dependency
/// failure throws DeconfabError holding the partial report.
inline DeconfabReport deconfabulate(const std::string& response, const PipelineDeps& deps) {
    if (text::is_blank(response)) throw PreconditionError("response to deconfabulate is empty");
    if (!deps.gateway || !deps.provider) throw PreconditionError("deconfabulate needs a gateway and a provider");
    const auto started = std::chrono::steady_clock::now();
    DeconfabReport report;
    report.original = response;

    auto fail = [&](const std::exception& e) -> DeconfabError {
        report.total_ms = detail::elapsed_ms(started);
        return DeconfabError(e.what(), report);
    };

    std::vector<Claim> claims;
    try {
        auto seg = segment_assertions(response, deps.gateway.get());
        if (seg.fallback) report.flags.push_back("segmentation_fallback");
        for (const auto& assertion : seg.assertions) {
            auto atoms = atomize_claims(assertion, deps.gateway.get());
            if (atoms.fallback) report.flags.push_back("atomization_fallback:a" + std::to_string(assertion.id));
            claims.insert(claims.end(), atoms.claims.begin(), atoms.claims.end());
        }
    } catch (const Error& e) {
        throw fail(e);
    }

    if (deps.config.parallel_claims && claims.size() > 1) {
        std::vector<std::future<VerifiedClaim>> pending;
        pending.reserve(claims.size());
        for (const auto& c : claims)
            pending.push_back(std::async(std::launch::async, [&deps, &c] { return verify_claim(c, deps); }));
        std::optional<ClaimVerificationError> first_error;
        for (auto& f : pending) {
            try {
                report.claims.push_back(f.get());
            } catch (const ClaimVerificationError& e) {
                if (!first_error) first_error = e;
            }
        }
        if (first_error) throw fail(*first_error);
    } else {
        for (const auto& c : claims) {
            try {
                report.claims.push_back(verify_claim(c, deps));
            } catch (const ClaimVerificationError& e) {
                throw fail(e);
            }
        }
    }

    std::vector<VerifiedClaim> survivors;
    for (const auto& vc : report.claims) {
        if (vc.verdict.label == VerdictLabel::Supported)
            survivors.push_back(vc);
        else
            report.dropped.push_back(vc.claim.id);
    }

    try {
        report.rewritten = reassemble(response, survivors, deps.gateway.get());
    } catch (const GatewayError& e) {
        throw fail(e);
    }

    if (deps.memory) {
        for (const auto& s : survivors) {
            memory::MemoryRecord rec;
            rec.claim_text = s.claim.text;
            rec.verdict_label = VerdictLabel::Supported;
            for (const auto& h : s.evidence.snippets) rec.source_urls.push_back(h.url);
            try {
                deps.memory->put(std::move(rec));
            } catch (const Error& e) {
                throw fail(e);
            }
        }
    }
    report.total_ms = detail::elapsed_ms(started);
    return report;
}

} // namespace personae::deconfab
