#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <span>
#include <vector>

#include "personae/error.hpp"
#include "personae/retrieval/provider.hpp"
#include "personae/retrieval/types.hpp"

namespace personae::retrieval {

struct RetrievalConfig {
    int top_n = 3;
    int max_snippets = 8;
    std::size_t snippet_chars = 600;
    AllowList allowlist = AllowList::defaults();
    bool parallel = false;  // issue per-site queries concurrently
};

inline constexpr double kRankWeight = 0.5;
inline constexpr double kAllowWeight = 0.5;

/// Site quality: half the mean reciprocal rank of its hits, half its
/// allowlist prior, clamped to [0, 1].
inline double score_site(std::span<const SearchHit> hits_for_site, const AllowList& allowlist) {
    if (hits_for_site.empty()) throw PreconditionError("score_site needs at least one hit");
    const auto& site = hits_for_site.front().site;
    double reciprocal = 0.0;
    for (const auto& h : hits_for_site) {
        if (h.site != site) throw PreconditionError("score_site hits span several sites");
        if (h.rank < 1) throw PreconditionError("search ranks start at 1");
        reciprocal += 1.0 / h.rank;
    }
    const double mean_reciprocal = reciprocal / static_cast<double>(hits_for_site.size());
    const double allow = std::clamp(allowlist.score(site), 0.0, 1.0);
    return std::clamp(kRankWeight * mean_reciprocal + kAllowWeight * allow, 0.0, 1.0);
}

/// Broad pass: one query with the raw claim text, hits grouped per site,
/// top_n sites by score (ties broken by site name).
inline std::vector<RankedSite> select_sites(const std::string& claim, SearchProvider& provider, int top_n,
                                            const AllowList& allowlist = AllowList::defaults()) {
    if (text::is_blank(claim)) throw PreconditionError("claim text is empty");
    if (top_n < 1) throw PreconditionError("top_n must be positive");
    auto hits = provider.search({claim, std::nullopt});
    if (hits.empty()) throw EmptyResults("no search results for claim: " + claim);

    std::map<std::string, std::vector<SearchHit>> by_site;
    for (auto& h : hits) {
        if (h.site.empty()) h.site = registrable_domain(h.url);
        by_site[h.site].push_back(h);
    }
    std::vector<RankedSite> ranked;
    ranked.reserve(by_site.size());
    for (const auto& [site, site_hits] : by_site) ranked.push_back({site, score_site(site_hits, allowlist)});
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedSite& a, const RankedSite& b) {
        return a.quality_score > b.quality_score;
    });
    if (ranked.size() > static_cast<std::size_t>(top_n)) ranked.resize(static_cast<std::size_t>(top_n));
    return ranked;
}

/// Depth pass: one site-restricted query per selected site. Hits are kept in
/// site-score order, then provider rank, and truncated to max_snippets.
inline EvidenceBundle collect_snippets(const std::string& claim, std::span<const RankedSite> sites,
                                       SearchProvider& provider, int max_snippets,
                                       std::size_t snippet_chars = 600, bool parallel = false) {
    if (sites.empty()) throw PreconditionError("collect_snippets needs at least one site");
    if (max_snippets < 1) throw PreconditionError("max_snippets must be positive");

    auto query_site = [&](const RankedSite& site) {
        auto hits = provider.search({claim, site.site});
        std::vector<SearchHit> kept;
        for (auto& h : hits) {
            if (h.site.empty()) h.site = registrable_domain(h.url);
            if (h.site != site.site || text::is_blank(h.snippet)) continue;
            h.snippet = text::utf8_truncate(h.snippet, snippet_chars);
            kept.push_back(std::move(h));
        }
        std::stable_sort(kept.begin(), kept.end(),
                         [](const SearchHit& a, const SearchHit& b) { return a.rank < b.rank; });
        return kept;
    };

    std::vector<std::vector<SearchHit>> per_site(sites.size());
    if (parallel && sites.size() > 1) {
        std::vector<std::future<std::vector<SearchHit>>> pending;
        pending.reserve(sites.size());
        for (const auto& s : sites) pending.push_back(std::async(std::launch::async, query_site, std::cref(s)));
        for (std::size_t i = 0; i < pending.size(); ++i) per_site[i] = pending[i].get();
    } else {
        for (std::size_t i = 0; i < sites.size(); ++i) per_site[i] = query_site(sites[i]);
    }

    EvidenceBundle bundle;
    bundle.claim_text = claim;
    bundle.retrieved_at = files::Clock::now();
    for (auto& hits : per_site) {
        for (auto& h : hits) {
            if (static_cast<int>(bundle.snippets.size()) >= max_snippets) return bundle;
            bundle.snippets.push_back(std::move(h));
        }
    }
    return bundle;
}

} // namespace personae::retrieval
