#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "personae/util/files.hpp"

namespace personae::retrieval {

struct SearchHit {
    std::string url;
    std::string site;  // registrable domain
    std::string title;
    std::string snippet;
    int rank = 1;      // 1 = top of the provider's response

    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SearchHit, url, site, title, snippet, rank)

struct RankedSite {
    std::string site;
    double quality_score = 0.0;

    friend bool operator==(const RankedSite&, const RankedSite&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RankedSite, site, quality_score)

struct EvidenceBundle {
    std::string claim_text;
    std::vector<SearchHit> snippets;
    files::Timestamp retrieved_at{};

    bool empty() const { return snippets.empty(); }
};

inline void to_json(nlohmann::json& j, const EvidenceBundle& b) {
    j = {{"claim_text", b.claim_text},
         {"snippets", b.snippets},
         {"retrieved_at", files::format_timestamp(b.retrieved_at)}};
}

inline void from_json(const nlohmann::json& j, EvidenceBundle& b) {
    b.claim_text = j.at("claim_text").get<std::string>();
    b.snippets = j.at("snippets").get<std::vector<SearchHit>>();
    if (j.contains("retrieved_at")) b.retrieved_at = files::parse_timestamp(j["retrieved_at"].get<std::string>());
}

/// A query issued to a provider; `site` restricts results to one domain.
struct SearchQuery {
    std::string text;
    std::optional<std::string> site;

    /// The conventional search-engine spelling, "site:example.org text".
    std::string rendered() const { return site ? "site:" + *site + " " + text : text; }
};

/// Per-site prior quality in [0, 1]. Keys are either exact registrable
/// domains ("nasa.gov") or suffix rules starting with a dot (".edu"); exact
/// keys win, then the longest matching suffix.
class AllowList {
public:
    AllowList() = default;
    explicit AllowList(std::map<std::string, double> table) : table_(std::move(table)) {}

    static AllowList defaults() {
        return AllowList({{".gov", 1.0}, {".mil", 0.9}, {".edu", 0.9}, {".gov.uk", 1.0},
                          {".ac.uk", 0.9}, {".int", 0.8}, {"nature.com", 0.9},
                          {"science.org", 0.9}, {"arxiv.org", 0.7}, {"wikipedia.org", 0.6}});
    }

    double score(const std::string& site) const {
        if (auto it = table_.find(site); it != table_.end()) return it->second;
        double best = 0.0;
        std::size_t best_len = 0;
        for (const auto& [key, value] : table_) {
            if (key.empty() || key.front() != '.') continue;
            if (site.size() > key.size() && site.compare(site.size() - key.size(), key.size(), key) == 0 &&
                key.size() > best_len) {
                best = value;
                best_len = key.size();
            }
        }
        return best;
    }

    const std::map<std::string, double>& table() const { return table_; }

private:
    std::map<std::string, double> table_;
};

} // namespace personae::retrieval
