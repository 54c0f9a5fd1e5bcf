#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "personae/error.hpp"
#include "personae/retrieval/domain.hpp"
#include "personae/retrieval/types.hpp"
#include "personae/util/files.hpp"

namespace personae::retrieval {

/// A web search backend. Must be safe to call from several threads.
class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<SearchHit> search(const SearchQuery& query) = 0;
};

using ProviderHandle = std::shared_ptr<SearchProvider>;

/// Record of the line-delimited fixture corpus.
struct FixtureRecord {
    std::string query;
    SearchHit hit;
};

/// Offline provider over a corpus of {query, url, site, title, snippet, rank}
/// records, one JSON object per line.
///
/// A query matches records whose `query` field equals its rendered form
/// ("site:x text" when site-restricted). A site-restricted query with no such
/// records falls back to the broad records for the same text on that site, so
/// a corpus only needs the broad query unless it wants distinct depth results.
class FixtureProvider final : public SearchProvider {
public:
    explicit FixtureProvider(std::vector<FixtureRecord> records) : records_(std::move(records)) {}

    static FixtureProvider parse(std::string_view contents) {
        std::vector<FixtureRecord> records;
        std::size_t line_no = 0;
        for (const auto& line : text::split_lines(contents)) {
            ++line_no;
            if (text::is_blank(line)) continue;
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw PreconditionError("fixture corpus line " + std::to_string(line_no) + " is not a JSON object");
            FixtureRecord r;
            r.query = j.at("query").get<std::string>();
            r.hit.url = j.value("url", std::string{});
            r.hit.site = j.value("site", std::string{});
            if (r.hit.site.empty()) r.hit.site = registrable_domain(r.hit.url);
            r.hit.title = j.value("title", std::string{});
            r.hit.snippet = j.at("snippet").get<std::string>();
            r.hit.rank = j.at("rank").get<int>();
            records.push_back(std::move(r));
        }
        return FixtureProvider(std::move(records));
    }

    static std::shared_ptr<FixtureProvider> load(const std::filesystem::path& path) {
        return std::make_shared<FixtureProvider>(parse(files::read_all(path)));
    }

    std::vector<SearchHit> search(const SearchQuery& query) override {
        const auto rendered = query.rendered();
        const auto exact = text::trim(rendered);
        std::vector<SearchHit> out;
        for (const auto& r : records_)
            if (text::trim(r.query) == exact) out.push_back(r.hit);
        if (out.empty() && query.site) {
            const auto broad = text::trim(query.text);
            for (const auto& r : records_)
                if (text::trim(r.query) == broad && r.hit.site == *query.site) out.push_back(r.hit);
        }
        return out;
    }

private:
    std::vector<FixtureRecord> records_;
};

struct LiveSearchConfig {
    std::string endpoint;  // base URL of a SearXNG-compatible JSON search API
    std::string api_key;
    double max_queries_per_second = 1.0;
    int timeout_seconds = 20;
    int max_results = 10;
};

/// Overlays PERSONAE_SEARCH_ENDPOINT, PERSONAE_SEARCH_KEY and PERSONAE_SEARCH_QPS.
inline LiveSearchConfig search_config_from_env(LiveSearchConfig base = {}) {
    if (const char* v = std::getenv("PERSONAE_SEARCH_ENDPOINT")) base.endpoint = v;
    if (const char* v = std::getenv("PERSONAE_SEARCH_KEY")) base.api_key = v;
    if (const char* v = std::getenv("PERSONAE_SEARCH_QPS")) base.max_queries_per_second = std::atof(v);
    return base;
}

/// Live provider speaking the SearXNG JSON API:
/// GET {endpoint}/search?q=...&format=json -> {"results": [{url, title, content}]}.
class LiveSearchProvider final : public SearchProvider {
public:
    explicit LiveSearchProvider(LiveSearchConfig config) : config_(std::move(config)) {
        if (config_.endpoint.empty()) throw PreconditionError("live search provider needs an endpoint");
    }

    std::vector<SearchHit> search(const SearchQuery& query) override {
        throttle();
        auto scheme_end = config_.endpoint.find("://");
        auto path_begin = config_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        std::string origin = config_.endpoint.substr(0, path_begin);
        std::string prefix = path_begin == std::string::npos ? "" : config_.endpoint.substr(path_begin);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

        httplib::Client client(origin);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
        httplib::Params params{{"q", query.rendered()}, {"format", "json"}};
        auto res = client.Get(prefix + "/search", params, headers);
        if (!res) throw ProviderUnavailable("search transport error: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw ProviderUnavailable("search endpoint returned HTTP " + std::to_string(res->status));
        auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("results") || !j["results"].is_array())
            throw ProviderUnavailable("malformed search payload");

        std::vector<SearchHit> hits;
        int rank = 0;
        for (const auto& r : j["results"]) {
            if (static_cast<int>(hits.size()) >= config_.max_results) break;
            SearchHit h;
            h.url = r.value("url", std::string{});
            h.title = r.value("title", std::string{});
            h.snippet = r.value("content", std::string{});
            if (h.url.empty() || text::is_blank(h.snippet)) continue;
            h.site = registrable_domain(h.url);
            if (query.site && h.site != *query.site) continue;
            h.rank = ++rank;
            hits.push_back(std::move(h));
        }
        return hits;
    }

private:
    void throttle() {
        if (config_.max_queries_per_second <= 0) return;
        const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / config_.max_queries_per_second));
        std::unique_lock lock(mu_);
        auto now = std::chrono::steady_clock::now();
        auto slot = std::max(now, next_slot_);
        next_slot_ = slot + interval;
        lock.unlock();
        std::this_thread::sleep_until(slot);
    }

    LiveSearchConfig config_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point next_slot_{};
};

} // namespace personae::retrieval
