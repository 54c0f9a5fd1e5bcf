#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "personae/error.hpp"
#include "personae/util/files.hpp"
#include "personae/util/text.hpp"
#include "personae/verdict_label.hpp"

namespace personae::memory {

/// A validated claim kept for later retrieval. Records are never mutated
/// once written.
struct MemoryRecord {
    std::string id;
    std::string claim_text;
    VerdictLabel verdict_label = VerdictLabel::Supported;
    std::vector<std::string> source_urls;
    files::Timestamp created_at{};

    friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

inline void to_json(nlohmann::json& j, const MemoryRecord& r) {
    j = {{"id", r.id},
         {"claim_text", r.claim_text},
         {"verdict_label", r.verdict_label},
         {"source_urls", r.source_urls},
         {"created_at", files::format_timestamp(r.created_at)}};
}

inline void from_json(const nlohmann::json& j, MemoryRecord& r) {
    r.id = j.at("id").get<std::string>();
    r.claim_text = j.at("claim_text").get<std::string>();
    auto label = parse_verdict_label(j.at("verdict_label").get<std::string>());
    if (!label) throw std::invalid_argument("unknown verdict label");
    r.verdict_label = *label;
    r.source_urls = j.at("source_urls").get<std::vector<std::string>>();
    r.created_at = files::parse_timestamp(j.at("created_at").get<std::string>());
}

struct SearchResult {
    MemoryRecord record;
    double score = 0.0;
};

inline void to_json(nlohmann::json& j, const SearchResult& r) {
    j = {{"record", r.record}, {"score", r.score}};
}

/// Append-only JSON-lines store of Supported claims with TF-IDF search.
///
/// One writer at a time; readers take a shared lock and see every record
/// whose append has completed.
class MemoryStore {
public:
    /// In-memory store with no backing file.
    MemoryStore() = default;

    /// Loads `path` if it exists; later puts append to it.
    explicit MemoryStore(std::filesystem::path path) : path_(std::move(path)) { load_file(); }

    const std::filesystem::path& path() const { return path_; }

    std::string put(MemoryRecord record) {
        if (record.verdict_label != VerdictLabel::Supported)
            throw NotSupportedLabel("only Supported claims enter the memory store");
        if (text::is_blank(record.claim_text)) throw PreconditionError("memory record has empty claim text");

        std::unique_lock lock(mu_);
        if (record.id.empty()) {
            record.id = next_id();
        } else if (ids_.count(record.id)) {
            throw StorageFailure("duplicate memory record id " + record.id);
        }
        if (record.created_at == files::Timestamp{}) record.created_at = files::Clock::now();
        // the file keeps milliseconds; match it so a reload compares equal
        record.created_at = std::chrono::floor<std::chrono::milliseconds>(record.created_at);

        if (!path_.empty()) {
            std::ofstream out(path_, std::ios::app | std::ios::binary);
            if (!out) throw StorageFailure("cannot open memory store " + path_.string());
            out << nlohmann::json(record).dump() << '\n';
            out.flush();
            if (!out) throw StorageFailure("append to " + path_.string() + " failed");
        }
        index(record);
        records_.push_back(record);
        return record.id;
    }

    /// Top-k records by TF-IDF cosine similarity to `query`; equal scores
    /// rank the more recently added record first.
    std::vector<SearchResult> search(const std::string& query, int k) const {
        if (k < 1) throw PreconditionError("k must be positive");
        std::shared_lock lock(mu_);
        const double n = static_cast<double>(records_.size());
        auto idf = [&](const std::string& term) {
            auto it = doc_freq_.find(term);
            double df = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
            return std::log((n + 1.0) / (df + 1.0)) + 1.0;
        };

        std::map<std::string, double> query_weights;
        for (const auto& t : text::tokenize(query)) query_weights[t] += 1.0;
        double query_norm = 0.0;
        for (auto& [term, w] : query_weights) {
            w *= idf(term);
            query_norm += w * w;
        }
        query_norm = std::sqrt(query_norm);

        std::vector<std::pair<std::size_t, double>> scored;
        scored.reserve(records_.size());
        for (std::size_t i = 0; i < records_.size(); ++i) {
            double dot = 0.0;
            double doc_norm = 0.0;
            for (const auto& [term, tf] : term_freqs_[i]) {
                double w = tf * idf(term);
                doc_norm += w * w;
                if (auto it = query_weights.find(term); it != query_weights.end()) dot += w * it->second;
            }
            double score = (query_norm > 0 && doc_norm > 0) ? dot / (query_norm * std::sqrt(doc_norm)) : 0.0;
            scored.emplace_back(i, score);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first > b.first;
        });
        if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));

        std::vector<SearchResult> out;
        out.reserve(scored.size());
        for (auto [i, score] : scored) out.push_back({records_[i], score});
        return out;
    }

    std::vector<MemoryRecord> records() const {
        std::shared_lock lock(mu_);
        return records_;
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return records_.size();
    }

    /// Lines skipped while loading because they failed to parse.
    std::size_t corrupt_count() const { return corrupt_lines_.size(); }
    const std::vector<std::size_t>& corrupt_lines() const { return corrupt_lines_; }

private:
    void load_file() {
        if (path_.empty() || !std::filesystem::exists(path_)) return;
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw StorageFailure("cannot read memory store " + path_.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (text::is_blank(line)) continue;
            try {
                auto record = nlohmann::json::parse(line).get<MemoryRecord>();
                if (record.verdict_label != VerdictLabel::Supported || ids_.count(record.id))
                    throw std::invalid_argument("inadmissible record");
                index(record);
                records_.push_back(std::move(record));
            } catch (const std::exception& e) {
                corrupt_lines_.push_back(line_no);
                std::fprintf(stderr, "warning: %s:%zu: skipping corrupt memory record (%s)\n",
                             path_.string().c_str(), line_no, e.what());
            }
        }
    }

    std::string next_id() {
        char buf[32];
        do {
            std::snprintf(buf, sizeof buf, "mem-%06zu", ++sequence_);
        } while (ids_.count(buf));
        return buf;
    }

    void index(const MemoryRecord& record) {
        ids_.insert({record.id, records_.size()});
        std::map<std::string, double> tf;
        for (const auto& t : text::tokenize(record.claim_text)) tf[t] += 1.0;
        for (const auto& [term, _] : tf) ++doc_freq_[term];
        term_freqs_.push_back(std::move(tf));
        if (record.id.rfind("mem-", 0) == 0) {
            try {
                sequence_ = std::max<std::size_t>(sequence_, std::stoul(record.id.substr(4)));
            } catch (const std::exception&) {
            }
        }
    }

    std::filesystem::path path_;
    std::vector<MemoryRecord> records_;
    std::unordered_map<std::string, std::size_t> ids_;
    std::vector<std::map<std::string, double>> term_freqs_;
    std::unordered_map<std::string, std::size_t> doc_freq_;
    std::vector<std::size_t> corrupt_lines_;
    std::size_t sequence_ = 0;
    mutable std::shared_mutex mu_;
};

} // namespace personae::memory
