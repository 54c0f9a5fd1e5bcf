#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <future>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "personae/deconfab/pipeline.hpp"
#include "personae/util/files.hpp"

namespace personae::trial {

enum class GroundTruth { true_claim, false_claim, unknown };

NLOHMANN_JSON_SERIALIZE_ENUM(GroundTruth, {{GroundTruth::unknown, "unknown"},
                                           {GroundTruth::true_claim, "true"},
                                           {GroundTruth::false_claim, "false"}})

/// One claim with fixed evidence. Retrieval is bypassed so every trial sends
/// an identical prompt.
struct TrialFixture {
    deconfab::Claim claim;
    retrieval::EvidenceBundle evidence;
    GroundTruth ground_truth = GroundTruth::unknown;
};

inline TrialFixture parse_fixture(const std::string& contents) {
    auto j = nlohmann::json::parse(contents);
    TrialFixture f;
    if (j.at("claim").is_string()) {
        f.claim.id = "trial";
        f.claim.text = j["claim"].get<std::string>();
    } else {
        f.claim = j["claim"].get<deconfab::Claim>();
    }
    f.evidence.claim_text = f.claim.text;
    if (j.contains("evidence")) {
        int rank = 0;
        for (const auto& e : j["evidence"]) {
            retrieval::SearchHit h;
            if (e.is_string()) {
                h.snippet = e.get<std::string>();
            } else {
                h.url = e.value("url", std::string{});
                h.site = e.value("site", std::string{});
                if (h.site.empty() && !h.url.empty()) h.site = retrieval::registrable_domain(h.url);
                h.title = e.value("title", std::string{});
                h.snippet = e.at("snippet").get<std::string>();
            }
            h.rank = ++rank;
            f.evidence.snippets.push_back(std::move(h));
        }
    }
    f.ground_truth = j.value("ground_truth", GroundTruth::unknown);
    if (text::is_blank(f.claim.text)) throw PreconditionError("trial fixture has an empty claim");
    return f;
}

inline TrialFixture load_fixture(const std::filesystem::path& path) {
    try {
        return parse_fixture(files::read_all(path));
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError("malformed trial fixture " + path.string() + ": " + e.what());
    }
}

/// The label a trial must produce to count as a correct detection.
inline VerdictLabel expected_label(GroundTruth truth) {
    switch (truth) {
        case GroundTruth::false_claim: return VerdictLabel::NotSupported;
        case GroundTruth::true_claim: return VerdictLabel::Supported;
        case GroundTruth::unknown: return VerdictLabel::Indeterminate;
    }
    return VerdictLabel::Indeterminate;
}

struct TrialOutcome {
    VerdictLabel label = VerdictLabel::Indeterminate;
    std::string dialog;
    std::string error;  // gateway failure, counted as Indeterminate
};

struct TrialTable {
    int n = 0;
    std::map<VerdictLabel, int> counts;
    double detection_rate = 0.0;
    GroundTruth ground_truth = GroundTruth::unknown;
    int failed_trials = 0;
    std::vector<TrialOutcome> outcomes;

    int count(VerdictLabel label) const {
        auto it = counts.find(label);
        return it == counts.end() ? 0 : it->second;
    }
};

struct TrialDeps {
    llm::BackendHandle gateway;
    deconfab::PersonaPair personae;
    bool llm_verdict_pass = false;
    unsigned workers = 1;
};

/// Tallies already-classified outcomes.
inline TrialTable tabulate(std::vector<TrialOutcome> outcomes, GroundTruth truth) {
    TrialTable t;
    t.n = static_cast<int>(outcomes.size());
    t.ground_truth = truth;
    for (auto label : kAllVerdictLabels) t.counts[label] = 0;
    for (const auto& o : outcomes) {
        ++t.counts[o.label];
        if (!o.error.empty()) ++t.failed_trials;
    }
    t.detection_rate = t.n == 0 ? 0.0 : static_cast<double>(t.count(expected_label(truth))) / t.n;
    t.outcomes = std::move(outcomes);
    return t;
}

/// n independent adjudications of the fixture. Each trial builds its prompt
/// from scratch; nothing carries over between trials.
inline TrialTable run_trials(const TrialFixture& fixture, int n, const TrialDeps& deps) {
    if (n < 1) throw PreconditionError("trial count must be positive");
    if (!deps.gateway) throw PreconditionError("run_trials needs a gateway");

    auto one = [&]() {
        TrialOutcome o;
        try {
            auto v = deconfab::adjudicate(fixture.claim, fixture.evidence, *deps.gateway, deps.personae,
                                          deps.llm_verdict_pass);
            o.label = v.label;
            o.dialog = v.rationale_dialog;
        } catch (const GatewayError& e) {
            o.label = VerdictLabel::Indeterminate;
            o.error = e.what();
        }
        return o;
    };

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(n));
    const unsigned workers = std::max(1u, std::min<unsigned>(deps.workers, static_cast<unsigned>(n)));
    if (workers == 1) {
        for (auto& o : outcomes) o = one();
    } else {
        std::vector<std::future<void>> parts;
        for (unsigned w = 0; w < workers; ++w) {
            parts.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < outcomes.size(); i += workers) outcomes[i] = one();
            }));
        }
        for (auto& p : parts) p.get();
    }
    return tabulate(std::move(outcomes), fixture.ground_truth);
}

inline std::string truth_line(GroundTruth truth) {
    switch (truth) {
        case GroundTruth::false_claim: return "Truth: Claim is false";
        case GroundTruth::true_claim: return "Truth: Claim is true";
        case GroundTruth::unknown: return "Truth: unknown";
    }
    return "Truth: unknown";
}

/// Plain-text table: one row per label (indeterminate only when nonzero),
/// then the ground truth and detection rate.
inline std::string format_table(const TrialTable& table) {
    std::vector<std::pair<std::string, int>> rows = {
        {"supported", table.count(VerdictLabel::Supported)},
        {"partially supported", table.count(VerdictLabel::PartiallySupported)},
        {"not supported", table.count(VerdictLabel::NotSupported)},
    };
    if (table.count(VerdictLabel::Indeterminate) > 0)
        rows.emplace_back("indeterminate", table.count(VerdictLabel::Indeterminate));

    const std::string heading = "Result of " + std::to_string(table.n) + " trials";
    std::size_t width = heading.size();
    for (const auto& [label, _] : rows) width = std::max(width, label.size());
    auto pad = [width](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };

    std::string out = pad(heading) + "n\n";
    const std::string rule(width + 2 + 4, '-');
    out += rule + "\n";
    for (const auto& [label, count] : rows) out += pad(label) + std::to_string(count) + "\n";
    out += rule + "\n";
    out += truth_line(table.ground_truth) + "\n";
    char rate[64];
    std::snprintf(rate, sizeof rate, "Detection rate: %.2f\n", table.detection_rate);
    out += rate;
    if (table.failed_trials > 0) out += "Failed trials: " + std::to_string(table.failed_trials) + "\n";
    return out;
}

/// Writes each trial's raw dialog to dir/trial-NNN.txt for manual audit.
inline void dump_dialogs(const TrialTable& table, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < table.outcomes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "trial-%03zu.txt", i + 1);
        const auto& o = table.outcomes[i];
        std::string body = "label: " + std::string(to_string(o.label)) + "\n";
        if (!o.error.empty()) body += "error: " + o.error + "\n";
        body += "\n" + o.dialog + "\n";
        files::write_atomic(dir / name, body);
    }
}

} // namespace personae::trial
