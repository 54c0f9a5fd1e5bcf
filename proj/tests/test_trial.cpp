#include <gtest/gtest.h>

#include "personae/llm/mock_backend.hpp"
#include "personae/trial/harness.hpp"
#include "support.hpp"

using namespace personae;
using namespace personae::trial;

namespace {

TrialDeps vital_deps(unsigned workers = 1) {
    TrialDeps d;
    d.gateway = llm::load_mock(testing_support::data("vital_trial_mock.json"));
    d.workers = workers;
    return d;
}

} // namespace

TEST(Fixture, ParsesStringEvidenceAndTruth) {
    auto f = load_fixture(testing_support::data("vital_trial.json"));
    EXPECT_EQ(f.claim.text.rfind("The JPL VITAL ventilator project", 0), 0u);
    EXPECT_EQ(f.evidence.snippets.size(), 6u);
    EXPECT_EQ(f.evidence.snippets[5].rank, 6);
    EXPECT_EQ(f.ground_truth, GroundTruth::false_claim);
}

TEST(Fixture, ObjectEvidenceAndErrors) {
    auto f = parse_fixture(R"({"claim":{"id":"x1","assertion_id":2,"text":"c"},
                               "evidence":[{"url":"https://www.nasa.gov/a","snippet":"s"}]})");
    EXPECT_EQ(f.claim.id, "x1");
    EXPECT_EQ(f.evidence.snippets[0].site, "nasa.gov");
    EXPECT_EQ(f.ground_truth, GroundTruth::unknown);
    EXPECT_THROW(parse_fixture(R"({"claim":" "})"), PreconditionError);
    EXPECT_THROW(load_fixture("/nonexistent.json"), IoFailure);
    testing_support::TempDir dir;
    files::write_atomic(dir / "bad.json", "{");
    EXPECT_THROW(load_fixture(dir / "bad.json"), PreconditionError);
}

TEST(Trials, ReproducesOutcomeMix) {
    auto table = run_trials(load_fixture(testing_support::data("vital_trial.json")), 10, vital_deps());
    EXPECT_EQ(table.n, 10);
    EXPECT_EQ(table.count(VerdictLabel::Supported), 0);
    EXPECT_EQ(table.count(VerdictLabel::PartiallySupported), 1);
    EXPECT_EQ(table.count(VerdictLabel::NotSupported), 9);
    EXPECT_EQ(table.count(VerdictLabel::Indeterminate), 0);
    EXPECT_DOUBLE_EQ(table.detection_rate, 0.9);
    EXPECT_EQ(table.failed_trials, 0);
    EXPECT_EQ(table.outcomes[4].label, VerdictLabel::PartiallySupported);
}

TEST(Trials, EveryTrialSendsTheSamePrompt) {
    auto deps = vital_deps();
    auto mock = std::dynamic_pointer_cast<llm::MockBackend>(deps.gateway);
    ASSERT_TRUE(mock);
    run_trials(load_fixture(testing_support::data("vital_trial.json")), 10, deps);
    auto calls = mock->calls();
    ASSERT_EQ(calls.size(), 10u);
    for (const auto& c : calls) EXPECT_EQ(c.messages, calls[0].messages);
}

TEST(Trials, ParallelWorkersGiveSameCounts) {
    auto table = run_trials(load_fixture(testing_support::data("vital_trial.json")), 10, vital_deps(4));
    EXPECT_EQ(table.count(VerdictLabel::NotSupported) + table.count(VerdictLabel::PartiallySupported), 10);
    EXPECT_EQ(table.count(VerdictLabel::PartiallySupported), 1);
}

TEST(Trials, GatewayFailuresCountAsIndeterminate) {
    auto f = load_fixture(testing_support::data("vital_trial.json"));
    TrialDeps d;
    d.gateway = llm::script_mock({{std::nullopt, "Dr. Watson: Well.\n\nSherlock Holmes: The claim is not supported."}});
    auto table = run_trials(f, 3, d);
    EXPECT_EQ(table.count(VerdictLabel::NotSupported), 1);
    EXPECT_EQ(table.count(VerdictLabel::Indeterminate), 2);
    EXPECT_EQ(table.failed_trials, 2);
    EXPECT_NEAR(table.detection_rate, 1.0 / 3, 1e-15);
    EXPECT_NE(format_table(table).find("indeterminate"), std::string::npos);
    EXPECT_NE(format_table(table).find("Failed trials: 2"), std::string::npos);
}

TEST(Trials, Preconditions) {
    auto f = load_fixture(testing_support::data("vital_trial.json"));
    EXPECT_THROW(run_trials(f, 0, vital_deps()), PreconditionError);
    EXPECT_THROW(run_trials(f, 1, TrialDeps{}), PreconditionError);
}

TEST(Tabulate, CountsSumToNAndRateMatchesTruth) {
    std::vector<TrialOutcome> outs(4);
    outs[0].label = VerdictLabel::Supported;
    outs[1].label = VerdictLabel::Supported;
    outs[2].label = VerdictLabel::NotSupported;
    auto t = tabulate(outs, GroundTruth::true_claim);
    int sum = 0;
    for (auto [label, c] : t.counts) sum += c;
    EXPECT_EQ(sum, 4);
    EXPECT_DOUBLE_EQ(t.detection_rate, 0.5);
    EXPECT_DOUBLE_EQ(tabulate(outs, GroundTruth::unknown).detection_rate, 0.25);
    EXPECT_DOUBLE_EQ(tabulate({}, GroundTruth::false_claim).detection_rate, 0.0);
}

TEST(Table, RowsAndFooter) {
    auto table = run_trials(load_fixture(testing_support::data("vital_trial.json")), 10, vital_deps());
    const auto out = format_table(table);
    auto lines = text::split_lines(out);
    ASSERT_GE(lines.size(), 8u);
    EXPECT_EQ(lines[0].rfind("Result of 10 trials", 0), 0u);
    auto row_value = [&](const std::string& label) {
        for (const auto& l : lines)
            if (l.rfind(label + " ", 0) == 0) return std::stoi(l.substr(l.find_last_of(' ') + 1));
        return -1;
    };
    EXPECT_EQ(row_value("supported"), 0);
    EXPECT_EQ(row_value("partially supported"), 1);
    EXPECT_EQ(row_value("not supported"), 9);
    EXPECT_EQ(out.find("indeterminate"), std::string::npos);
    EXPECT_NE(out.find("Truth: Claim is false"), std::string::npos);
    EXPECT_NE(out.find("Detection rate: 0.90"), std::string::npos);
}

TEST(Dump, OneFilePerTrial) {
    testing_support::TempDir dir;
    auto table = run_trials(load_fixture(testing_support::data("vital_trial.json")), 10, vital_deps());
    dump_dialogs(table, dir / "dialogs");
    for (int i = 1; i <= 10; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "trial-%03d.txt", i);
        ASSERT_TRUE(std::filesystem::exists(dir / "dialogs" / name)) << name;
    }
    auto fifth = files::read_all(dir / "dialogs" / "trial-005.txt");
    EXPECT_EQ(fifth.rfind("label: PartiallySupported\n", 0), 0u);
}
