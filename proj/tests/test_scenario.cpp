#include <gtest/gtest.h>

#include "personae/llm/mock_backend.hpp"
#include "personae/scenario/engine.hpp"
#include "personae/scenario/spec_file.hpp"
#include "support.hpp"

using namespace personae;
using namespace personae::scenario;
using llm::ScriptEntry;

namespace {

ScenarioFile feynman_noether() { return load_scenario_file(testing_support::data("feynman_noether.yaml")); }

llm::BackendHandle feynman_mock() { return llm::load_mock(testing_support::data("feynman_noether_mock.json")); }

ScenarioSpec small_spec() {
    ScenarioSpec s;
    s.setting = "Two chemists share a bench.";
    s.personae = {{"Marie Curie", "Radioactivity", "CURIE"}, {"Linus Pauling", "Bonds", "PAULING"}};
    s.opening_direction = "CURIE (lighting a burner) Shall we begin?";
    return s;
}

std::shared_ptr<llm::MockBackend> replies(std::vector<std::string> texts) {
    std::vector<ScriptEntry> script;
    for (auto& t : texts) script.push_back({std::nullopt, std::move(t)});
    return std::make_shared<llm::MockBackend>(std::move(script));
}

} // namespace

TEST(Personae, SelectionPrompt) {
    EXPECT_EQ(persona_selection_prompt("deceased physicists", 2), "Suggest the names of two deceased physicists");
    EXPECT_EQ(persona_selection_prompt("x", 12), "Suggest the names of 12 x");
    EXPECT_EQ(speaking_label_for("Richard Feynman"), "FEYNMAN");
    EXPECT_EQ(speaking_label_for("Plato"), "PLATO");
}

TEST(Personae, ParsesNumberedPersonaReply) {
    auto mock = replies({testing_support::read_data("persona_reply.txt")});
    auto s = suggest_personae("deceased physicists, one a world-class expert in quantum mechanics and one a "
                              "world-class expert in symmetries in nature",
                              *mock);
    EXPECT_FALSE(s.parse_failure);
    ASSERT_EQ(s.personae.size(), 2u);
    EXPECT_EQ(s.personae[0].name, "Richard Feynman");
    EXPECT_EQ(s.personae[0].speaking_label, "FEYNMAN");
    EXPECT_EQ(s.personae[1].name, "Emmy Noether");
    EXPECT_EQ(s.personae[1].speaking_label, "NOETHER");
    EXPECT_EQ(s.personae[1].epithet.rfind("Noether was a German mathematician", 0), 0u);
    EXPECT_EQ(mock->calls()[0].messages[0].content.rfind("Suggest the names of two deceased physicists", 0), 0u);
}

TEST(Personae, NumberedAndBoldedLines) {
    auto p = parse_persona_reply("1. **Marie Curie**: Chemist.\n2) Linus Pauling - Bonds.\n- Niels Bohr: Atoms.");
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0].name, "Marie Curie");
    EXPECT_EQ(p[1].name, "Linus Pauling");
    EXPECT_EQ(p[2].speaking_label, "BOHR");
}

TEST(Personae, ShortReplyFlagsParseFailure) {
    auto mock = replies({"Richard Feynman: a physicist."});
    auto s = suggest_personae("physicists", *mock);
    EXPECT_TRUE(s.parse_failure);
    EXPECT_EQ(s.personae.size(), 1u);
}

TEST(Personae, EmptyCriteriaRejected) {
    auto mock = replies({"x"});
    EXPECT_THROW(suggest_personae("  ", *mock), PreconditionError);
    EXPECT_EQ(mock->call_count(), 0u);
}

TEST(Compose, LayoutWithPropsAndDirectionLast) {
    auto spec = feynman_noether().spec;
    auto text = compose_scenario_text(spec);
    auto lines = text::split_lines(text);
    ASSERT_GE(lines.size(), 4u);
    EXPECT_EQ(lines[0].rfind("Scenario: Richard Feynman and Elly Noether", 0), 0u);
    EXPECT_EQ(lines[1], "Props: A whiteboard and markers.");
    EXPECT_EQ(lines[2], "Use $$ and $ to delimit mathematical notation in the response.");
    EXPECT_EQ(lines.back().rfind("FEYNMAN (taking the marker", 0), 0u);
    auto req = compose_scenario(spec);
    EXPECT_DOUBLE_EQ(req.temperature, 0.7);
    EXPECT_EQ(req.messages[0].content, text);
}

TEST(Compose, NoPropsLineWhenEmptyAndDeterministic) {
    auto spec = small_spec();
    auto text = compose_scenario_text(spec);
    EXPECT_EQ(text.find("Props:"), std::string::npos);
    EXPECT_EQ(text, compose_scenario_text(spec));
    EXPECT_EQ(text, "Scenario: Two chemists share a bench.\nCURIE (lighting a burner) Shall we begin?");
}

TEST(Compose, SpecValidation) {
    auto s = small_spec();
    s.setting = "";
    EXPECT_THROW(compose_scenario_text(s), PreconditionError);
    s = small_spec();
    s.personae[1].speaking_label = "CURIE";
    EXPECT_THROW(compose_scenario_text(s), PreconditionError);
    s = small_spec();
    s.opening_direction = "Someone speaks.";
    EXPECT_THROW(compose_scenario_text(s), PreconditionError);
    s = small_spec();
    s.personae.clear();
    EXPECT_THROW(compose_scenario_text(s), PreconditionError);
}

TEST(Attribution, DetectsLabelsAtLineStart) {
    std::vector<std::string> labels{"FEYNMAN", "NOETHER"};
    auto body = "FEYNMAN (writing on the whiteboard): So.\n\n**NOETHER:** Yes.\nThe word FEYNMAN: mid-line.";
    EXPECT_EQ(detect_speaker_labels(body, labels), labels);
    EXPECT_TRUE(detect_speaker_labels("Narration only.", labels).empty());

    auto segs = attribute_segments("Intro.\nFEYNMAN: a\nmore\nNOETHER: b", labels);
    ASSERT_EQ(segs.size(), 3u);
    EXPECT_EQ(segs[0].speaker, "");
    EXPECT_EQ(segs[1].speaker, "FEYNMAN");
    EXPECT_EQ(segs[1].text, "FEYNMAN: a\nmore");
    EXPECT_EQ(segs[2].speaker, "NOETHER");
}

TEST(Session, StartRecordsOpeningExchange) {
    auto spec = feynman_noether().spec;
    auto mock = feynman_mock();
    auto s = start_session(spec, *mock);
    ASSERT_EQ(s.turns.size(), 2u);
    EXPECT_TRUE(s.active());
    EXPECT_EQ(s.turns[0].origin, Origin::operator_turn);
    EXPECT_EQ(s.turns[0].text, compose_scenario_text(spec));
    EXPECT_EQ(s.turns[1].origin, Origin::model);
    EXPECT_EQ(s.turns[1].speaker_labels, (std::vector<std::string>{"FEYNMAN", "NOETHER"}));
}

TEST(Session, GatewayFailureOnStartStopsSession) {
    auto mock = replies({});
    auto s = start_session(small_spec(), *mock);
    EXPECT_FALSE(s.active());
    EXPECT_EQ(s.turns.size(), 1u);
    EXPECT_FALSE(s.error_note.empty());
}

TEST(Session, NudgeSendsFullHistory) {
    auto mock = replies({"CURIE: Hello.", "PAULING: Hi."});
    auto s = start_session(small_spec(), *mock);
    auto t = nudge(s, "PAULING: Say hi.", *mock);
    EXPECT_EQ(t.text, "PAULING: Hi.");
    EXPECT_EQ(t.index, 3);
    ASSERT_EQ(s.turns.size(), 4u);
    const auto calls = mock->calls();
    const auto& req = calls[1];
    ASSERT_EQ(req.messages.size(), 3u);
    EXPECT_EQ(req.messages[1].role, llm::Role::assistant);
    EXPECT_EQ(req.messages[2].content, "PAULING: Say hi.");
    EXPECT_THROW(nudge(s, " ", *mock), PreconditionError);
}

TEST(Session, FailedNudgeAppendsNothing) {
    auto mock = replies({"CURIE: Hello."});
    auto s = start_session(small_spec(), *mock);
    EXPECT_THROW(nudge(s, "PAULING: more", *mock), ScriptExhausted);
    EXPECT_EQ(s.turns.size(), 2u);
    EXPECT_TRUE(s.active());
}

TEST(Session, ContinueSendsSentinelAndTracksLength) {
    std::vector<ScriptEntry> script{{std::nullopt, "CURIE: Let me explain", llm::FinishReason::length},
                                    {std::nullopt, "the rest.", llm::FinishReason::stop}};
    auto mock = std::make_shared<llm::MockBackend>(script);
    auto s = start_session(small_spec(), *mock);
    EXPECT_TRUE(s.needs_continue);
    EXPECT_TRUE(s.turns[1].truncated);
    continue_session(s, *mock);
    EXPECT_FALSE(s.needs_continue);
    EXPECT_EQ(s.turns[2].text, "...");
    EXPECT_EQ(mock->calls()[1].messages.back().content, "...");
}

TEST(Session, EmptyContinueReplyEndsSession) {
    auto mock = replies({"CURIE: Done.", ""});
    auto s = start_session(small_spec(), *mock);
    continue_session(s, *mock);
    EXPECT_FALSE(s.active());
    EXPECT_EQ(s.turns.size(), 4u);
}

TEST(Session, StoppedSessionRejectsEverything) {
    auto mock = replies({"CURIE: Hello.", "unused"});
    auto s = start_session(small_spec(), *mock);
    stop_session(s);
    EXPECT_THROW(nudge(s, "x", *mock), SessionStopped);
    EXPECT_THROW(continue_session(s, *mock), SessionStopped);
    EXPECT_EQ(mock->call_count(), 1u);
}

TEST(RunScript, ReplaysScriptedSessionToSixteenTurns) {
    auto file = feynman_noether();
    ASSERT_EQ(file.script.steps.size(), 7u);
    auto mock = feynman_mock();
    auto s = run_script(file.spec, file.script, *mock);
    ASSERT_EQ(s.turns.size(), 16u);
    EXPECT_TRUE(s.error_note.empty());
    for (std::size_t i = 0; i < s.turns.size(); ++i) {
        EXPECT_EQ(s.turns[i].index, static_cast<int>(i));
        EXPECT_EQ(s.turns[i].origin, i % 2 == 0 ? Origin::operator_turn : Origin::model);
    }
    EXPECT_EQ(s.turns[8].text, "...");
    EXPECT_EQ(s.turns[3].text.rfind("FEYNMAN: You're right", 0), 0u);
    EXPECT_EQ(s.turns.back().speaker_labels, (std::vector<std::string>{"FEYNMAN", "NOETHER"}));
}

TEST(RunScript, EmptyScriptAndStopFirst) {
    auto mock = replies({"CURIE: a", "CURIE: b"});
    auto s = run_script(small_spec(), {}, *mock);
    EXPECT_EQ(s.turns.size(), 2u);
    EXPECT_TRUE(s.active());

    auto mock2 = replies({"CURIE: a", "CURIE: b"});
    auto stopped = run_script(small_spec(), {{{StepKind::stop, ""}}}, *mock2);
    EXPECT_EQ(stopped.turns.size(), 2u);
    EXPECT_FALSE(stopped.active());
    EXPECT_EQ(mock2->call_count(), 1u);
}

TEST(RunScript, ScriptValidation) {
    auto mock = replies({"a"});
    NudgeScript early_stop{{{StepKind::stop, ""}, {StepKind::nudge, "x"}}};
    EXPECT_THROW(run_script(small_spec(), early_stop, *mock), PreconditionError);
    NudgeScript blank{{{StepKind::nudge, " "}}};
    EXPECT_THROW(run_script(small_spec(), blank, *mock), PreconditionError);
}

TEST(RunScript, GatewayFailureMidScriptStops) {
    auto mock = replies({"CURIE: a", "CURIE: b"});
    NudgeScript script{{{StepKind::nudge, "one"}, {StepKind::nudge, "two"}, {StepKind::nudge, "three"}}};
    auto s = run_script(small_spec(), script, *mock);
    EXPECT_FALSE(s.active());
    EXPECT_EQ(s.turns.size(), 4u);
    EXPECT_FALSE(s.error_note.empty());
}

TEST(Transcript, PlainExportAlternatesBlocks) {
    auto mock = replies({"CURIE: Hello."});
    auto s = start_session(small_spec(), *mock);
    EXPECT_EQ(export_plain(s), "PROMPT:\n\n" + s.turns[0].text + "\n\nRESPONSE:\n\nCURIE: Hello.\n\n");
}

TEST(Transcript, PlainExportIsByteIdenticalAcrossReplays) {
    auto file = feynman_noether();
    auto a = run_script(file.spec, file.script, *feynman_mock());
    auto b = run_script(file.spec, file.script, *feynman_mock());
    EXPECT_EQ(export_plain(a), export_plain(b));
    EXPECT_EQ(export_structured(a), export_structured(b));
}

TEST(Transcript, StructuredRoundTrip) {
    auto file = feynman_noether();
    auto s = run_script(file.spec, file.script, *feynman_mock());
    auto back = import_structured(export_structured(s));
    EXPECT_EQ(back.turns, s.turns);
    EXPECT_EQ(back.spec, s.spec);
    EXPECT_EQ(back.status, s.status);
    EXPECT_EQ(export_structured(back), export_structured(s));
}

TEST(Transcript, ImportRejectsGaps) {
    auto mock = replies({"CURIE: Hello."});
    auto j = session_to_json(start_session(small_spec(), *mock));
    j["turns"][1]["index"] = 5;
    EXPECT_THROW(import_structured(j.dump()), ParseFailure);
}

TEST(Transcript, SnapshotFollowsEveryTurn) {
    testing_support::TempDir dir;
    auto mock = replies({"CURIE: Hello.", "PAULING: Hi."});
    auto s = start_session(small_spec(), *mock, dir / "snap.json");
    EXPECT_EQ(import_structured(files::read_all(dir / "snap.json")).turns.size(), 2u);
    nudge(s, "PAULING: go", *mock);
    EXPECT_EQ(import_structured(files::read_all(dir / "snap.json")).turns.size(), 4u);
    stop_session(s);
    EXPECT_EQ(import_structured(files::read_all(dir / "snap.json")).status, SessionStatus::stopped);
}

TEST(ScenarioFile, YamlAndJsonForms) {
    auto f = feynman_noether();
    EXPECT_EQ(f.spec.props, std::vector<std::string>{"A whiteboard and markers."});
    EXPECT_EQ(f.spec.personae.size(), 2u);
    EXPECT_EQ(f.script.steps[3].kind, StepKind::continue_);

    nlohmann::json j = small_spec();
    j["steps"] = {{{"kind", "nudge"}, {"text", "hi"}}, {{"kind", "stop"}}};
    auto g = parse_scenario_file(j.dump());
    EXPECT_EQ(g.spec, small_spec());
    ASSERT_EQ(g.script.steps.size(), 2u);
    EXPECT_EQ(g.script.steps[1].kind, StepKind::stop);
}

TEST(ScenarioFile, Errors) {
    EXPECT_THROW(parse_scenario_file("key: [unclosed"), ParseFailure);
    EXPECT_THROW(parse_scenario_file("- a list"), ParseFailure);
    EXPECT_THROW(parse_scenario_file("setting: x"), PreconditionError);
    EXPECT_THROW(load_scenario_file("/nonexistent.yaml"), IoFailure);
}
