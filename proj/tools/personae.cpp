// personae: command-line driver for deconfabulation, trials, scenarios,
// the diffraction grid, the memory store and the HTTP service.

#include <csignal>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "personae/personae.hpp"

namespace {

using namespace personae;

struct GlobalOptions {
    std::string backend = "live";
    std::string provider = "live";
    std::string memory;
    int verbosity = 0;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string selector_path(const std::string& selector, const std::string& prefix) {
    return selector.substr(prefix.size());
}

llm::BackendHandle make_backend(const GlobalOptions& g) {
    if (g.backend == "live") return std::make_shared<llm::HttpBackend>(llm::config_from_env());
    if (g.backend.rfind("mock:", 0) == 0) return llm::load_mock(selector_path(g.backend, "mock:"));
    throw UsageError("--backend must be live or mock:PATH, got '" + g.backend + "'");
}

retrieval::ProviderHandle make_provider(const GlobalOptions& g) {
    if (g.provider == "live") return std::make_shared<retrieval::LiveSearchProvider>(retrieval::search_config_from_env());
    if (g.provider.rfind("fixture:", 0) == 0) return retrieval::FixtureProvider::load(selector_path(g.provider, "fixture:"));
    throw UsageError("--provider must be live or fixture:PATH, got '" + g.provider + "'");
}

std::shared_ptr<memory::MemoryStore> make_memory(const GlobalOptions& g) {
    if (g.memory.empty()) return nullptr;
    auto store = std::make_shared<memory::MemoryStore>(g.memory);
    if (g.verbosity > 0 && store->corrupt_count() > 0)
        std::cerr << "memory: skipped " << store->corrupt_count() << " corrupt line(s)\n";
    return store;
}

void emit(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::cout << body;
        std::cout.flush();
    } else {
        files::write_atomic(path, body);
    }
}

// --- deconfab / verify-claim ------------------------------------------------

struct DeconfabOptions {
    std::string input;
    std::string report;
    int top_n = 3;
    int max_snippets = 8;
    bool llm_verdict_pass = false;
    bool parallel = false;
};

deconfab::PipelineDeps pipeline_deps(const GlobalOptions& g, const DeconfabOptions& o) {
    deconfab::PipelineDeps deps;
    deps.gateway = make_backend(g);
    deps.provider = make_provider(g);
    deps.memory = make_memory(g);
    deps.config.retrieval.top_n = o.top_n;
    deps.config.retrieval.max_snippets = o.max_snippets;
    deps.config.retrieval.parallel = o.parallel;
    deps.config.llm_verdict_pass = o.llm_verdict_pass;
    deps.config.parallel_claims = o.parallel;
    return deps;
}

int run_deconfab(const GlobalOptions& g, const DeconfabOptions& o) {
    const auto response = files::read_all(o.input);
    auto deps = pipeline_deps(g, o);
    try {
        auto report = deconfab::deconfabulate(response, deps);
        emit(o.report, report_to_json(report).dump(2) + "\n");
        if (!o.report.empty() && o.report != "-") std::cout << report.rewritten << "\n";
        return 0;
    } catch (const deconfab::DeconfabError& e) {
        if (!o.report.empty() && o.report != "-")
            files::write_atomic(o.report, nlohmann::json{{"error", e.what()},
                                                         {"partial_report", report_to_json(e.partial())}}
                                              .dump(2) + "\n");
        throw;
    }
}

int run_verify_claim(const GlobalOptions& g, const DeconfabOptions& o, const std::string& claim_text) {
    auto deps = pipeline_deps(g, o);
    deconfab::Claim claim{"a0.c0", 0, claim_text};
    auto vc = deconfab::verify_claim(claim, deps);
    emit(o.report, deconfab::verified_claim_to_json(vc).dump(2) + "\n");
    return 0;
}

// --- trial -----------------------------------------------------------------

struct TrialOptions {
    std::string fixture;
    int n = 10;
    std::string out;
    std::string dump_dir;
    unsigned workers = 1;
    bool llm_verdict_pass = false;
};

int run_trial(const GlobalOptions& g, const TrialOptions& o) {
    auto fixture = trial::load_fixture(o.fixture);
    trial::TrialDeps deps;
    deps.gateway = make_backend(g);
    deps.workers = o.workers;
    deps.llm_verdict_pass = o.llm_verdict_pass;
    auto table = trial::run_trials(fixture, o.n, deps);
    emit(o.out, trial::format_table(table));
    if (!o.dump_dir.empty()) trial::dump_dialogs(table, o.dump_dir);
    return 0;
}

// --- scenario --------------------------------------------------------------

struct ScenarioOptions {
    std::string spec;
    std::string out;
    std::string format = "plain";
    std::string snapshot;
};

scenario::TranscriptFormat transcript_format(const std::string& name) {
    if (name == "plain") return scenario::TranscriptFormat::plain;
    if (name == "structured") return scenario::TranscriptFormat::structured;
    throw UsageError("--format must be plain or structured");
}

std::optional<std::filesystem::path> snapshot_of(const ScenarioOptions& o) {
    if (o.snapshot.empty()) return std::nullopt;
    return std::filesystem::path(o.snapshot);
}

int run_scenario(const GlobalOptions& g, const ScenarioOptions& o) {
    const auto format = transcript_format(o.format);
    auto file = scenario::load_scenario_file(o.spec);
    auto gateway = make_backend(g);
    auto session = scenario::run_script(file.spec, file.script, *gateway, snapshot_of(o));
    emit(o.out, scenario::export_transcript(session, format));
    if (!session.error_note.empty()) {
        std::cerr << "scenario stopped: " << session.error_note << "\n";
        return 1;
    }
    return 0;
}

void print_turn(const scenario::Turn& t) {
    std::cout << "\n" << t.text << "\n";
    if (t.truncated) std::cout << "[reply was cut off; send ... to continue]\n";
    std::cout.flush();
}

constexpr const char* kReplHelp =
    "Type a stage direction or a line of dialog to nudge the scene.\n"
    "  ...            ask the model to continue\n"
    "  :transcript    print the transcript so far\n"
    "  :save PATH     write the structured transcript to PATH\n"
    "  :stop          end the session\n"
    "  :help          show this text\n";

int run_repl(const GlobalOptions& g, const ScenarioOptions& o) {
    const auto format = transcript_format(o.format);
    auto file = scenario::load_scenario_file(o.spec);
    auto gateway = make_backend(g);
    auto session = scenario::start_session(file.spec, *gateway, snapshot_of(o));
    std::cout << session.turns.front().text << "\n";
    if (session.turns.size() > 1) print_turn(session.turns.back());
    if (!session.error_note.empty()) std::cerr << "error: " << session.error_note << "\n";

    std::string line;
    while (session.active()) {
        std::cout << "\n> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        const auto cmd = std::string(text::trim(line));
        if (cmd.empty()) continue;
        try {
            if (cmd == ":help") {
                std::cout << kReplHelp;
            } else if (cmd == ":stop") {
                break;
            } else if (cmd == ":transcript") {
                std::cout << scenario::export_plain(session);
            } else if (cmd.rfind(":save ", 0) == 0) {
                files::write_atomic(std::string(text::trim(cmd.substr(6))), scenario::export_structured(session));
            } else if (cmd == scenario::kContinueSentinel || cmd == ":continue") {
                print_turn(scenario::continue_session(session, *gateway));
            } else {
                print_turn(scenario::nudge(session, cmd, *gateway));
            }
        } catch (const GatewayError& e) {
            std::cerr << "error: " << e.what() << " (session still open; try again)\n";
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
        }
    }
    if (session.active()) scenario::stop_session(session);
    if (!o.out.empty()) files::write_atomic(o.out, scenario::export_transcript(session, format));
    return 0;
}

// --- physics ---------------------------------------------------------------

struct GridOptions {
    physics::GridRequest request;
    std::string delay_range = "-10:10:500";
    std::string freq_range = "-10:10:500";
    std::string csv = "diffraction.csv";
    std::string image = "diffraction.ppm";
    unsigned workers = 1;
};

int run_grid(const GridOptions& o) {
    auto request = o.request;
    try {
        request.delay = physics::parse_axis_range(o.delay_range);
        request.frequency = physics::parse_axis_range(o.freq_range);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    auto grid = physics::evaluate(request, o.workers);
    physics::render_outputs(grid, {o.csv, o.image});
    return 0;
}

// --- memory ----------------------------------------------------------------

int run_memory_search(const GlobalOptions& g, const std::string& query, int k) {
    auto store = make_memory(g);
    if (!store) throw UsageError("memory search needs --memory PATH");
    emit("", nlohmann::json(store->search(query, k)).dump(2) + "\n");
    return 0;
}

// --- serve -----------------------------------------------------------------

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

int run_serve(const GlobalOptions& g, const std::string& addr, const std::string& token) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw UsageError("--addr must be HOST:PORT");
    int port = 0;
    try {
        port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("bad port in --addr '" + addr + "'");
    }
    service::ServiceDeps deps;
    deps.gateway = make_backend(g);
    deps.provider = make_provider(g);
    deps.memory = make_memory(g);
    deps.bearer_token = token;
    service::Service svc(std::move(deps));
    httplib::Server server;
    svc.mount(server);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    std::cerr << "listening on " << addr << "\n";
    if (!server.listen(addr.substr(0, colon), port)) throw IoFailure("cannot listen on " + addr);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"personae: evidence-checked LLM responses, persona scenarios and the time-diffraction grid"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a TOML or INI file");

    GlobalOptions g;
    app.add_option("--backend", g.backend, "LLM backend: live or mock:SCRIPT")->capture_default_str();
    app.add_option("--provider", g.provider, "Search provider: live or fixture:FILE")->capture_default_str();
    app.add_option("--memory", g.memory, "Memory store file (JSON lines)");
    app.add_flag("-v,--verbose", g.verbosity, "More diagnostics on stderr");

    DeconfabOptions dopt;
    auto add_pipeline_flags = [&dopt](CLI::App* cmd) {
        cmd->add_option("--report", dopt.report, "Write the JSON result here (default stdout)");
        cmd->add_option("--top-n", dopt.top_n, "Sites kept per claim")->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--max-snippets", dopt.max_snippets, "Snippets kept per claim")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_flag("--llm-verdict-pass", dopt.llm_verdict_pass, "Classify undecided dialogs with a second call");
        cmd->add_flag("--parallel", dopt.parallel, "Verify claims and query sites concurrently");
    };

    auto* deconfab_cmd = app.add_subcommand("deconfab", "Verify every claim in a response and rewrite it");
    deconfab_cmd->add_option("--input", dopt.input, "Response text file")->required();
    add_pipeline_flags(deconfab_cmd);

    std::string claim_text;
    auto* verify_cmd = app.add_subcommand("verify-claim", "Verify a single claim");
    verify_cmd->add_option("--claim", claim_text, "Claim text")->required();
    add_pipeline_flags(verify_cmd);

    TrialOptions topt;
    auto* trial_cmd = app.add_subcommand("trial", "Repeat the verdict dialog on a fixed claim and tabulate labels");
    trial_cmd->add_option("--fixture", topt.fixture, "Trial fixture (JSON)")->required();
    trial_cmd->add_option("--n", topt.n, "Number of trials")->check(CLI::PositiveNumber)->capture_default_str();
    trial_cmd->add_option("--out", topt.out, "Write the table here (default stdout)");
    trial_cmd->add_option("--dump-dialogs", topt.dump_dir, "Directory for per-trial dialogs");
    trial_cmd->add_option("--workers", topt.workers, "Concurrent trials")->check(CLI::PositiveNumber);
    trial_cmd->add_flag("--llm-verdict-pass", topt.llm_verdict_pass, "Classify undecided dialogs with a second call");

    ScenarioOptions sopt;
    auto* scenario_cmd = app.add_subcommand("scenario", "Persona scenarios");
    scenario_cmd->require_subcommand(1);
    auto add_scenario_flags = [&sopt](CLI::App* cmd) {
        cmd->add_option("--spec", sopt.spec, "Scenario file (YAML)")->required();
        cmd->add_option("--out", sopt.out, "Transcript file");
        cmd->add_option("--format", sopt.format, "plain or structured")->capture_default_str();
        cmd->add_option("--snapshot", sopt.snapshot, "Rewrite this structured transcript after every turn");
    };
    auto* run_cmd = scenario_cmd->add_subcommand("run", "Run the scenario's scripted steps");
    add_scenario_flags(run_cmd);
    auto* repl_cmd = scenario_cmd->add_subcommand("repl", "Steer the scenario interactively");
    add_scenario_flags(repl_cmd);

    GridOptions popt;
    auto* physics_cmd = app.add_subcommand("physics", "Time-diffraction model");
    physics_cmd->require_subcommand(1);
    auto* grid_cmd = physics_cmd->add_subcommand("grid", "Evaluate the probability over delay and frequency");
    grid_cmd->add_option("--A1", popt.request.slit.a1, "Amplitude of slit 1")->capture_default_str();
    grid_cmd->add_option("--A2", popt.request.slit.a2, "Amplitude of slit 2")->capture_default_str();
    grid_cmd->add_option("--T1", popt.request.slit.duration1, "Opening duration of slit 1")->capture_default_str();
    grid_cmd->add_option("--T2", popt.request.slit.duration2, "Opening duration of slit 2")->capture_default_str();
    grid_cmd->add_option("--k", popt.request.slit.wavenumber, "Wavenumber")->capture_default_str();
    grid_cmd->add_option("--x", popt.request.slit.x, "Screen position")->capture_default_str();
    grid_cmd->add_option("--delay-range", popt.delay_range, "min:max:count")->capture_default_str();
    grid_cmd->add_option("--freq-range", popt.freq_range, "min:max:count")->capture_default_str();
    grid_cmd->add_option("--csv", popt.csv, "Matrix output")->capture_default_str();
    grid_cmd->add_option("--image", popt.image, "Heatmap output (PPM)")->capture_default_str();
    grid_cmd->add_option("--workers", popt.workers, "Threads")->check(CLI::PositiveNumber);

    std::string query;
    int k = 5;
    auto* memory_cmd = app.add_subcommand("memory", "Verified-claim memory");
    memory_cmd->require_subcommand(1);
    auto* search_cmd = memory_cmd->add_subcommand("search", "Rank stored claims against a query");
    search_cmd->add_option("--query,-q", query, "Query text")->required();
    search_cmd->add_option("--k", k, "Results to return")->check(CLI::PositiveNumber)->capture_default_str();

    std::string addr = "127.0.0.1:8080";
    std::string token;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--addr", addr, "HOST:PORT")->capture_default_str();
    serve_cmd->add_option("--token", token, "Require this bearer token");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*deconfab_cmd) return run_deconfab(g, dopt);
        if (*verify_cmd) return run_verify_claim(g, dopt, claim_text);
        if (*trial_cmd) return run_trial(g, topt);
        if (*run_cmd) return run_scenario(g, sopt);
        if (*repl_cmd) return run_repl(g, sopt);
        if (*grid_cmd) return run_grid(popt);
        if (*search_cmd) return run_memory_search(g, query, k);
        if (*serve_cmd) return run_serve(g, addr, token);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
