#include "d4c/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

#include "d4c/bug_model.hpp"
#include "d4c/error.hpp"
#include "d4c/format_lab.hpp"
#include "d4c/orchestrator.hpp"
#include "d4c/run_log.hpp"

namespace d4c {

namespace fs = std::filesystem;

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::remote_chat: return "remote_chat";
        case BackendKind::local_completion: return "local_completion";
        case BackendKind::mock: return "mock";
    }
    return "mock";
}

BackendKind parse_backend_kind(std::string_view text) {
    for (auto k : {BackendKind::remote_chat, BackendKind::local_completion, BackendKind::mock}) {
        if (text == to_string(k)) return k;
    }
    throw Error(ErrorCode::InvalidConfig,
                "unknown backend \"" + std::string(text) + "\" (expected remote_chat, local_completion or mock)");
}

CliEnv CliEnv::process() {
    CliEnv env;
    env.getenv = [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
    env.out = &std::cout;
    env.err = &std::cerr;
    return env;
}

namespace {

struct ConfigFailure {
    std::string message;
};

struct LoadedCorpus {
    std::vector<BugInstance> bugs;
    std::vector<RepairRun> aborted;  // bundles that could not be loaded or validated
};

RepairRun aborted_run(const std::string& id, PromptFormat format, const std::string& backend,
                      const std::string& why) {
    RepairRun run;
    run.bug_id = id;
    run.format = format;
    run.backend_identity = backend;
    run.error = why;
    return run;
}

LoadedCorpus load_corpus(const RunConfig& config, const std::vector<PromptFormat>& formats,
                         const std::string& backend_identity) {
    std::error_code ec;
    if (config.corpus_dir.empty()) throw ConfigFailure{"--corpus-dir is required"};
    if (!fs::is_directory(config.corpus_dir, ec)) {
        throw ConfigFailure{"corpus directory " + config.corpus_dir.string() + " does not exist"};
    }
    auto dirs = discover_bundles(config.corpus_dir);
    if (dirs.empty()) throw ConfigFailure{"no bundles found in " + config.corpus_dir.string()};

    LoadedCorpus corpus;
    std::set<std::string> ids;
    for (const auto& dir : dirs) {
        std::string id = dir.filename().string();
        try {
            BugInstance bug = load_bundle(dir);
            id = bug.id;
            if (!ids.insert(bug.id).second) throw ConfigFailure{"duplicate bug id " + bug.id};
            std::string problems;
            for (const auto& issue : validate_bundle(bug)) {
                if (issue.severity != Severity::error) continue;
                if (!problems.empty()) problems += "; ";
                problems += issue.message;
            }
            if (!problems.empty()) throw Error(ErrorCode::ManifestMalformed, problems);
            corpus.bugs.push_back(std::move(bug));
        } catch (const Error& e) {
            for (PromptFormat f : formats) corpus.aborted.push_back(aborted_run(id, f, backend_identity, e.what()));
        }
    }

    std::vector<std::string> lacking;
    for (const auto& bug : corpus.bugs) {
        if (!bug.known_hunks || bug.known_hunks->empty()) lacking.push_back(bug.id);
    }
    for (PromptFormat f : formats) {
        if (!is_masked_input(f) || lacking.empty()) continue;
        std::string list;
        for (const auto& id : lacking) list += (list.empty() ? "" : ", ") + id;
        throw ConfigFailure{std::string(display_name(f)) + " needs known_hunks, missing in: " + list};
    }
    return corpus;
}

std::unique_ptr<Backend> make_backend(const RunConfig& config, CliEnv& env) {
    if (!config.backend) throw ConfigFailure{"--backend is required (remote_chat, local_completion or mock)"};
    switch (*config.backend) {
        case BackendKind::mock: {
            if (config.script.empty()) throw ConfigFailure{"the mock backend requires --script"};
            std::error_code ec;
            if (!fs::is_regular_file(config.script, ec)) {
                throw ConfigFailure{"mock script " + config.script.string() + " does not exist"};
            }
            try {
                return load_mock(config.script);
            } catch (const Error& e) {
                throw ConfigFailure{e.what()};
            }
        }
        case BackendKind::remote_chat: {
            if (config.endpoint.empty()) throw ConfigFailure{"the remote_chat backend requires --endpoint"};
            auto key = env.getenv ? env.getenv("D4C_API_KEY") : std::nullopt;
            if (!key || key->empty()) throw ConfigFailure{"D4C_API_KEY is not set; the remote_chat backend needs it"};
            auto transport = env.transport ? env.transport : make_default_transport();
            return std::make_unique<RemoteChatBackend>(config.endpoint, config.model, *key, transport, env.retry);
        }
        case BackendKind::local_completion: {
            if (config.endpoint.empty()) throw ConfigFailure{"the local_completion backend requires --endpoint"};
            auto transport = env.transport ? env.transport : make_default_transport();
            return std::make_unique<LocalCompletionBackend>(config.endpoint, transport, env.retry, TextMarkers{},
                                                            config.model);
        }
    }
    throw ConfigFailure{"unknown backend"};
}

RepairOptions make_options(const RunConfig& config) {
    RepairOptions options;
    options.generation.num_samples = config.num_samples;
    options.generation.temperature = config.temperature;
    options.generation.max_output_tokens = config.max_output_tokens;
    options.generation.request_timeout_seconds = config.request_timeout_seconds;
    try {
        options.generation.validate();
    } catch (const Error& e) {
        throw ConfigFailure{e.what()};
    }
    if (!(config.timeout_seconds > 0)) throw ConfigFailure{"--timeout-seconds must be positive"};
    if (config.workers < 1) throw ConfigFailure{"--workers must be a positive integer"};
    options.validator.timeout_seconds = config.timeout_seconds;
    if (!(config.bug_budget_seconds > 0)) throw ConfigFailure{"--bug-budget-seconds must be positive"};
    options.bug_budget_seconds = config.bug_budget_seconds;
    options.early_stop = config.early_stop;
    options.keep_scratch = config.keep_scratch;
    options.work_dir = config.output_dir / "scratch";
    if (config.dump_prompts) options.prompt_dump_dir = config.output_dir / "prompts";
    return options;
}

int outcome_code(const std::vector<RepairRun>& runs, const CliEnv& env, bool cancelled) {
    std::size_t aborted = 0;
    std::size_t unavailable = 0;
    bool any_samples = false;
    for (const auto& r : runs) {
        if (!r.candidates.empty()) any_samples = true;
        if (!r.error) continue;
        ++aborted;
        if (r.error->rfind(std::string(to_string(ErrorCode::BackendUnavailable)), 0) == 0) ++unavailable;
    }
    if (cancelled) {
        *env.err << "interrupted: in-flight runs drained, log flushed\n";
        return exit_code::partial;
    }
    if (!any_samples && unavailable > 0) {
        *env.err << "backend unavailable before any run completed\n";
        return exit_code::backend_unavailable;
    }
    if (aborted > 0) {
        *env.err << aborted << " run(s) aborted with a harness error:\n";
        for (const auto& r : runs) {
            if (r.error) *env.err << "  " << r.bug_id << " [" << to_string(r.format) << "]: " << *r.error << "\n";
        }
        return exit_code::partial;
    }
    return exit_code::ok;
}

void write_summary(const std::vector<RepairRun>& runs, const fs::path& output_dir, CliEnv& env) {
    SummaryReport summary = summarize(runs);
    std::string text = render_summary(summary);
    write_file(output_dir / "summary.txt", text);
    write_file(output_dir / "summary.json", to_json(summary).dump(2) + "\n");
    *env.out << text;
}

struct Session {
    std::unique_ptr<Backend> backend;
    LoadedCorpus corpus;
    RepairOptions options;
    std::unique_ptr<RunLogWriter> log;
};

Session open_session(const RunConfig& config, const std::vector<PromptFormat>& formats, CliEnv& env) {
    Session s;
    s.options = make_options(config);
    s.backend = make_backend(config, env);
    s.corpus = load_corpus(config, formats, s.backend->identity());
    fs::create_directories(config.output_dir);
    fs::remove(config.output_dir / "run.jsonl");
    s.log = std::make_unique<RunLogWriter>(config.output_dir / "run.jsonl");
    for (const auto& r : s.corpus.aborted) s.log->append(r);
    return s;
}

std::function<void(const RepairRun&)> progress_sink(Session& s, CliEnv& env) {
    return [&s, &env](const RepairRun& run) {
        s.log->append(run);
        *env.err << run.bug_id << " [" << to_string(run.format) << "] ";
        if (run.error) {
            *env.err << "aborted: " << *run.error << "\n";
        } else if (run.first_plausible_index) {
            *env.err << "plausible at sample " << *run.first_plausible_index << " of " << run.candidates.size()
                     << "\n";
        } else {
            *env.err << "no plausible patch in " << run.candidates.size() << " samples\n";
        }
    };
}

template <typename Body>
int guarded(CliEnv& env, Body&& body) {
    try {
        return body();
    } catch (const ConfigFailure& f) {
        *env.err << "error: " << f.message << "\n";
        return exit_code::config;
    } catch (const Error& e) {
        *env.err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::BackendUnavailable ? exit_code::backend_unavailable : exit_code::config;
    } catch (const fs::filesystem_error& e) {
        *env.err << "error: " << e.what() << "\n";
        return exit_code::config;
    }
}

}  // namespace

int cmd_repair(const RunConfig& config, CliEnv& env) {
    return guarded(env, [&] {
        const std::vector<PromptFormat> formats{config.format};
        Session s = open_session(config, formats, env);
        auto runs = run_corpus(s.corpus.bugs, formats, s.options, *s.backend, config.workers, progress_sink(s, env),
                               env.cancel);
        runs.insert(runs.end(), s.corpus.aborted.begin(), s.corpus.aborted.end());
        write_summary(runs, config.output_dir, env);
        return outcome_code(runs, env, env.cancel && env.cancel->load());
    });
}

int cmd_compare(const RunConfig& config, CliEnv& env) {
    return guarded(env, [&] {
        if (config.formats.empty()) throw ConfigFailure{"--formats must name at least one format"};
        std::set<PromptFormat> distinct(config.formats.begin(), config.formats.end());
        if (distinct.size() != config.formats.size()) throw ConfigFailure{"--formats lists a format twice"};
        Session s = open_session(config, config.formats, env);
        FormatReport report =
            compare_formats(s.corpus.bugs, config.formats, *s.backend, s.options, config.workers,
                            fs::absolute(config.corpus_dir).lexically_normal().filename().string(),
                            progress_sink(s, env), env.cancel);
        std::vector<RepairRun> runs = report.runs;
        runs.insert(runs.end(), s.corpus.aborted.begin(), s.corpus.aborted.end());
        report.cells = aggregate_cells(runs, config.formats);
        const std::string table = render_table(report);
        write_file(config.output_dir / "format_table.txt", table);
        write_file(config.output_dir / "format_report.json", to_json(report).dump(2) + "\n");
        SummaryReport summary = summarize(runs);
        write_file(config.output_dir / "summary.txt", render_summary(summary));
        write_file(config.output_dir / "summary.json", to_json(summary).dump(2) + "\n");
        *env.out << table;
        return outcome_code(runs, env, env.cancel && env.cancel->load());
    });
}

int cmd_report(const fs::path& run_log, CliEnv& env) {
    try {
        auto runs = read_run_log(run_log);
        *env.out << render_summary(summarize(runs));
        return exit_code::ok;
    } catch (const Error& e) {
        *env.err << "error: " << e.what() << "\n";
        return exit_code::config;
    }
}

int run_cli(const std::vector<std::string>& args, CliEnv& env) {
    CLI::App app{"d4c: prompt-format harness for function-level automated program repair", "d4c"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value file; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    RunConfig config;
    std::string backend_name;
    std::string format_name = std::string(to_string(config.format));
    std::vector<std::string> format_names;
    for (PromptFormat f : config.formats) format_names.emplace_back(to_string(f));
    fs::path run_log;

    auto* repair = app.add_subcommand("repair", "repair every bundle with one prompt format");
    auto* compare = app.add_subcommand("compare", "compare prompt formats on the corpus");
    auto* report = app.add_subcommand("report", "recompute the summary from a run log");
    report->add_option("run_log", run_log, "run.jsonl written by repair or compare")->required();

    app.add_option("--corpus-dir", config.corpus_dir, "directory of bug bundles");
    app.add_option("--backend", backend_name, "remote_chat, local_completion or mock");
    app.add_option("--endpoint", config.endpoint, "backend URL");
    app.add_option("--script", config.script, "mock backend script");
    app.add_option("--model", config.model, "model name sent to the backend")->capture_default_str();
    app.add_option("--format", format_name, "prompt format for repair")->capture_default_str();
    app.add_option("--formats", format_names, "prompt formats for compare")->delimiter(',')->capture_default_str();
    app.add_option("--num-samples", config.num_samples, "samples per bug")->capture_default_str();
    app.add_option("--temperature", config.temperature, "sampling temperature")->capture_default_str();
    app.add_option("--timeout-seconds", config.timeout_seconds, "per-patch test timeout")->capture_default_str();
    app.add_option("--bug-budget-seconds", config.bug_budget_seconds, "wall budget per bug")->capture_default_str();
    app.add_option("--early-stop", config.early_stop, "stop sampling at the first plausible patch")
        ->capture_default_str();
    app.add_option("--workers", config.workers, "bugs processed concurrently")->capture_default_str();
    app.add_option("--keep-scratch", config.keep_scratch, "keep per-candidate working copies")
        ->capture_default_str();
    app.add_option("--output-dir", config.output_dir, "where run.jsonl and summaries go")->capture_default_str();
    app.add_option("--dump-prompts", config.dump_prompts, "write every prompt under output-dir/prompts")
        ->capture_default_str();
    app.add_option("--max-output-tokens", config.max_output_tokens, "generation cap per sample")
        ->capture_default_str();
    app.add_option("--request-timeout-seconds", config.request_timeout_seconds, "per-request network timeout")
        ->capture_default_str();
    repair->fallthrough();
    compare->fallthrough();
    report->fallthrough();

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("d4c");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        *env.out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForAllHelp&) {
        *env.out << app.help("", CLI::AppFormatMode::All);
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        *env.err << "error: " << e.what() << "\n";
        return exit_code::config;
    }

    if (report->parsed()) return cmd_report(run_log, env);

    try {
        if (!backend_name.empty()) config.backend = parse_backend_kind(backend_name);
        config.format = parse_format(format_name);
        config.formats.clear();
        for (const auto& name : format_names) config.formats.push_back(parse_format(name));
    } catch (const Error& e) {
        *env.err << "error: " << e.what() << "\n";
        return exit_code::config;
    }
    return repair->parsed() ? cmd_repair(config, env) : cmd_compare(config, env);
}

}  // namespace d4c
