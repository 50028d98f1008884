#include "d4c/orchestrator.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <regex>
#include <thread>

#include "d4c/error.hpp"
#include "d4c/source_text.hpp"
#include "d4c/subprocess.hpp"

namespace d4c {

namespace fs = std::filesystem;

std::string_view to_string(ValidationStatus status) {
    switch (status) {
        case ValidationStatus::plausible: return "plausible";
        case ValidationStatus::test_fail: return "test_fail";
        case ValidationStatus::compile_error: return "compile_error";
        case ValidationStatus::timeout: return "timeout";
        case ValidationStatus::extraction_error: return "extraction_error";
        case ValidationStatus::apply_error: return "apply_error";
    }
    return "test_fail";
}

ValidationStatus parse_validation_status(std::string_view text) {
    for (auto s : {ValidationStatus::plausible, ValidationStatus::test_fail, ValidationStatus::compile_error,
                   ValidationStatus::timeout, ValidationStatus::extraction_error, ValidationStatus::apply_error}) {
        if (text == to_string(s)) return s;
    }
    throw Error(ErrorCode::RunLogMalformed, "unknown validation status \"" + std::string(text) + "\"");
}

namespace {

std::string first_matching_line(const std::string& output, const std::regex& pattern) {
    for (std::string_view line : split_lines_keep_ends(output)) {
        std::string bare(strip_line_end(line));
        if (std::regex_search(bare, pattern)) return bare;
    }
    return {};
}

std::string last_nonblank_line(const std::string& output) {
    auto lines = split_lines_keep_ends(output);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string bare(strip_line_end(*it));
        if (!collapse_whitespace(bare).empty()) return bare;
    }
    return {};
}

}  // namespace

ValidationOutcome validate(const fs::path& patched_root, const std::string& test_command,
                           const ValidatorOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(patched_root, ec)) {
        throw Error(ErrorCode::SandboxSetupFailed, patched_root.string() + " is not a working copy");
    }
    ProcessResult run = run_shell(test_command, patched_root, options.timeout_seconds);
    ValidationOutcome outcome;
    outcome.wall_time = run.wall_seconds;
    if (run.timed_out) {
        outcome.status = ValidationStatus::timeout;
        char buf[64];
        std::snprintf(buf, sizeof buf, "killed after %g s", options.timeout_seconds);
        outcome.detail = buf;
        return outcome;
    }
    if (run.exit_code == 0) {
        outcome.status = ValidationStatus::plausible;
        return outcome;
    }
    const std::regex compile_pattern(options.compile_error_pattern);
    if (std::string line = first_matching_line(run.output, compile_pattern); !line.empty()) {
        outcome.status = ValidationStatus::compile_error;
        outcome.detail = line;
        return outcome;
    }
    outcome.status = ValidationStatus::test_fail;
    std::smatch match;
    const std::regex test_pattern(options.failing_test_pattern);
    if (std::regex_search(run.output, match, test_pattern) && match.size() > 1) {
        outcome.detail = match[1].str();
        while (!outcome.detail.empty() && (outcome.detail.back() == ':' || outcome.detail.back() == '.')) {
            outcome.detail.pop_back();
        }
    } else if (std::string line = last_nonblank_line(run.output); !line.empty()) {
        outcome.detail = line;
    } else {
        outcome.detail = run.term_signal != 0 ? "terminated by signal " + std::to_string(run.term_signal)
                                              : "exit code " + std::to_string(run.exit_code);
    }
    return outcome;
}

double compute_cost(long long input_tokens, long long output_tokens, const Prices& prices) {
    return static_cast<double>(input_tokens) / 1000.0 * prices.input_per_1k +
           static_cast<double>(output_tokens) / 1000.0 * prices.output_per_1k;
}

void CostLedger::add(long long input, long long output) {
    input_tokens += input;
    output_tokens += output;
    total_dollars = compute_cost(input_tokens, output_tokens, {input_price_per_1k, output_price_per_1k});
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
    add(other.input_tokens, other.output_tokens);
    return *this;
}

bool match_reference(std::string_view patched_function, std::string_view reference_fix, Language language) {
    auto normalize = [language](std::string_view text) {
        std::string stripped = strip_comments(text, language);
        if (language == Language::c_like) return collapse_whitespace(stripped);
        std::string out;
        std::vector<int> indents{0};
        for (std::string_view line : split_lines_keep_ends(stripped)) {
            std::string body = collapse_whitespace(line);
            if (body.empty()) continue;
            int width = 0;
            for (char c : line) {
                if (c == ' ') {
                    ++width;
                } else if (c == '\t') {
                    width = (width / 8 + 1) * 8;
                } else {
                    break;
                }
            }
            while (indents.size() > 1 && indents.back() > width) indents.pop_back();
            if (width > indents.back()) indents.push_back(width);
            out += std::to_string(indents.size() - 1) + "|" + body + "\n";
        }
        return out;
    };
    return normalize(patched_function) == normalize(reference_fix);
}

PromptBundle prepare_prompt(const BugInstance& bug, PromptFormat format, const Backend& backend) {
    BugReport report = build_report(bug, format);
    return render_prompt(report, format, default_exemplar(bug.language, format), backend.preferred_mode(),
                         backend.markers());
}

namespace {

std::string sanitize(std::string_view id) {
    std::string out;
    for (char c : id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
    return out;
}

fs::path unique_scratch(const fs::path& work_dir, const BugInstance& bug, PromptFormat format, int sample_index) {
    static std::atomic<unsigned long> counter{0};
    return work_dir / (sanitize(bug.id) + "-" + std::string(to_string(format)) + "-" + std::to_string(sample_index) +
                       "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
}

bool is_extraction_error(ErrorCode code) {
    return code == ErrorCode::NoFunctionFound || code == ErrorCode::AmbiguousWithoutName ||
           code == ErrorCode::NoHunksFound || code == ErrorCode::HunkOutOfRange;
}

}  // namespace

CandidatePatch evaluate_candidate(const BugInstance& bug, PromptFormat format, const Completion& completion,
                                  std::string_view source, const FunctionSpan& span, const RepairOptions& options) {
    CandidatePatch candidate;
    candidate.completion = completion;
    const std::string label = bug.target_file.generic_string();

    try {
        switch (format) {
            case PromptFormat::report_func:
            case PromptFormat::mask_func:
                candidate.extracted = extract_function(completion.text, bug.function_name, bug.language);
                break;
            case PromptFormat::report_hunk:
                candidate.extracted = extract_hunks(completion.text);
                break;
            case PromptFormat::mask_hunk: {
                auto hunks = to_function_relative(bug.known_hunks.value_or(std::vector<HunkSpec>{}), source, span);
                auto infills = extract_infills(completion.text, hunks.size());
                ExtractedPatch patch;
                patch.kind = PatchKind::whole_function;
                patch.function_text = fill_masks(source.substr(span.start_offset, span.length()), hunks, infills);
                candidate.extracted = std::move(patch);
                break;
            }
        }
    } catch (const Error& e) {
        if (!is_extraction_error(e.code())) throw;
        candidate.outcome = {ValidationStatus::extraction_error, e.what(), 0.0};
        return candidate;
    }

    try {
        candidate.applied = candidate.extracted->kind == PatchKind::whole_function
                                ? apply_function_patch(source, span, candidate.extracted->function_text, label)
                                : apply_hunk_patch(source, span, *candidate.extracted, label);
    } catch (const Error& e) {
        candidate.outcome = {ValidationStatus::apply_error, e.what(), 0.0};
        return candidate;
    }

    const fs::path scratch = unique_scratch(options.work_dir, bug, format, completion.sample_index);
    try {
        fs::create_directories(scratch.parent_path());
        fs::copy(bug.source_root, scratch, fs::copy_options::recursive | fs::copy_options::copy_symlinks);
        write_file(scratch / bug.target_file, candidate.applied->patched_file_text);
    } catch (const fs::filesystem_error& e) {
        throw Error(ErrorCode::SandboxSetupFailed, e.what());
    }
    ValidatorOptions validator = options.validator;
    if (bug.timeout_seconds) validator.timeout_seconds = *bug.timeout_seconds;
    candidate.outcome = validate(scratch, bug.test_command, validator);
    if (!options.keep_scratch) {
        std::error_code ec;
        fs::remove_all(scratch, ec);
    }

    if (candidate.outcome.status == ValidationStatus::plausible && bug.reference_fix) {
        const std::string& patched = candidate.applied->patched_file_text;
        try {
            FunctionSpan patched_span = locate_function(patched, bug.language, bug.function_name, bug.header_line);
            candidate.reference_match = match_reference(
                std::string_view(patched).substr(patched_span.start_offset, patched_span.length()),
                *bug.reference_fix, bug.language);
        } catch (const Error&) {
            candidate.reference_match = false;
        }
    }
    return candidate;
}

RepairRun run_repair(const BugInstance& bug, PromptFormat format, const RepairOptions& options,
                     const Backend& backend) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    options.generation.validate();

    const std::string source = read_file(bug.target_path());
    const FunctionSpan span = locate_bug_function(bug, source);
    const PromptBundle prompt = render_prompt(build_report(bug, format, source), format,
                                              default_exemplar(bug.language, format), backend.preferred_mode(),
                                              backend.markers());
    const std::string prompt_text = prompt.serialized();
    if (options.prompt_dump_dir) {
        write_file(*options.prompt_dump_dir / (sanitize(bug.id) + "__" + std::string(to_string(format)) + ".txt"),
                   prompt_text);
    }

    RepairRun run;
    run.bug_id = bug.id;
    run.format = format;
    run.backend_identity = backend.identity();
    run.ledger.input_price_per_1k = options.prices.input_per_1k;
    run.ledger.output_price_per_1k = options.prices.output_per_1k;

    const bool score = options.score_perplexity && backend.supports_logprobs();
    double validation_seconds = 0.0;
    auto on_completion = [&](const Completion& completion) {
        const auto t0 = clock::now();
        CandidatePatch candidate = evaluate_candidate(bug, format, completion, source, span, options);
        validation_seconds += std::chrono::duration<double>(clock::now() - t0).count();
        if (score) {
            try {
                ScoreResult scores = score_tokens(backend, prompt_text, completion.text,
                                                  RequestKey{bug.id, format, completion.sample_index});
                PerplexityRecord record = perplexity(scores.prompt_scores, scores.continuation_scores);
                record.backend_identity = backend.identity();
                candidate.perplexity = std::move(record);
            } catch (const Error& e) {
                candidate.perplexity_error = e.what();
            }
        }
        const bool plausible = candidate.outcome.status == ValidationStatus::plausible;
        run.candidates.push_back(std::move(candidate));
        const double elapsed = std::chrono::duration<double>(clock::now() - started).count();
        if (elapsed >= options.bug_budget_seconds) run.budget_exhausted = true;
        return (plausible && options.early_stop) || run.budget_exhausted;
    };
    sample(prompt, options.generation, backend, bug.id, on_completion);

    for (std::size_t i = 0; i < run.candidates.size(); ++i) {
        const CandidatePatch& c = run.candidates[i];
        run.ledger.add(c.completion.input_tokens, c.completion.output_tokens);
        if (c.outcome.status == ValidationStatus::plausible) {
            if (!run.first_plausible_index) run.first_plausible_index = static_cast<int>(i) + 1;
            if (c.reference_match) run.reference_match = run.reference_match.value_or(false) || *c.reference_match;
        }
    }
    if (bug.reference_fix && !run.reference_match) run.reference_match = false;

    run.timings.total_seconds = std::chrono::duration<double>(clock::now() - started).count();
    run.timings.validation_seconds = validation_seconds;
    run.timings.generation_seconds = std::max(0.0, run.timings.total_seconds - validation_seconds);
    return run;
}

std::vector<RepairRun> run_corpus(const std::vector<BugInstance>& bugs, const std::vector<PromptFormat>& formats,
                                  const RepairOptions& options, const Backend& backend, int workers,
                                  const std::function<void(const RepairRun&)>& sink,
                                  const std::atomic<bool>* cancel) {
    std::vector<CorpusTask> tasks;
    for (PromptFormat f : formats) {
        for (std::size_t b = 0; b < bugs.size(); ++b) tasks.push_back({b, f});
    }
    std::vector<std::optional<RepairRun>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;

    auto worker = [&] {
        for (;;) {
            if (cancel && cancel->load()) return;
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const BugInstance& bug = bugs[tasks[i].bug_index];
            RepairRun run;
            try {
                run = run_repair(bug, tasks[i].format, options, backend);
            } catch (const std::exception& e) {
                run = RepairRun{};
                run.bug_id = bug.id;
                run.format = tasks[i].format;
                run.backend_identity = backend.identity();
                run.ledger.input_price_per_1k = options.prices.input_per_1k;
                run.ledger.output_price_per_1k = options.prices.output_per_1k;
                run.error = e.what();
            }
            {
                std::lock_guard lock(sink_mutex);
                if (sink) sink(run);
            }
            results[i] = std::move(run);
        }
    };

    const int count = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    }

    std::vector<RepairRun> runs;
    for (auto& r : results) {
        if (r) runs.push_back(std::move(*r));
    }
    return runs;
}

std::optional<Stat> describe(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    Stat s;
    s.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return s;
}

namespace {

struct Accumulator {
    std::size_t bugs = 0, aborted = 0, plausible_bugs = 0, reference_matches = 0, samples = 0, plausible = 0;
    std::vector<double> first_indices, plausible_counts;
    CostLedger ledger;
    double wall = 0.0;
    bool estimated = false;

    void add(const RepairRun& run) {
        ++bugs;
        if (run.error) ++aborted;
        samples += run.candidates.size();
        std::size_t plausible_here = 0;
        for (const auto& c : run.candidates) {
            if (c.outcome.status == ValidationStatus::plausible) ++plausible_here;
            if (c.completion.usage_estimated) estimated = true;
        }
        plausible += plausible_here;
        if (run.first_plausible_index) {
            ++plausible_bugs;
            first_indices.push_back(*run.first_plausible_index);
            plausible_counts.push_back(static_cast<double>(plausible_here));
        }
        if (run.reference_match.value_or(false)) ++reference_matches;
        ledger.input_price_per_1k = run.ledger.input_price_per_1k;
        ledger.output_price_per_1k = run.ledger.output_price_per_1k;
        ledger.input_tokens += run.ledger.input_tokens;
        ledger.output_tokens += run.ledger.output_tokens;
        ledger.total_dollars += run.ledger.total_dollars;
        wall += run.timings.total_seconds;
    }
};

}  // namespace

SummaryReport summarize(const std::vector<RepairRun>& input) {
    std::vector<const RepairRun*> runs;
    for (const auto& r : input) runs.push_back(&r);
    std::sort(runs.begin(), runs.end(), [](const RepairRun* a, const RepairRun* b) {
        return std::tie(a->format, a->bug_id) < std::tie(b->format, b->bug_id);
    });

    SummaryReport report;
    Accumulator total;
    for (PromptFormat f : kAllFormats) {
        Accumulator acc;
        for (const RepairRun* r : runs) {
            if (r->format != f) continue;
            acc.add(*r);
            total.add(*r);
        }
        if (acc.bugs == 0) continue;
        FormatSummary s;
        s.format = f;
        s.bugs = acc.bugs;
        s.aborted = acc.aborted;
        s.plausible_bugs = acc.plausible_bugs;
        s.reference_matches = acc.reference_matches;
        s.samples_issued = acc.samples;
        s.plausible_patches = acc.plausible;
        s.first_plausible_index = describe(acc.first_indices);
        s.plausible_per_plausible_bug = describe(acc.plausible_counts);
        s.input_tokens = acc.ledger.input_tokens;
        s.output_tokens = acc.ledger.output_tokens;
        s.dollars = acc.ledger.total_dollars;
        s.wall_seconds = acc.wall;
        report.formats.push_back(s);
    }
    report.runs = total.bugs;
    report.plausible_bugs = total.plausible_bugs;
    report.reference_matches = total.reference_matches;
    report.first_plausible_index = describe(total.first_indices);
    report.plausible_per_plausible_bug = describe(total.plausible_counts);
    report.input_tokens = total.ledger.input_tokens;
    report.output_tokens = total.ledger.output_tokens;
    report.dollars = total.ledger.total_dollars;
    report.wall_seconds = total.wall;
    report.any_estimated_usage = total.estimated;
    return report;
}

namespace {

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string stat_cell(const std::optional<Stat>& s) {
    if (!s) return "-";
    return fixed(s->mean, 2) + " (" + fixed(s->stddev, 2) + ")";
}

std::string render_rows(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) line += "  ";
            std::string pad(widths[c] - row[c].size(), ' ');
            line += c == 0 ? row[c] + pad : pad + row[c];
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

}  // namespace

std::string render_summary(const SummaryReport& summary) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"format", "runs", "aborted", "plausible", "ref-match", "samples", "first-plausible mean (std)",
                    "plausible/bug mean (std)", "in-tokens", "out-tokens", "cost-usd", "wall-s"});
    for (const auto& s : summary.formats) {
        rows.push_back({std::string(display_name(s.format)), std::to_string(s.bugs), std::to_string(s.aborted),
                        std::to_string(s.plausible_bugs), std::to_string(s.reference_matches),
                        std::to_string(s.samples_issued), stat_cell(s.first_plausible_index),
                        stat_cell(s.plausible_per_plausible_bug), std::to_string(s.input_tokens),
                        std::to_string(s.output_tokens), fixed(s.dollars, 4), fixed(s.wall_seconds, 1)});
    }
    std::size_t samples = 0;
    std::size_t aborted = 0;
    for (const auto& s : summary.formats) {
        samples += s.samples_issued;
        aborted += s.aborted;
    }
    rows.push_back({"total", std::to_string(summary.runs), std::to_string(aborted),
                    std::to_string(summary.plausible_bugs), std::to_string(summary.reference_matches),
                    std::to_string(samples), stat_cell(summary.first_plausible_index),
                    stat_cell(summary.plausible_per_plausible_bug), std::to_string(summary.input_tokens),
                    std::to_string(summary.output_tokens), fixed(summary.dollars, 4),
                    fixed(summary.wall_seconds, 1)});
    std::string out = render_rows(rows);
    if (summary.any_estimated_usage) out += "note: some token counts are estimated (ceil(bytes/4))\n";
    out += "plausible = passes the bundle's own tests; ref-match = normalized text equals the reference fix\n";
    return out;
}

}  // namespace d4c
