#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "d4c/bug_model.hpp"
#include "d4c/model_backend.hpp"
#include "d4c/patch_engine.hpp"
#include "d4c/report_builder.hpp"

namespace d4c {

enum class ValidationStatus { plausible, test_fail, compile_error, timeout, extraction_error, apply_error };
std::string_view to_string(ValidationStatus status);
ValidationStatus parse_validation_status(std::string_view text);

struct ValidationOutcome {
    ValidationStatus status = ValidationStatus::test_fail;
    std::string detail;
    double wall_time = 0.0;
};

struct ValidatorOptions {
    double timeout_seconds = 60.0;
    std::string compile_error_pattern = "error:|SyntaxError|IndentationError|TabError";
    // First capture group names the failing test.
    std::string failing_test_pattern = R"((?:FAIL|FAILED|ERROR):?\s+([A-Za-z_][\w.:\[\]-]*))";
};

/// Runs the test command in a complete working copy and classifies the result.
ValidationOutcome validate(const std::filesystem::path& patched_root, const std::string& test_command,
                           const ValidatorOptions& options = {});

struct Prices {
    double input_per_1k = 0.01;
    double output_per_1k = 0.03;
};

double compute_cost(long long input_tokens, long long output_tokens, const Prices& prices = {});

struct CostLedger {
    long long input_tokens = 0;
    long long output_tokens = 0;
    double input_price_per_1k = 0.01;
    double output_price_per_1k = 0.03;
    double total_dollars = 0.0;

    void add(long long input, long long output);
    CostLedger& operator+=(const CostLedger& other);
};

struct CandidatePatch {
    Completion completion;
    std::optional<ExtractedPatch> extracted;
    std::optional<AppliedPatch> applied;
    ValidationOutcome outcome;
    std::optional<bool> reference_match;
    std::optional<PerplexityRecord> perplexity;
    std::optional<std::string> perplexity_error;
};

struct RunTimings {
    double generation_seconds = 0.0;
    double validation_seconds = 0.0;
    double total_seconds = 0.0;
};

struct RepairRun {
    std::string bug_id;
    PromptFormat format = PromptFormat::report_func;
    std::vector<CandidatePatch> candidates;
    std::optional<int> first_plausible_index;  // 1-based
    std::optional<bool> reference_match;
    CostLedger ledger;
    RunTimings timings;
    bool budget_exhausted = false;
    std::optional<std::string> error;  // set when a harness error aborted the run
    std::string backend_identity;
};

struct RepairOptions {
    GenerationConfig generation;
    ValidatorOptions validator;
    bool early_stop = false;
    /// Wall budget per bug; sampling stops once exceeded.
    double bug_budget_seconds = 600.0;
    bool score_perplexity = false;
    std::filesystem::path work_dir = std::filesystem::temp_directory_path() / "d4c-scratch";
    bool keep_scratch = false;
    std::optional<std::filesystem::path> prompt_dump_dir;
    Prices prices;
};

/// Conservative textual equivalence: comments stripped, whitespace collapsed (relative
/// indentation kept for python_like), blank lines dropped.
bool match_reference(std::string_view patched_function, std::string_view reference_fix, Language language);

/// Renders the exact prompt run_repair sends for (bug, format) to this backend.
PromptBundle prepare_prompt(const BugInstance& bug, PromptFormat format, const Backend& backend);

/// Report, prompt, sample, extract, splice, validate, in sample order.
RepairRun run_repair(const BugInstance& bug, PromptFormat format, const RepairOptions& options,
                     const Backend& backend);

/// Extracts, applies, and validates one completion against the pristine bundle.
CandidatePatch evaluate_candidate(const BugInstance& bug, PromptFormat format, const Completion& completion,
                                  std::string_view source, const FunctionSpan& span, const RepairOptions& options);

struct CorpusTask {
    std::size_t bug_index;
    PromptFormat format;
};

/// Runs every (bug, format) pair on up to `workers` threads. `sink` is invoked once per
/// finished run, serialized. Setting `cancel` stops dispatching new runs. Results come back
/// in (format, bug) order. Harness errors are recorded on the run, never thrown.
std::vector<RepairRun> run_corpus(const std::vector<BugInstance>& bugs, const std::vector<PromptFormat>& formats,
                                  const RepairOptions& options, const Backend& backend, int workers,
                                  const std::function<void(const RepairRun&)>& sink = {},
                                  const std::atomic<bool>* cancel = nullptr);

struct Stat {
    double mean = 0.0;
    double stddev = 0.0;  // population
    std::size_t count = 0;
};

std::optional<Stat> describe(const std::vector<double>& values);

struct FormatSummary {
    PromptFormat format = PromptFormat::report_func;
    std::size_t bugs = 0;
    std::size_t aborted = 0;
    std::size_t plausible_bugs = 0;
    std::size_t reference_matches = 0;
    std::size_t samples_issued = 0;
    std::size_t plausible_patches = 0;
    std::optional<Stat> first_plausible_index;
    std::optional<Stat> plausible_per_plausible_bug;
    long long input_tokens = 0;
    long long output_tokens = 0;
    double dollars = 0.0;
    double wall_seconds = 0.0;
};

struct SummaryReport {
    std::vector<FormatSummary> formats;  // kAllFormats order, only formats present
    std::size_t runs = 0;
    std::size_t plausible_bugs = 0;
    std::size_t reference_matches = 0;
    std::optional<Stat> first_plausible_index;
    std::optional<Stat> plausible_per_plausible_bug;
    long long input_tokens = 0;
    long long output_tokens = 0;
    double dollars = 0.0;
    double wall_seconds = 0.0;
    bool any_estimated_usage = false;
};

SummaryReport summarize(const std::vector<RepairRun>& runs);
std::string render_summary(const SummaryReport& summary);

}  // namespace d4c
