#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "d4c/orchestrator.hpp"

namespace d4c {

struct FormatCell {
    PromptFormat format = PromptFormat::report_func;
    std::size_t bugs = 0;
    std::size_t plausible_bugs = 0;
    std::optional<double> mean_output_ppl;  // mean of per-sample records
    std::optional<double> mean_io_ppl;
    std::size_t scored_pairs = 0;
    std::vector<std::string> errors;  // "bug_id: message"
};

struct FormatReport {
    std::vector<FormatCell> cells;
    std::string backend_identity;
    std::string corpus_id;
    std::vector<RepairRun> runs;  // not serialized; the run log carries these
};

/// Runs every bug under every format without early stop, scoring perplexity when the
/// backend supports it. Cells follow the order of `formats`.
FormatReport compare_formats(const std::vector<BugInstance>& corpus, const std::vector<PromptFormat>& formats,
                             const Backend& backend, const RepairOptions& options, int workers = 1,
                             const std::string& corpus_id = {},
                             const std::function<void(const RepairRun&)>& sink = {},
                             const std::atomic<bool>* cancel = nullptr);

/// Folds runs into one cell per requested format.
std::vector<FormatCell> aggregate_cells(const std::vector<RepairRun>& runs, const std::vector<PromptFormat>& formats);

std::string render_table(const FormatReport& report);

nlohmann::ordered_json to_json(const FormatReport& report);

}  // namespace d4c
