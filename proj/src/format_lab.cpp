#include "d4c/format_lab.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "d4c/error.hpp"

namespace d4c {

FormatReport compare_formats(const std::vector<BugInstance>& corpus, const std::vector<PromptFormat>& formats,
                             const Backend& backend, const RepairOptions& options, int workers,
                             const std::string& corpus_id, const std::function<void(const RepairRun&)>& sink,
                             const std::atomic<bool>* cancel) {
    std::set<PromptFormat> seen;
    for (PromptFormat f : formats) {
        if (!seen.insert(f).second) {
            throw Error(ErrorCode::InvalidConfig, "format " + std::string(to_string(f)) + " requested twice");
        }
    }
    RepairOptions lab = options;
    lab.early_stop = false;
    lab.score_perplexity = true;

    FormatReport report;
    report.backend_identity = backend.identity();
    report.corpus_id = corpus_id;
    report.runs = run_corpus(corpus, formats, lab, backend, workers, sink, cancel);
    report.cells = aggregate_cells(report.runs, formats);
    return report;
}

std::vector<FormatCell> aggregate_cells(const std::vector<RepairRun>& runs, const std::vector<PromptFormat>& formats) {
    std::vector<FormatCell> cells;
    for (PromptFormat f : formats) {
        FormatCell cell;
        cell.format = f;
        std::vector<const RepairRun*> mine;
        for (const auto& r : runs) {
            if (r.format == f) mine.push_back(&r);
        }
        std::sort(mine.begin(), mine.end(), [](const RepairRun* a, const RepairRun* b) { return a->bug_id < b->bug_id; });
        double output_sum = 0.0;
        double io_sum = 0.0;
        for (const RepairRun* r : mine) {
            ++cell.bugs;
            if (r->first_plausible_index) ++cell.plausible_bugs;
            if (r->error) cell.errors.push_back(r->bug_id + ": " + *r->error);
            for (const auto& c : r->candidates) {
                if (!c.perplexity) continue;
                output_sum += c.perplexity->output_ppl;
                io_sum += c.perplexity->io_ppl;
                ++cell.scored_pairs;
            }
        }
        if (cell.scored_pairs > 0) {
            cell.mean_output_ppl = output_sum / static_cast<double>(cell.scored_pairs);
            cell.mean_io_ppl = io_sum / static_cast<double>(cell.scored_pairs);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

namespace {

std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::string ppl_cell(const std::optional<double>& v) {
    if (!v) return "—";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

}  // namespace

std::string render_table(const FormatReport& report) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Format", "O-PPL", "IO-PPL", "Plausible"});
    for (const auto& cell : report.cells) {
        rows.push_back({std::string(display_name(cell.format)), ppl_cell(cell.mean_output_ppl),
                        ppl_cell(cell.mean_io_ppl), std::to_string(cell.plausible_bugs)});
    }
    std::vector<std::size_t> widths(4, 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
    }
    auto render_row = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::string pad(widths[c] - display_width(row[c]), ' ');
            if (c > 0) line += " | ";
            line += c == 0 ? row[c] + pad : pad + row[c];
        }
        return line + "\n";
    };
    std::string out = render_row(rows[0]);
    std::string rule;
    for (std::size_t c = 0; c < widths.size(); ++c) {
        if (c > 0) rule += "-+-";
        rule += std::string(widths[c], '-');
    }
    out += rule + "\n";
    for (std::size_t r = 1; r < rows.size(); ++r) out += render_row(rows[r]);
    return out;
}

nlohmann::ordered_json to_json(const FormatReport& report) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& cell : report.cells) {
        nlohmann::ordered_json j;
        j["format"] = to_string(cell.format);
        j["bugs"] = cell.bugs;
        j["plausible_bugs"] = cell.plausible_bugs;
        j["mean_output_ppl"] = cell.mean_output_ppl ? nlohmann::ordered_json(*cell.mean_output_ppl) : nullptr;
        j["mean_io_ppl"] = cell.mean_io_ppl ? nlohmann::ordered_json(*cell.mean_io_ppl) : nullptr;
        j["scored_pairs"] = cell.scored_pairs;
        j["errors"] = cell.errors;
        cells.push_back(std::move(j));
    }
    return {{"backend_identity", report.backend_identity}, {"corpus_id", report.corpus_id}, {"cells", cells}};
}

}  // namespace d4c
