#include "d4c/run_log.hpp"

#include "d4c/error.hpp"
#include "d4c/source_text.hpp"

namespace d4c {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
ordered_json optional_json(const std::optional<T>& value) {
    return value ? ordered_json(*value) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

ordered_json stat_json(const std::optional<Stat>& s) {
    if (!s) return nullptr;
    return ordered_json{{"mean", s->mean}, {"std", s->stddev}, {"count", s->count}};
}

ordered_json candidate_json(const CandidatePatch& c) {
    ordered_json j;
    j["sample_index"] = c.completion.sample_index;
    j["text"] = c.completion.text;
    j["input_tokens"] = c.completion.input_tokens;
    j["output_tokens"] = c.completion.output_tokens;
    j["usage_estimated"] = c.completion.usage_estimated;
    j["finish_reason"] = to_string(c.completion.finish_reason);
    if (c.extracted) {
        ordered_json e;
        e["kind"] = c.extracted->kind == PatchKind::whole_function ? "whole_function" : "hunk_set";
        e["function_text"] = c.extracted->function_text;
        ordered_json reps = ordered_json::array();
        for (const auto& r : c.extracted->replacements) {
            reps.push_back({{"anchor_lines", r.anchor_lines}, {"replacement_lines", r.replacement_lines}});
        }
        e["replacements"] = reps;
        e["fence_tag"] = optional_json(c.extracted->source_fence_language_tag);
        j["extracted"] = e;
    } else {
        j["extracted"] = nullptr;
    }
    if (c.applied) {
        ordered_json ranges = ordered_json::array();
        for (const auto& r : c.applied->touched_line_ranges) ranges.push_back({r.start, r.end});
        j["applied"] = {{"diff", c.applied->diff_text}, {"touched_lines", ranges}};
    } else {
        j["applied"] = nullptr;
    }
    j["outcome"] = {{"status", to_string(c.outcome.status)},
                    {"detail", c.outcome.detail},
                    {"wall_time", c.outcome.wall_time}};
    j["reference_match"] = optional_json(c.reference_match);
    if (c.perplexity) {
        j["perplexity"] = {{"output_ppl", c.perplexity->output_ppl},
                           {"io_ppl", c.perplexity->io_ppl},
                           {"output_token_count", c.perplexity->output_token_count},
                           {"io_token_count", c.perplexity->io_token_count},
                           {"backend_identity", c.perplexity->backend_identity}};
    } else {
        j["perplexity"] = nullptr;
    }
    j["perplexity_error"] = optional_json(c.perplexity_error);
    return j;
}

CandidatePatch candidate_from(const json& j) {
    CandidatePatch c;
    c.completion.sample_index = j.at("sample_index").get<int>();
    c.completion.text = j.at("text").get<std::string>();
    c.completion.input_tokens = j.at("input_tokens").get<long long>();
    c.completion.output_tokens = j.at("output_tokens").get<long long>();
    c.completion.usage_estimated = j.at("usage_estimated").get<bool>();
    c.completion.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
    if (const json& e = j.at("extracted"); !e.is_null()) {
        ExtractedPatch p;
        const auto kind = e.at("kind").get<std::string>();
        if (kind != "whole_function" && kind != "hunk_set") throw std::invalid_argument("unknown patch kind " + kind);
        p.kind = kind == "whole_function" ? PatchKind::whole_function : PatchKind::hunk_set;
        p.function_text = e.at("function_text").get<std::string>();
        for (const auto& r : e.at("replacements")) {
            p.replacements.push_back({r.at("anchor_lines").get<std::vector<std::string>>(),
                                      r.at("replacement_lines").get<std::vector<std::string>>()});
        }
        p.source_fence_language_tag = optional_from<std::string>(e, "fence_tag");
        c.extracted = std::move(p);
    }
    if (const json& a = j.at("applied"); !a.is_null()) {
        AppliedPatch p;
        p.diff_text = a.at("diff").get<std::string>();
        for (const auto& r : a.at("touched_lines")) p.touched_line_ranges.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
        c.applied = std::move(p);
    }
    const json& o = j.at("outcome");
    c.outcome.status = parse_validation_status(o.at("status").get<std::string>());
    c.outcome.detail = o.at("detail").get<std::string>();
    c.outcome.wall_time = o.at("wall_time").get<double>();
    c.reference_match = optional_from<bool>(j, "reference_match");
    if (const json& p = j.at("perplexity"); !p.is_null()) {
        PerplexityRecord r;
        r.output_ppl = p.at("output_ppl").get<double>();
        r.io_ppl = p.at("io_ppl").get<double>();
        r.output_token_count = p.at("output_token_count").get<std::size_t>();
        r.io_token_count = p.at("io_token_count").get<std::size_t>();
        r.backend_identity = p.at("backend_identity").get<std::string>();
        c.perplexity = std::move(r);
    }
    c.perplexity_error = optional_from<std::string>(j, "perplexity_error");
    return c;
}

}  // namespace

ordered_json to_json(const RepairRun& run) {
    ordered_json j;
    j["bug_id"] = run.bug_id;
    j["format"] = to_string(run.format);
    j["backend_identity"] = run.backend_identity;
    j["first_plausible_index"] = optional_json(run.first_plausible_index);
    j["reference_match"] = optional_json(run.reference_match);
    j["budget_exhausted"] = run.budget_exhausted;
    j["error"] = optional_json(run.error);
    j["ledger"] = {{"input_tokens", run.ledger.input_tokens},
                   {"output_tokens", run.ledger.output_tokens},
                   {"input_price_per_1k", run.ledger.input_price_per_1k},
                   {"output_price_per_1k", run.ledger.output_price_per_1k},
                   {"total_dollars", run.ledger.total_dollars}};
    j["timings"] = {{"generation_seconds", run.timings.generation_seconds},
                    {"validation_seconds", run.timings.validation_seconds},
                    {"total_seconds", run.timings.total_seconds}};
    ordered_json candidates = ordered_json::array();
    for (const auto& c : run.candidates) candidates.push_back(candidate_json(c));
    j["candidates"] = std::move(candidates);
    return j;
}

RepairRun repair_run_from_json(const json& j) {
    RepairRun run;
    run.bug_id = j.at("bug_id").get<std::string>();
    run.format = parse_format(j.at("format").get<std::string>());
    run.backend_identity = j.at("backend_identity").get<std::string>();
    run.first_plausible_index = optional_from<int>(j, "first_plausible_index");
    run.reference_match = optional_from<bool>(j, "reference_match");
    run.budget_exhausted = j.value("budget_exhausted", false);
    run.error = optional_from<std::string>(j, "error");
    const json& l = j.at("ledger");
    run.ledger.input_tokens = l.at("input_tokens").get<long long>();
    run.ledger.output_tokens = l.at("output_tokens").get<long long>();
    run.ledger.input_price_per_1k = l.at("input_price_per_1k").get<double>();
    run.ledger.output_price_per_1k = l.at("output_price_per_1k").get<double>();
    run.ledger.total_dollars = l.at("total_dollars").get<double>();
    const json& t = j.at("timings");
    run.timings.generation_seconds = t.at("generation_seconds").get<double>();
    run.timings.validation_seconds = t.at("validation_seconds").get<double>();
    run.timings.total_seconds = t.at("total_seconds").get<double>();
    for (const auto& c : j.at("candidates")) run.candidates.push_back(candidate_from(c));
    return run;
}

ordered_json to_json(const SummaryReport& summary) {
    ordered_json formats = ordered_json::array();
    for (const auto& s : summary.formats) {
        formats.push_back({{"format", to_string(s.format)},
                           {"bugs", s.bugs},
                           {"aborted", s.aborted},
                           {"plausible_bugs", s.plausible_bugs},
                           {"reference_matches", s.reference_matches},
                           {"samples_issued", s.samples_issued},
                           {"plausible_patches", s.plausible_patches},
                           {"first_plausible_index", stat_json(s.first_plausible_index)},
                           {"plausible_per_plausible_bug", stat_json(s.plausible_per_plausible_bug)},
                           {"input_tokens", s.input_tokens},
                           {"output_tokens", s.output_tokens},
                           {"dollars", s.dollars},
                           {"wall_seconds", s.wall_seconds}});
    }
    ordered_json j;
    j["formats"] = std::move(formats);
    j["runs"] = summary.runs;
    j["plausible_bugs"] = summary.plausible_bugs;
    j["reference_matches"] = summary.reference_matches;
    j["first_plausible_index"] = stat_json(summary.first_plausible_index);
    j["plausible_per_plausible_bug"] = stat_json(summary.plausible_per_plausible_bug);
    j["input_tokens"] = summary.input_tokens;
    j["output_tokens"] = summary.output_tokens;
    j["dollars"] = summary.dollars;
    j["wall_seconds"] = summary.wall_seconds;
    j["any_estimated_usage"] = summary.any_estimated_usage;
    return j;
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw Error(ErrorCode::InvalidConfig, "cannot open run log " + path.string());
    if (fresh) out_ << ordered_json{{"schema", kRunLogSchema}}.dump() << '\n' << std::flush;
}

void RunLogWriter::append(const RepairRun& run) {
    std::string line = to_json(run).dump() + "\n";
    std::lock_guard lock(mutex_);
    out_ << line << std::flush;
}

std::vector<RepairRun> parse_run_log(std::string_view text) {
    std::vector<RepairRun> runs;
    std::size_t line_no = 0;
    bool header_seen = false;
    for (std::string_view raw : split_lines_keep_ends(text)) {
        ++line_no;
        const bool terminated = !raw.empty() && raw.back() == '\n';
        std::string_view line = strip_line_end(raw);
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::RunLogMalformed, "line " + std::to_string(line_no) + ": " + why);
        };
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (terminated) continue;
            break;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(terminated ? std::string(e.what()) : "truncated record");
        }
        if (!header_seen) {
            if (!j.is_object() || !j.contains("schema")) fail("missing {\"schema\": 1} header");
            if (j.at("schema") != kRunLogSchema) fail("unsupported schema " + j.at("schema").dump());
            header_seen = true;
            continue;
        }
        try {
            runs.push_back(repair_run_from_json(j));
        } catch (const Error& e) {
            fail(e.what());
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }
    return runs;
}

std::vector<RepairRun> read_run_log(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::RunLogMalformed, path.string() + " does not exist");
    }
    return parse_run_log(read_file(path));
}

}  // namespace d4c
