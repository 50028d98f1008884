#include "d4c/report_builder.hpp"

#include <algorithm>
#include <map>

#include "assets.hpp"
#include "d4c/error.hpp"
#include "d4c/source_text.hpp"

namespace d4c {

std::string_view to_string(PromptFormat format) {
    switch (format) {
        case PromptFormat::mask_hunk: return "mask_hunk";
        case PromptFormat::mask_func: return "mask_func";
        case PromptFormat::report_hunk: return "report_hunk";
        case PromptFormat::report_func: return "report_func";
    }
    return "report_func";
}

std::string_view display_name(PromptFormat format) {
    switch (format) {
        case PromptFormat::mask_hunk: return "Mask-Hunk";
        case PromptFormat::mask_func: return "Mask-Func";
        case PromptFormat::report_hunk: return "Report-Hunk";
        case PromptFormat::report_func: return "Report-Func";
    }
    return "Report-Func";
}

PromptFormat parse_format(std::string_view text) {
    for (PromptFormat f : kAllFormats) {
        if (text == to_string(f) || text == display_name(f)) return f;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown prompt format \"" + std::string(text) + "\"");
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::string_view to_string(RenderMode mode) { return mode == RenderMode::chat ? "chat" : "text_completion"; }

RenderMode parse_render_mode(std::string_view text) {
    if (text == "chat") return RenderMode::chat;
    if (text == "text_completion") return RenderMode::text_completion;
    throw Error(ErrorCode::InvalidConfig, "unknown render mode \"" + std::string(text) + "\"");
}

std::string placeholder_sentence(std::string_view artifact) {
    return "This program does not possess any known " + std::string(artifact) + ".";
}

std::string PromptBundle::serialized() const {
    if (mode == RenderMode::text_completion) return flat_text;
    std::string out;
    for (const auto& m : messages) {
        out += to_string(m.role);
        out += ":\n";
        out += m.content;
        out += "\n";
    }
    return out;
}

std::string mask_hunks(std::string_view function_text, std::vector<HunkSpec> hunks) {
    auto lines = split_lines_keep_ends(function_text);
    const int line_count = static_cast<int>(lines.size());
    std::sort(hunks.begin(), hunks.end(),
              [](const HunkSpec& a, const HunkSpec& b) { return a.start_line < b.start_line; });
    for (std::size_t i = 0; i < hunks.size(); ++i) {
        const auto& h = hunks[i];
        if (h.start_line < 1 || h.end_line < h.start_line || h.end_line > line_count) {
            throw Error(ErrorCode::HunkOutOfRange, "hunk " + std::to_string(h.start_line) + "-" +
                                                       std::to_string(h.end_line) + " outside 1-" +
                                                       std::to_string(line_count));
        }
        if (i > 0 && h.start_line <= hunks[i - 1].end_line) {
            throw Error(ErrorCode::OverlappingHunks, "hunk " + std::to_string(h.start_line) + "-" +
                                                         std::to_string(h.end_line) + " overlaps " +
                                                         std::to_string(hunks[i - 1].start_line) + "-" +
                                                         std::to_string(hunks[i - 1].end_line));
        }
    }

    std::string out;
    out.reserve(function_text.size());
    std::size_t next = 0;
    for (int line = 1; line <= line_count; ++line) {
        std::string_view text = lines[static_cast<std::size_t>(line - 1)];
        if (next < hunks.size() && line == hunks[next].start_line) {
            const auto& h = hunks[next++];
            std::string_view last = lines[static_cast<std::size_t>(h.end_line - 1)];
            std::size_t indent = text.find_first_not_of(" \t");
            if (indent == std::string_view::npos) indent = strip_line_end(text).size();
            out.append(text.substr(0, indent));
            out.append(kMaskToken);
            out.append(last.substr(strip_line_end(last).size()));
            line = h.end_line;
            continue;
        }
        out.append(text);
    }
    return out;
}

std::vector<HunkSpec> to_function_relative(const std::vector<HunkSpec>& hunks, std::string_view source,
                                           const FunctionSpan& span) {
    const int first = line_of_offset(source, span.start_offset);
    std::vector<HunkSpec> rel;
    rel.reserve(hunks.size());
    for (const auto& h : hunks) rel.push_back({h.start_line - first + 1, h.end_line - first + 1});
    return rel;
}

std::string render_test_section(const std::vector<TestCase>& tests) {
    if (tests.empty()) return placeholder_sentence("test cases");
    std::string out;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += "Test " + std::to_string(i + 1) + ": " + tests[i].name + "\n";
        out += "Input: " + tests[i].input_repr + "\n";
        out += "Expected Output: " + tests[i].expected_output_repr;
    }
    return out;
}

BugReport build_report(const BugInstance& bug, PromptFormat format, std::string_view source) {
    if (is_masked_input(format) && (!bug.known_hunks || bug.known_hunks->empty())) {
        throw Error(ErrorCode::MissingHunks, bug.id + ": " + std::string(to_string(format)) + " needs known_hunks");
    }
    FunctionSpan span = locate_bug_function(bug, source);
    std::string function_text(source.substr(span.start_offset, span.length()));

    BugReport report;
    report.program_text = is_masked_input(format)
                              ? mask_hunks(function_text, to_function_relative(*bug.known_hunks, source, span))
                              : function_text;
    report.document_section =
        bug.doc_text && !bug.doc_text->empty() ? *bug.doc_text : placeholder_sentence("documents");
    report.test_section = render_test_section(bug.failed_tests);
    if (bug.error_messages.empty()) {
        report.message_section = placeholder_sentence("error messages");
    } else {
        for (std::size_t i = 0; i < bug.error_messages.size(); ++i) {
            if (i > 0) report.message_section += "\n";
            report.message_section += bug.error_messages[i];
        }
        if (collapse_whitespace(report.message_section).empty())
            report.message_section = placeholder_sentence("error messages");
    }
    return report;
}

BugReport build_report(const BugInstance& bug, PromptFormat format) {
    return build_report(bug, format, read_file(bug.target_path()));
}

std::string render_report_text(const BugReport& report) {
    std::string out;
    out += "## Program\n```\n" + report.program_text + "\n```\n";
    out += "## Document\n" + report.document_section + "\n";
    out += "## Failed Tests\n" + report.test_section + "\n";
    out += "## Error Messages\n" + report.message_section;
    return out;
}

namespace {

std::string trim_trailing_newlines(std::string_view text) {
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
    return std::string(text);
}

}  // namespace

std::string_view system_instruction(PromptFormat format) {
    static const std::map<PromptFormat, std::string> instructions = [] {
        std::map<PromptFormat, std::string> m;
        for (PromptFormat f : kAllFormats) {
            m[f] = trim_trailing_newlines(detail::embedded_asset("instructions/" + std::string(to_string(f)) + ".txt"));
        }
        return m;
    }();
    return instructions.at(format);
}

PromptBundle render_prompt(const BugReport& report, PromptFormat format, const ExemplarPair& exemplar,
                           RenderMode mode, const TextMarkers& markers) {
    if (exemplar.format != format) {
        throw Error(ErrorCode::FormatMismatch, "exemplar is " + std::string(to_string(exemplar.format)) +
                                                   ", prompt is " + std::string(to_string(format)));
    }
    PromptBundle bundle;
    bundle.format = format;
    bundle.mode = mode;
    bundle.system_instruction = std::string(system_instruction(format));

    const std::string exemplar_input = render_report_text(exemplar.input_report);
    const std::string target_input = render_report_text(report);
    if (mode == RenderMode::chat) {
        bundle.messages = {{Role::system, bundle.system_instruction},
                           {Role::user, exemplar_input},
                           {Role::assistant, exemplar.output_text},
                           {Role::user, target_input}};
    } else {
        const std::string sep = "\n" + markers.separator + "\n";
        bundle.flat_text = markers.inst_open + "\n" + bundle.system_instruction + "\n" + markers.inst_close + sep +
                           exemplar_input + sep + exemplar.output_text + sep + target_input + sep;
    }
    return bundle;
}

ExemplarPair parse_exemplar_asset(std::string_view text, Language language, PromptFormat format) {
    std::map<std::string, std::string, std::less<>> sections;
    std::string* current = nullptr;
    for (std::string_view line : split_lines_keep_ends(text)) {
        std::string_view bare = strip_line_end(line);
        if (bare.size() > 2 && bare.substr(0, 2) == "@@") {
            current = &sections[std::string(bare.substr(2))];
            continue;
        }
        if (current == nullptr) throw Error(ErrorCode::FormatMismatch, "exemplar asset text before first section");
        current->append(line);
    }
    for (const char* name : {"program", "document", "tests", "messages", "output"}) {
        if (!sections.contains(name)) {
            throw Error(ErrorCode::FormatMismatch, std::string("exemplar asset lacks @@") + name);
        }
    }
    ExemplarPair pair;
    pair.language = language;
    pair.format = format;
    pair.input_report.program_text = trim_trailing_newlines(sections["program"]);
    pair.input_report.document_section = trim_trailing_newlines(sections["document"]);
    pair.input_report.test_section = trim_trailing_newlines(sections["tests"]);
    pair.input_report.message_section = trim_trailing_newlines(sections["messages"]);
    pair.output_text = trim_trailing_newlines(sections["output"]);
    return pair;
}

const ExemplarPair& default_exemplar(Language language, PromptFormat format) {
    static const std::map<std::pair<Language, PromptFormat>, ExemplarPair> exemplars = [] {
        std::map<std::pair<Language, PromptFormat>, ExemplarPair> m;
        for (Language lang : {Language::c_like, Language::python_like}) {
            for (PromptFormat f : kAllFormats) {
                std::string name = "exemplars/" + std::string(to_string(lang)) + "_" + std::string(to_string(f)) + ".txt";
                m.emplace(std::pair{lang, f}, parse_exemplar_asset(detail::embedded_asset(name), lang, f));
            }
        }
        return m;
    }();
    return exemplars.at({language, format});
}

}  // namespace d4c
