#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "d4c/bug_model.hpp"

namespace d4c {

/// Input side (Mask: program with hunks masked; Report: whole program) crossed with
/// output side (Hunk: fixed hunks only; Func: complete refined function).
enum class PromptFormat { mask_hunk, mask_func, report_hunk, report_func };

inline constexpr std::array<PromptFormat, 4> kAllFormats = {PromptFormat::mask_hunk, PromptFormat::mask_func,
                                                            PromptFormat::report_hunk, PromptFormat::report_func};

std::string_view to_string(PromptFormat format);
/// Accepts snake_case ("report_func") and display names ("Report-Func").
PromptFormat parse_format(std::string_view text);
std::string_view display_name(PromptFormat format);

inline bool is_masked_input(PromptFormat f) { return f == PromptFormat::mask_hunk || f == PromptFormat::mask_func; }
inline bool is_function_output(PromptFormat f) {
    return f == PromptFormat::mask_func || f == PromptFormat::report_func;
}

inline constexpr std::string_view kMaskToken = ">>> INFILL <<<";

/// "This program does not possess any known <artifact>."
std::string placeholder_sentence(std::string_view artifact);

struct BugReport {
    std::string program_text;
    std::string document_section;
    std::string test_section;
    std::string message_section;

    bool operator==(const BugReport&) const = default;
};

struct ExemplarPair {
    Language language = Language::c_like;
    PromptFormat format = PromptFormat::report_func;
    BugReport input_report;
    std::string output_text;
};

enum class Role { system, user, assistant };
std::string_view to_string(Role role);

struct Message {
    Role role;
    std::string content;

    bool operator==(const Message&) const = default;
};

enum class RenderMode { chat, text_completion };
std::string_view to_string(RenderMode mode);
RenderMode parse_render_mode(std::string_view text);

/// Literal markers used by the single-string rendering. Backends needing model-specific
/// special tokens supply their own.
struct TextMarkers {
    std::string inst_open = "[INST]";
    std::string inst_close = "[/INST]";
    std::string separator = "<SEP>";
};

struct PromptBundle {
    std::string system_instruction;
    std::vector<Message> messages;  // chat mode only
    std::string flat_text;          // text_completion mode only
    PromptFormat format = PromptFormat::report_func;
    RenderMode mode = RenderMode::chat;

    /// The text a backend sees: flat_text, or the messages joined for chat mode.
    std::string serialized() const;
};

/// Builds the four report sections, masking known hunks for Mask-* formats.
BugReport build_report(const BugInstance& bug, PromptFormat format);

/// Variant taking already-read source text (no filesystem access).
BugReport build_report(const BugInstance& bug, PromptFormat format, std::string_view source);

/// Replaces each hunk (1-based inclusive lines of `function_text`) by one mask line that
/// keeps the indentation of the hunk's first line.
std::string mask_hunks(std::string_view function_text, std::vector<HunkSpec> hunks);

/// Converts file-relative hunk lines into lines relative to the function's first line.
std::vector<HunkSpec> to_function_relative(const std::vector<HunkSpec>& hunks, std::string_view source,
                                           const FunctionSpan& span);

/// The user-turn text for one report: program, document, tests, messages, in that order.
std::string render_report_text(const BugReport& report);

/// Renders the test section for the given cases (placeholder when empty).
std::string render_test_section(const std::vector<TestCase>& tests);

std::string_view system_instruction(PromptFormat format);

PromptBundle render_prompt(const BugReport& report, PromptFormat format, const ExemplarPair& exemplar,
                           RenderMode mode, const TextMarkers& markers = {});

/// The shipped handcrafted exemplar for (language, format). Always the same object.
const ExemplarPair& default_exemplar(Language language, PromptFormat format);

/// Parses an exemplar asset ("@@program", "@@document", "@@tests", "@@messages", "@@output" sections).
ExemplarPair parse_exemplar_asset(std::string_view text, Language language, PromptFormat format);

}  // namespace d4c
