#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d4c/bug_model.hpp"

namespace d4c {

struct FencedBlock {
    std::string info;     // text after the opening fence, trimmed
    std::string content;  // lines between the fences, without the final newline
    bool closed = true;
};

/// Markdown-style ``` / ~~~ fenced blocks in document order. An unclosed final fence runs to the end.
std::vector<FencedBlock> fenced_blocks(std::string_view text);

struct HunkReplacement {
    std::vector<std::string> anchor_lines;
    std::vector<std::string> replacement_lines;

    bool operator==(const HunkReplacement&) const = default;
};

enum class PatchKind { whole_function, hunk_set };

struct ExtractedPatch {
    PatchKind kind = PatchKind::whole_function;
    std::string function_text;                  // whole_function
    std::vector<HunkReplacement> replacements;  // hunk_set
    std::optional<std::string> source_fence_language_tag;
};

/// 1-based inclusive line range; end < start denotes an empty range at `start`.
struct LineRange {
    int start = 0;
    int end = 0;

    bool operator==(const LineRange&) const = default;
};

struct AppliedPatch {
    std::string patched_file_text;
    std::string diff_text;
    std::vector<LineRange> touched_line_ranges;  // new-file lines
};

/// Picks the last fenced block that defines `function_name` and returns exactly that
/// definition. Without fences the whole response qualifies only when its first
/// non-blank line is a signature naming the function.
ExtractedPatch extract_function(std::string_view response, std::string_view function_name, Language language);

/// Parses conflict-marker hunks ("<<<<<<< BUGGY" / "=======" / ">>>>>>> FIXED") from
/// the last fenced block that carries them, or from the bare response.
ExtractedPatch extract_hunks(std::string_view response);

/// Infill texts for `mask_count` masks: the last `mask_count` fenced blocks, in order.
std::vector<std::string> extract_infills(std::string_view response, std::size_t mask_count);

/// Rebuilds a function by writing each infill over its hunk's lines (function-relative,
/// 1-based inclusive). Infill text is inserted verbatim.
std::string fill_masks(std::string_view function_text, std::vector<HunkSpec> hunks,
                       const std::vector<std::string>& infills);

/// Splices `new_function` over `span`. The replacement's trailing newline run is
/// normalized to the original span's.
AppliedPatch apply_function_patch(std::string_view source, const FunctionSpan& span, std::string_view new_function,
                                  std::string_view label = "function");

/// Applies every replacement inside the span or none. Anchors are resolved against the
/// original function text: exact match first, then whitespace-normalized.
AppliedPatch apply_hunk_patch(std::string_view source, const FunctionSpan& span, const ExtractedPatch& patch,
                              std::string_view label = "function");

/// Standard unified diff with 3 context lines; empty when the inputs are identical.
std::string unified_diff(std::string_view old_text, std::string_view new_text, std::string_view label_old,
                         std::string_view label_new, int context = 3);

enum class EditOp { equal, remove, insert };

struct LineEdit {
    EditOp op;
    std::size_t old_index;  // valid for equal/remove
    std::size_t new_index;  // valid for equal/insert
};

/// Shortest line edit script (Myers) between two line sequences.
std::vector<LineEdit> diff_lines(const std::vector<std::string_view>& old_lines,
                                 const std::vector<std::string_view>& new_lines);

}  // namespace d4c
