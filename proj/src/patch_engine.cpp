#include "d4c/patch_engine.hpp"

#include <algorithm>

#include "d4c/error.hpp"
#include "d4c/source_text.hpp"

namespace d4c {

namespace {

std::string_view trim_left(std::string_view s) {
    std::size_t i = s.find_first_not_of(" \t");
    return i == std::string_view::npos ? std::string_view{} : s.substr(i);
}

std::string_view trim(std::string_view s) {
    s = trim_left(s);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Length of the fence run at the start of a left-trimmed line, 0 if none.
std::size_t fence_run(std::string_view line, char& fence_char) {
    if (line.size() < 3 || (line[0] != '`' && line[0] != '~')) return 0;
    char c = line[0];
    std::size_t n = 0;
    while (n < line.size() && line[n] == c) ++n;
    if (n < 3) return 0;
    fence_char = c;
    return n;
}

std::string trailing_newline_run(std::string_view text) {
    std::size_t end = text.size();
    while (end > 0 && (text[end - 1] == '\n' || text[end - 1] == '\r')) --end;
    return std::string(text.substr(end));
}

std::string_view without_trailing_newlines(std::string_view text) {
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
    return text;
}

void check_span(std::string_view source, const FunctionSpan& span) {
    if (span.start_offset >= span.end_offset || span.end_offset > source.size()) {
        throw Error(ErrorCode::SpanInvalid, "span [" + std::to_string(span.start_offset) + ", " +
                                                std::to_string(span.end_offset) + ") invalid for " +
                                                std::to_string(source.size()) + " bytes");
    }
}

std::vector<LineRange> touched_ranges(std::string_view old_text, std::string_view new_text) {
    const auto a = split_lines_keep_ends(old_text);
    const auto b = split_lines_keep_ends(new_text);
    std::vector<LineRange> ranges;
    const auto edits = diff_lines(a, b);
    std::size_t i = 0;
    while (i < edits.size()) {
        if (edits[i].op == EditOp::equal) {
            ++i;
            continue;
        }
        int start = static_cast<int>(edits[i].new_index) + 1;
        int inserted = 0;
        while (i < edits.size() && edits[i].op != EditOp::equal) {
            if (edits[i].op == EditOp::insert) ++inserted;
            ++i;
        }
        ranges.push_back({start, start + inserted - 1});
    }
    return ranges;
}

AppliedPatch finish(std::string_view source, std::string patched, std::string_view label) {
    AppliedPatch applied;
    applied.diff_text = unified_diff(source, patched, "a/" + std::string(label), "b/" + std::string(label));
    applied.touched_line_ranges = touched_ranges(source, patched);
    applied.patched_file_text = std::move(patched);
    return applied;
}

bool signature_like(std::string_view line, std::string_view name, Language language) {
    if (!contains_call_like(line, name)) return false;
    if (language == Language::python_like) return line.find("def") != std::string_view::npos;
    return true;
}

}  // namespace

std::vector<FencedBlock> fenced_blocks(std::string_view text) {
    std::vector<FencedBlock> blocks;
    auto lines = split_lines_keep_ends(text);
    std::size_t i = 0;
    while (i < lines.size()) {
        std::string_view opener = trim_left(strip_line_end(lines[i]));
        char fence_char = 0;
        std::size_t run = fence_run(opener, fence_char);
        if (run == 0) {
            ++i;
            continue;
        }
        FencedBlock block;
        block.info = std::string(trim(opener.substr(run)));
        std::string content;
        bool closed = false;
        std::size_t j = i + 1;
        for (; j < lines.size(); ++j) {
            std::string_view candidate = trim(strip_line_end(lines[j]));
            char closer_char = 0;
            std::size_t closer_run = fence_run(candidate, closer_char);
            if (closer_run >= run && closer_char == fence_char && closer_run == candidate.size()) {
                closed = true;
                break;
            }
            content.append(lines[j]);
        }
        block.content = std::string(without_trailing_newlines(content));
        block.closed = closed;
        blocks.push_back(std::move(block));
        i = j + 1;
    }
    return blocks;
}

ExtractedPatch extract_function(std::string_view response, std::string_view function_name, Language language) {
    auto take = [&](std::string_view candidate, std::optional<std::string> tag) -> std::optional<ExtractedPatch> {
        try {
            FunctionSpan span = locate_function(candidate, language, function_name);
            ExtractedPatch patch;
            patch.kind = PatchKind::whole_function;
            patch.function_text = std::string(candidate.substr(span.start_offset, span.length()));
            patch.source_fence_language_tag = std::move(tag);
            return patch;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    auto blocks = fenced_blocks(response);
    if (blocks.empty()) {
        for (std::string_view line : split_lines_keep_ends(response)) {
            std::string_view bare = trim(strip_line_end(line));
            if (bare.empty()) continue;
            if (signature_like(bare, function_name, language)) {
                if (auto patch = take(response, std::nullopt)) return *patch;
            }
            break;
        }
        throw Error(ErrorCode::NoFunctionFound, "response has no code defining '" + std::string(function_name) + "'");
    }

    bool any_mentions = false;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        if (it->content.find(function_name) != std::string::npos) any_mentions = true;
        if (!contains_call_like(it->content, function_name)) continue;
        std::optional<std::string> tag;
        if (!it->info.empty()) tag = it->info;
        if (auto patch = take(it->content, tag)) return *patch;
    }
    if (blocks.size() > 1 && !any_mentions) {
        throw Error(ErrorCode::AmbiguousWithoutName, std::to_string(blocks.size()) + " code blocks, none names '" +
                                                         std::string(function_name) + "'");
    }
    throw Error(ErrorCode::NoFunctionFound, "no code block defines '" + std::string(function_name) + "'");
}

ExtractedPatch extract_hunks(std::string_view response) {
    auto parse = [](std::string_view text) -> std::vector<HunkReplacement> {
        enum class State { outside, anchor, replacement } state = State::outside;
        std::vector<HunkReplacement> out;
        HunkReplacement current;
        for (std::string_view line : split_lines_keep_ends(text)) {
            std::string_view bare = strip_line_end(line);
            std::string_view marker = trim(bare);
            if (marker.starts_with("<<<<<<<")) {
                if (state != State::outside) return {};
                current = {};
                state = State::anchor;
            } else if (marker == "=======" && state == State::anchor) {
                state = State::replacement;
            } else if (marker.starts_with(">>>>>>>") && state == State::replacement) {
                out.push_back(std::move(current));
                state = State::outside;
            } else if (state == State::anchor) {
                current.anchor_lines.emplace_back(bare);
            } else if (state == State::replacement) {
                current.replacement_lines.emplace_back(bare);
            }
        }
        if (state != State::outside) return {};
        return out;
    };

    auto blocks = fenced_blocks(response);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        auto replacements = parse(it->content);
        if (!replacements.empty()) {
            ExtractedPatch patch;
            patch.kind = PatchKind::hunk_set;
            patch.replacements = std::move(replacements);
            if (!it->info.empty()) patch.source_fence_language_tag = it->info;
            return patch;
        }
    }
    if (blocks.empty()) {
        auto replacements = parse(response);
        if (!replacements.empty()) {
            ExtractedPatch patch;
            patch.kind = PatchKind::hunk_set;
            patch.replacements = std::move(replacements);
            return patch;
        }
    }
    throw Error(ErrorCode::NoHunksFound, "response has no well-formed BUGGY/FIXED hunks");
}

std::vector<std::string> extract_infills(std::string_view response, std::size_t mask_count) {
    auto blocks = fenced_blocks(response);
    if (blocks.empty() && mask_count == 1 && !trim(response).empty()) {
        return {std::string(without_trailing_newlines(response))};
    }
    if (mask_count == 0 || blocks.size() < mask_count) {
        throw Error(ErrorCode::NoHunksFound, "expected " + std::to_string(mask_count) + " infill blocks, found " +
                                                 std::to_string(blocks.size()));
    }
    std::vector<std::string> infills;
    for (std::size_t i = blocks.size() - mask_count; i < blocks.size(); ++i) infills.push_back(blocks[i].content);
    return infills;
}

std::string fill_masks(std::string_view function_text, std::vector<HunkSpec> hunks,
                       const std::vector<std::string>& infills) {
    if (hunks.size() != infills.size()) {
        throw Error(ErrorCode::NoHunksFound, std::to_string(infills.size()) + " infills for " +
                                                 std::to_string(hunks.size()) + " masks");
    }
    std::vector<std::size_t> order(hunks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return hunks[x].start_line < hunks[y].start_line; });

    auto lines = split_lines_keep_ends(function_text);
    std::string out;
    std::size_t line = 1;
    for (std::size_t idx : order) {
        const HunkSpec& h = hunks[idx];
        if (h.start_line < static_cast<int>(line) || h.end_line < h.start_line ||
            h.end_line > static_cast<int>(lines.size())) {
            throw Error(ErrorCode::HunkOutOfRange, "mask hunk " + std::to_string(h.start_line) + "-" +
                                                       std::to_string(h.end_line) + " invalid");
        }
        for (; line < static_cast<std::size_t>(h.start_line); ++line) out.append(lines[line - 1]);
        std::string_view last = lines[static_cast<std::size_t>(h.end_line) - 1];
        out.append(without_trailing_newlines(infills[idx]));
        out.append(last.substr(strip_line_end(last).size()));
        line = static_cast<std::size_t>(h.end_line) + 1;
    }
    for (; line <= lines.size(); ++line) out.append(lines[line - 1]);
    return out;
}

AppliedPatch apply_function_patch(std::string_view source, const FunctionSpan& span, std::string_view new_function,
                                  std::string_view label) {
    check_span(source, span);
    std::string_view original = source.substr(span.start_offset, span.length());
    std::string patched;
    patched.reserve(source.size() + new_function.size());
    patched.append(source.substr(0, span.start_offset));
    patched.append(without_trailing_newlines(new_function));
    patched.append(trailing_newline_run(original));
    patched.append(source.substr(span.end_offset));
    return finish(source, std::move(patched), label);
}

AppliedPatch apply_hunk_patch(std::string_view source, const FunctionSpan& span, const ExtractedPatch& patch,
                              std::string_view label) {
    check_span(source, span);
    if (patch.kind != PatchKind::hunk_set || patch.replacements.empty()) {
        throw Error(ErrorCode::NoHunksFound, "patch carries no hunk replacements");
    }
    std::string_view function_text = source.substr(span.start_offset, span.length());
    const auto lines = split_lines_keep_ends(function_text);
    std::vector<std::string> bare;
    std::vector<std::string> normalized;
    for (auto line : lines) {
        bare.emplace_back(strip_line_end(line));
        normalized.push_back(collapse_whitespace(strip_line_end(line)));
    }

    struct Match {
        std::size_t first;
        std::size_t count;
        std::size_t index;
    };
    std::vector<Match> matches;
    for (std::size_t r = 0; r < patch.replacements.size(); ++r) {
        const auto& anchor = patch.replacements[r].anchor_lines;
        if (anchor.empty() || anchor.size() > lines.size()) {
            throw Error(ErrorCode::AnchorNotFound, "replacement " + std::to_string(r) + ": anchor not in function");
        }
        auto find_all = [&](const std::vector<std::string>& haystack, bool normalize) {
            std::vector<std::size_t> hits;
            for (std::size_t start = 0; start + anchor.size() <= haystack.size(); ++start) {
                bool ok = true;
                for (std::size_t k = 0; k < anchor.size() && ok; ++k) {
                    ok = normalize ? haystack[start + k] == collapse_whitespace(anchor[k])
                                   : haystack[start + k] == anchor[k];
                }
                if (ok) hits.push_back(start);
            }
            return hits;
        };
        auto hits = find_all(bare, false);
        if (hits.empty()) hits = find_all(normalized, true);
        if (hits.empty()) {
            throw Error(ErrorCode::AnchorNotFound, "replacement " + std::to_string(r) + ": anchor not in function");
        }
        if (hits.size() > 1) {
            throw Error(ErrorCode::AnchorAmbiguous, "replacement " + std::to_string(r) + ": anchor occurs " +
                                                        std::to_string(hits.size()) + " times");
        }
        matches.push_back({hits.front(), anchor.size(), r});
    }
    std::sort(matches.begin(), matches.end(), [](const Match& x, const Match& y) { return x.first < y.first; });
    for (std::size_t i = 1; i < matches.size(); ++i) {
        if (matches[i].first < matches[i - 1].first + matches[i - 1].count) {
            throw Error(ErrorCode::AnchorOverlap, "replacement " + std::to_string(matches[i].index) +
                                                      " overlaps replacement " + std::to_string(matches[i - 1].index));
        }
    }

    std::string rebuilt;
    std::size_t line = 0;
    for (const Match& m : matches) {
        for (; line < m.first; ++line) rebuilt.append(lines[line]);
        std::string_view first_line = lines[m.first];
        std::string_view last_line = lines[m.first + m.count - 1];
        std::string eol(first_line.substr(strip_line_end(first_line).size()));
        if (eol.empty()) eol = "\n";
        const auto& replacement = patch.replacements[m.index].replacement_lines;
        for (std::size_t k = 0; k < replacement.size(); ++k) {
            rebuilt.append(replacement[k]);
            rebuilt.append(k + 1 == replacement.size() ? std::string(last_line.substr(strip_line_end(last_line).size()))
                                                       : eol);
        }
        line = m.first + m.count;
    }
    for (; line < lines.size(); ++line) rebuilt.append(lines[line]);

    std::string patched;
    patched.append(source.substr(0, span.start_offset));
    patched.append(rebuilt);
    patched.append(source.substr(span.end_offset));
    return finish(source, std::move(patched), label);
}

}  // namespace d4c
