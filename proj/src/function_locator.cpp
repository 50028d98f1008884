#include <algorithm>
#include <vector>

#include "d4c/bug_model.hpp"
#include "d4c/error.hpp"
#include "d4c/source_text.hpp"

namespace d4c {

namespace {

struct Cursor {
    std::string_view source;
    const std::vector<Token>& code;

    std::string_view text(std::size_t i) const { return source.substr(code[i].begin, code[i].end - code[i].begin); }
    bool is_punct(std::size_t i, char c) const {
        return i < code.size() && code[i].kind == TokenKind::punct && source[code[i].begin] == c;
    }
    bool is_ident(std::size_t i) const { return i < code.size() && code[i].kind == TokenKind::identifier; }
    // "::" shows up as two adjacent ':' tokens.
    bool is_scope_colon(std::size_t i) const {
        if (!is_punct(i, ':')) return false;
        std::size_t at = code[i].begin;
        return (at + 1 < source.size() && source[at + 1] == ':') || (at > 0 && source[at - 1] == ':');
    }

    // Index of the token closing the group opened at `open`, or code.size() if unbalanced.
    std::size_t match_group(std::size_t open, char opener, char closer) const {
        int depth = 0;
        for (std::size_t i = open; i < code.size(); ++i) {
            if (is_punct(i, opener)) {
                ++depth;
            } else if (is_punct(i, closer)) {
                if (--depth == 0) return i;
            }
        }
        return code.size();
    }
};

// From the token after a parameter list's ')', finds the body's '{' if this is a
// definition. Returns code.size() for declarations and calls.
std::size_t find_body_open(const Cursor& cur, std::size_t after_params) {
    const auto n = cur.code.size();
    int angle_depth = 0;
    bool in_init_list = false;
    std::size_t i = after_params;
    while (i < n) {
        const Token& tok = cur.code[i];
        if (tok.kind == TokenKind::directive || tok.kind == TokenKind::string || tok.kind == TokenKind::character)
            return n;
        if (tok.kind == TokenKind::identifier || tok.kind == TokenKind::number) {
            ++i;
            continue;
        }
        char c = cur.source[tok.begin];
        switch (c) {
            case '{': {
                if (!in_init_list) return i;
                // Inside a constructor initializer list a brace right after a member name is a
                // brace-initializer; after a completed initializer it opens the body.
                bool after_name = i > 0 && (cur.is_ident(i - 1) || cur.is_punct(i - 1, '>'));
                if (!after_name) return i;
                std::size_t close = cur.match_group(i, '{', '}');
                if (close == n) return n;
                i = close + 1;
                break;
            }
            case '(': {
                std::size_t close = cur.match_group(i, '(', ')');
                if (close == n) return n;
                i = close + 1;
                break;
            }
            case ':':
                if (!cur.is_scope_colon(i)) in_init_list = true;
                ++i;
                break;
            case '<':
                ++angle_depth;
                ++i;
                break;
            case '>':
                if (angle_depth > 0) --angle_depth;
                ++i;
                break;
            case ',':
                if (angle_depth == 0 && !in_init_list) return n;
                ++i;
                break;
            case '-':
                if (cur.is_punct(i + 1, '>')) {
                    i += 2;
                    break;
                }
                return n;
            case '&':
            case '*':
            case '[':
            case ']':
            case '.':
                ++i;
                break;
            default:
                return n;
        }
    }
    return n;
}

// Walks back from the name token to the first token of the declaration.
std::size_t find_signature_start(const Cursor& cur, std::size_t name_index) {
    std::size_t i = name_index;
    while (i > 0) {
        std::size_t prev = i - 1;
        const Token& tok = cur.code[prev];
        if (tok.kind == TokenKind::directive) break;
        if (tok.kind == TokenKind::punct) {
            char c = cur.source[tok.begin];
            if (c == ';' || c == '{' || c == '}') break;
            if (c == ':' && !cur.is_scope_colon(prev)) break;
        }
        i = prev;
    }
    return i;
}

FunctionSpan locate_c_like(std::string_view source, std::string_view name, std::optional<int> header_line) {
    auto all = lex_c_like(source);
    std::vector<Token> code;
    code.reserve(all.size());
    std::copy_if(all.begin(), all.end(), std::back_inserter(code),
                 [](const Token& t) { return t.kind != TokenKind::comment; });
    Cursor cur{source, code};

    for (std::size_t i = 0; i < code.size(); ++i) {
        if (!cur.is_ident(i) || cur.text(i) != name || !cur.is_punct(i + 1, '(')) continue;
        if (i > 0 && (cur.is_punct(i - 1, '.') || (cur.is_punct(i - 1, '>') && i > 1 && cur.is_punct(i - 2, '-'))))
            continue;
        std::size_t params_close = cur.match_group(i + 1, '(', ')');
        if (params_close == code.size()) {
            throw Error(ErrorCode::UnbalancedDelimiters,
                        "parameter list of '" + std::string(name) + "' is never closed");
        }
        std::size_t body_open = find_body_open(cur, params_close + 1);
        if (body_open == code.size()) continue;
        std::size_t body_close = cur.match_group(body_open, '{', '}');
        if (body_close == code.size()) {
            throw Error(ErrorCode::UnbalancedDelimiters,
                        "file ends before the body of '" + std::string(name) + "' is closed");
        }
        std::size_t start_token = find_signature_start(cur, i);
        FunctionSpan span{code[start_token].begin, code[body_close].end, line_of_offset(source, code[start_token].begin)};
        if (header_line && *header_line != span.header_line && *header_line != line_of_offset(source, code[i].begin)) {
            i = body_close;
            continue;
        }
        return span;
    }
    throw Error(ErrorCode::FunctionNotFound, "no definition of '" + std::string(name) + "'");
}

int indentation_width(std::string_view line) {
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
    return width;
}

struct PythonLineInfo {
    bool continuation = false;  // starts inside brackets, a string, or after a backslash
    bool has_code = false;      // contains a non-comment token starting on this line
    bool has_comment = false;
};

std::vector<PythonLineInfo> python_line_info(std::string_view source, const std::vector<Token>& tokens,
                                             const std::vector<std::size_t>& line_starts) {
    std::vector<PythonLineInfo> info(line_starts.size());
    auto line_index = [&](std::size_t offset) {
        auto it = std::upper_bound(line_starts.begin(), line_starts.end(), offset);
        return static_cast<std::size_t>(it - line_starts.begin()) - 1;
    };
    int depth = 0;
    std::size_t next_line = 1;
    for (const auto& tok : tokens) {
        std::size_t first = line_index(tok.begin);
        while (next_line <= first && next_line < info.size()) {
            if (depth > 0) info[next_line].continuation = true;
            ++next_line;
        }
        if (tok.kind == TokenKind::comment) {
            info[first].has_comment = true;
        } else {
            info[first].has_code = true;
        }
        if (tok.kind == TokenKind::string) {
            std::size_t last = line_index(tok.end == 0 ? 0 : tok.end - 1);
            for (std::size_t l = first + 1; l <= last && l < info.size(); ++l) info[l].continuation = true;
        } else if (tok.kind == TokenKind::punct) {
            char c = source[tok.begin];
            if (c == '(' || c == '[' || c == '{') ++depth;
            if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
        }
    }
    while (next_line < info.size()) {
        if (depth > 0) info[next_line].continuation = true;
        ++next_line;
    }
    for (std::size_t l = 0; l + 1 < line_starts.size(); ++l) {
        auto line = strip_line_end(source.substr(line_starts[l], line_starts[l + 1] - line_starts[l]));
        if (!line.empty() && line.back() == '\\' && !info[l].has_comment) info[l + 1].continuation = true;
    }
    return info;
}

FunctionSpan locate_python_like(std::string_view source, std::string_view name, std::optional<int> header_line) {
    auto tokens = lex_python_like(source);
    std::vector<std::size_t> line_starts{0};
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (source[i] == '\n' && i + 1 < source.size()) line_starts.push_back(i + 1);
    }
    auto line_index = [&](std::size_t offset) {
        auto it = std::upper_bound(line_starts.begin(), line_starts.end(), offset);
        return static_cast<std::size_t>(it - line_starts.begin()) - 1;
    };
    auto line_text = [&](std::size_t l) {
        std::size_t end = l + 1 < line_starts.size() ? line_starts[l + 1] : source.size();
        return strip_line_end(source.substr(line_starts[l], end - line_starts[l]));
    };
    auto tok_text = [&](std::size_t i) { return source.substr(tokens[i].begin, tokens[i].end - tokens[i].begin); };
    auto is_punct = [&](std::size_t i, char c) {
        return i < tokens.size() && tokens[i].kind == TokenKind::punct && source[tokens[i].begin] == c;
    };

    std::vector<PythonLineInfo> info;
    for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
        if (tokens[i].kind != TokenKind::identifier || tok_text(i) != "def") continue;
        if (tokens[i + 1].kind != TokenKind::identifier || tok_text(i + 1) != name || !is_punct(i + 2, '(')) continue;

        std::size_t start = tokens[i].begin;
        std::size_t sig_line = line_index(start);
        auto prefix = source.substr(line_starts[sig_line], start - line_starts[sig_line]);
        auto trimmed = collapse_whitespace(prefix);
        if (trimmed == "async") {
            start = line_starts[sig_line] + prefix.find("async");
        } else if (!trimmed.empty()) {
            continue;
        }
        if (header_line && static_cast<int>(sig_line) + 1 != *header_line) continue;

        // Parameter list, optional return annotation, then the ':' that ends the signature.
        int depth = 0;
        std::size_t colon = tokens.size();
        for (std::size_t j = i + 2; j < tokens.size(); ++j) {
            if (tokens[j].kind != TokenKind::punct) continue;
            char c = source[tokens[j].begin];
            if (c == '(' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == ']' || c == '}') --depth;
            if (c == ':' && depth == 0) {
                colon = j;
                break;
            }
        }
        if (colon == tokens.size()) {
            throw Error(ErrorCode::UnbalancedDelimiters, "signature of '" + std::string(name) + "' never ends with ':'");
        }
        if (info.empty()) info = python_line_info(source, tokens, line_starts);

        std::size_t colon_line = line_index(tokens[colon].begin);
        std::size_t last_line = colon_line;
        bool inline_body = colon + 1 < tokens.size() && tokens[colon + 1].kind != TokenKind::comment &&
                           line_index(tokens[colon + 1].begin) == colon_line;
        if (!inline_body) {
            int sig_indent = indentation_width(line_text(sig_line));
            for (std::size_t l = colon_line + 1; l < line_starts.size(); ++l) {
                auto text = line_text(l);
                if (info[l].continuation) {
                    last_line = l;
                    continue;
                }
                bool blank = collapse_whitespace(text).empty();
                if (blank) continue;
                bool deeper = indentation_width(text) > sig_indent;
                if (!info[l].has_code) {
                    if (deeper) last_line = l;
                    continue;
                }
                if (!deeper) break;
                last_line = l;
            }
        }
        std::size_t end = line_starts[last_line] + line_text(last_line).size();
        return FunctionSpan{start, end, static_cast<int>(sig_line) + 1};
    }
    throw Error(ErrorCode::FunctionNotFound, "no definition of '" + std::string(name) + "'");
}

}  // namespace

FunctionSpan locate_function(std::string_view source, Language language, std::string_view function_name,
                             std::optional<int> header_line) {
    if (function_name.empty()) throw Error(ErrorCode::FunctionNotFound, "empty function name");
    return language == Language::c_like ? locate_c_like(source, function_name, header_line)
                                        : locate_python_like(source, function_name, header_line);
}

}  // namespace d4c
