#include "d4c/source_text.hpp"

#include <algorithm>
#include <cctype>

namespace d4c {

namespace {

bool is_ident_start(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || c == '$' || u >= 0x80;
}

bool is_ident_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '$' || u >= 0x80;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

// Scans a quoted literal starting at `pos` (the opening quote). Stops after the closing
// quote, or before an unescaped newline when the literal is unterminated.
std::size_t scan_quoted(std::string_view s, std::size_t pos, char quote) {
    std::size_t i = pos + 1;
    while (i < s.size()) {
        char c = s[i];
        if (c == '\\') {
            i += 2;
            continue;
        }
        if (c == quote) return i + 1;
        if (c == '\n') return i;
        ++i;
    }
    return s.size();
}

std::size_t scan_triple_quoted(std::string_view s, std::size_t pos, char quote) {
    const char closer[] = {quote, quote, quote, '\0'};
    std::size_t i = pos + 3;
    while (i < s.size()) {
        if (s[i] == '\\') {
            i += 2;
            continue;
        }
        if (s.compare(i, 3, closer) == 0) return i + 3;
        ++i;
    }
    return s.size();
}

std::size_t scan_number(std::string_view s, std::size_t pos, bool allow_separator) {
    std::size_t i = pos;
    while (i < s.size()) {
        char c = s[i];
        if (is_ident_char(c) || c == '.') {
            if ((c == 'e' || c == 'E' || c == 'p' || c == 'P') && i + 1 < s.size() &&
                (s[i + 1] == '+' || s[i + 1] == '-')) {
                i += 2;
                continue;
            }
            ++i;
        } else if (allow_separator && c == '\'' && i + 1 < s.size() &&
                   std::isalnum(static_cast<unsigned char>(s[i + 1]))) {
            ++i;
        } else {
            break;
        }
    }
    return i;
}

bool is_raw_string_prefix(std::string_view ident) {
    return ident == "R" || ident == "u8R" || ident == "uR" || ident == "UR" || ident == "LR";
}

// Raw string body starting at the opening quote: "delim( ... )delim"
std::size_t scan_raw_string(std::string_view s, std::size_t quote_pos) {
    std::size_t open_paren = s.find('(', quote_pos + 1);
    if (open_paren == std::string_view::npos) return s.size();
    std::string closer = ")";
    closer.append(s.substr(quote_pos + 1, open_paren - quote_pos - 1));
    closer.push_back('"');
    std::size_t close = s.find(closer, open_paren + 1);
    return close == std::string_view::npos ? s.size() : close + closer.size();
}

bool is_python_string_prefix(std::string_view ident) {
    if (ident.size() > 2) return false;
    std::string lower;
    for (char c : ident) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower == "r" || lower == "b" || lower == "u" || lower == "f" || lower == "rb" || lower == "br" ||
           lower == "fr" || lower == "rf";
}

}  // namespace

std::vector<Token> lex_c_like(std::string_view s) {
    std::vector<Token> tokens;
    bool line_start = true;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (is_space(c)) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        if (c == '#' && line_start) {
            while (i < s.size() && s[i] != '\n') {
                if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == '\n' || s[i + 1] == '\r')) {
                    i += (s[i + 1] == '\r' && i + 2 < s.size() && s[i + 2] == '\n') ? 3 : 2;
                    continue;
                }
                ++i;
            }
            tokens.push_back({TokenKind::directive, begin, i});
            continue;
        }
        line_start = false;
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') ++i;
            tokens.push_back({TokenKind::comment, begin, i});
        } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            std::size_t close = s.find("*/", i + 2);
            i = close == std::string_view::npos ? s.size() : close + 2;
            tokens.push_back({TokenKind::comment, begin, i});
        } else if (c == '"') {
            if (s.compare(i, 3, "\"\"\"") == 0) {
                i = scan_triple_quoted(s, i, '"');
            } else {
                i = scan_quoted(s, i, '"');
            }
            tokens.push_back({TokenKind::string, begin, i});
        } else if (c == '\'') {
            i = scan_quoted(s, i, '\'');
            tokens.push_back({TokenKind::character, begin, i});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            i = scan_number(s, i, true);
            tokens.push_back({TokenKind::number, begin, i});
        } else if (is_ident_start(c)) {
            while (i < s.size() && is_ident_char(s[i])) ++i;
            if (i < s.size() && s[i] == '"' && is_raw_string_prefix(s.substr(begin, i - begin))) {
                i = scan_raw_string(s, i);
                tokens.push_back({TokenKind::string, begin, i});
            } else {
                tokens.push_back({TokenKind::identifier, begin, i});
            }
        } else {
            ++i;
            tokens.push_back({TokenKind::punct, begin, i});
        }
    }
    return tokens;
}

std::vector<Token> lex_python_like(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (is_space(c)) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        if (c == '#') {
            while (i < s.size() && s[i] != '\n') ++i;
            tokens.push_back({TokenKind::comment, begin, i});
        } else if (c == '"' || c == '\'') {
            i = s.compare(i, 3, std::string(3, c)) == 0 ? scan_triple_quoted(s, i, c) : scan_quoted(s, i, c);
            tokens.push_back({TokenKind::string, begin, i});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            i = scan_number(s, i, false);
            tokens.push_back({TokenKind::number, begin, i});
        } else if (is_ident_start(c)) {
            while (i < s.size() && is_ident_char(s[i])) ++i;
            if (i < s.size() && (s[i] == '"' || s[i] == '\'') && is_python_string_prefix(s.substr(begin, i - begin))) {
                char q = s[i];
                i = s.compare(i, 3, std::string(3, q)) == 0 ? scan_triple_quoted(s, i, q) : scan_quoted(s, i, q);
                tokens.push_back({TokenKind::string, begin, i});
            } else {
                tokens.push_back({TokenKind::identifier, begin, i});
            }
        } else {
            ++i;
            tokens.push_back({TokenKind::punct, begin, i});
        }
    }
    return tokens;
}

std::vector<std::string_view> split_lines_keep_ends(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start + 1));
        start = nl + 1;
    }
    return lines;
}

std::string_view strip_line_end(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::string strip_comments(std::string_view source, Language language) {
    auto tokens = language == Language::c_like ? lex_c_like(source) : lex_python_like(source);
    std::string out;
    out.reserve(source.size());
    std::size_t cursor = 0;
    for (const auto& tok : tokens) {
        if (tok.kind != TokenKind::comment) continue;
        out.append(source.substr(cursor, tok.begin - cursor));
        auto body = source.substr(tok.begin, tok.end - tok.begin);
        out.append(static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n')), '\n');
        cursor = tok.end;
    }
    out.append(source.substr(cursor));
    return out;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

int line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::size_t offset_of_line(std::string_view text, int line) {
    std::size_t pos = 0;
    for (int current = 1; current < line; ++current) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) return text.size();
        pos = nl + 1;
    }
    return pos;
}

bool contains_call_like(std::string_view text, std::string_view name) {
    if (name.empty()) return false;
    std::size_t pos = 0;
    while ((pos = text.find(name, pos)) != std::string_view::npos) {
        bool left_ok = pos == 0 || !is_ident_char(text[pos - 1]);
        std::size_t after = pos + name.size();
        bool right_word = after < text.size() && is_ident_char(text[after]);
        if (left_ok && !right_word) {
            while (after < text.size() && (text[after] == ' ' || text[after] == '\t')) ++after;
            if (after < text.size() && text[after] == '(') return true;
        }
        pos += 1;
    }
    return false;
}

}  // namespace d4c
