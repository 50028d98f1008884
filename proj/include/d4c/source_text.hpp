#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "d4c/bug_model.hpp"

namespace d4c {

enum class TokenKind { identifier, number, punct, string, character, comment, directive };

struct Token {
    TokenKind kind;
    std::size_t begin;
    std::size_t end;
};

/// Lexes brace-family source just far enough to tell code from comments and literals.
/// Handles line/block comments, string and character literals with escapes, C++ raw
/// strings, Java text blocks, digit separators, and preprocessor directive lines.
std::vector<Token> lex_c_like(std::string_view source);

/// Lexes Python source: identifiers, numbers, punctuation, comments, and all string
/// forms including prefixed and triple-quoted literals.
std::vector<Token> lex_python_like(std::string_view source);

/// Splits into lines, each keeping its terminator ("\n" or "\r\n"); the last line may lack one.
std::vector<std::string_view> split_lines_keep_ends(std::string_view text);

/// Line text without its terminator.
std::string_view strip_line_end(std::string_view line);

/// Removes comments (keeping line structure) using the language's lexer.
std::string strip_comments(std::string_view source, Language language);

/// Collapses every whitespace run into one space and trims both ends.
std::string collapse_whitespace(std::string_view text);

/// 1-based line number of `offset`.
int line_of_offset(std::string_view text, std::size_t offset);

/// Byte offset where 1-based `line` begins (text.size() when past the end).
std::size_t offset_of_line(std::string_view text, int line);

/// True when `name` occurs as a whole identifier followed (after optional spaces) by '('.
bool contains_call_like(std::string_view text, std::string_view name);

}  // namespace d4c
