#include <doctest.h>

#include <algorithm>

#include "d4c/source_text.hpp"

using namespace d4c;

namespace {

std::vector<std::string> kinds_and_text(std::string_view src, const std::vector<Token>& tokens, TokenKind kind) {
    std::vector<std::string> out;
    for (const auto& t : tokens) {
        if (t.kind == kind) out.emplace_back(src.substr(t.begin, t.end - t.begin));
    }
    return out;
}

}  // namespace

TEST_SUITE("source_text") {

TEST_CASE("c_like lexer separates code from comments and literals") {
    const std::string src =
        "#include <a.h> // not a comment token\n"
        "int x = 1'000; /* block */ char c = '\\''; // line\n"
        "auto s = \"a\\\"b\"; auto r = R\"d()\")d\";\n";
    auto tokens = lex_c_like(src);
    auto comments = kinds_and_text(src, tokens, TokenKind::comment);
    REQUIRE(comments.size() == 2);
    CHECK(comments[0] == "/* block */");
    CHECK(comments[1] == "// line");
    auto strings = kinds_and_text(src, tokens, TokenKind::string);
    REQUIRE(strings.size() == 2);
    CHECK(strings[0] == "\"a\\\"b\"");
    CHECK(strings[1] == "R\"d()\")d\"");
    CHECK(kinds_and_text(src, tokens, TokenKind::character) == std::vector<std::string>{"'\\''"});
    CHECK(kinds_and_text(src, tokens, TokenKind::number) == std::vector<std::string>{"1'000"});
    CHECK(kinds_and_text(src, tokens, TokenKind::directive).size() == 1);
}

TEST_CASE("python lexer handles prefixed and triple-quoted strings") {
    const std::string src = "x = rb'\\d' + f\"{y}\"  # c\ns = '''a\n'b'\n'''\n";
    auto tokens = lex_python_like(src);
    auto strings = kinds_and_text(src, tokens, TokenKind::string);
    REQUIRE(strings.size() == 3);
    CHECK(strings[0] == "rb'\\d'");
    CHECK(strings[1] == "f\"{y}\"");
    CHECK(strings[2] == "'''a\n'b'\n'''");
    CHECK(kinds_and_text(src, tokens, TokenKind::comment) == std::vector<std::string>{"# c"});
}

TEST_CASE("line helpers") {
    auto lines = split_lines_keep_ends("a\r\nb\nc");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "a\r\n");
    CHECK(strip_line_end(lines[0]) == "a");
    CHECK(lines[2] == "c");
    CHECK(split_lines_keep_ends("").empty());
    CHECK(line_of_offset("ab\ncd\n", 0) == 1);
    CHECK(line_of_offset("ab\ncd\n", 3) == 2);
    CHECK(offset_of_line("ab\ncd\n", 2) == 3);
    CHECK(offset_of_line("ab\ncd\n", 9) == 6);
    CHECK(collapse_whitespace("  a \t b\n\n c ") == "a b c");
}

TEST_CASE("strip_comments keeps line structure") {
    CHECK(strip_comments("a /* x\ny */ b // z\nc", Language::c_like).find("x") == std::string::npos);
    const std::string stripped = strip_comments("a /* x\ny */ b // z\nc", Language::c_like);
    CHECK(std::count(stripped.begin(), stripped.end(), '\n') == 2);
    CHECK(strip_comments("s = '#'  # gone\n", Language::python_like).find("gone") == std::string::npos);
    CHECK(strip_comments("s = '#'  # gone\n", Language::python_like).find("'#'") != std::string::npos);
}

TEST_CASE("contains_call_like matches whole identifiers followed by a paren") {
    CHECK(contains_call_like("x = add (1, 2);", "add"));
    CHECK_FALSE(contains_call_like("x = adder(1);", "add"));
    CHECK_FALSE(contains_call_like("x = add;", "add"));
}

}
