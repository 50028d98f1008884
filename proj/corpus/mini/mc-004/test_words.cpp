#include <cstdio>
#include <string>

#include "words.hpp"

static int failures = 0;

static void check(const char* name, const std::string& got, const std::string& want)
{
    if (got != want) {
        std::printf("FAIL %s: got \"%s\", want \"%s\"\n", name, got.c_str(), want.c_str());
        ++failures;
    }
}

int main()
{
    check("test_three", text::reverse_words("a b c"), "c b a");
    check("test_spaces", text::reverse_words("  hello   world "), "world hello");
    check("test_empty", text::reverse_words(""), "");
    return failures ? 1 : 0;
}
