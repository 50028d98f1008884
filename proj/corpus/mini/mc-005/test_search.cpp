#include <cstdio>
#include <vector>

#include "search.hpp"

static int failures = 0;

static void check(const char* name, int got, int want)
{
    if (got != want) {
        std::printf("FAIL %s: got %d, want %d\n", name, got, want);
        ++failures;
    }
}

int main()
{
    check("test_last", binary_search({1, 3, 5}, 5), 2);
    check("test_single", binary_search({7}, 7), 0);
    check("test_missing", binary_search({1, 3, 5}, 4), -1);
    return failures ? 1 : 0;
}
