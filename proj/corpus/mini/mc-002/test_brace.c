#include <stdio.h>
static int failures = 0;
static void check_int(const char *name, long got, long want)
{
    if (got != want) {
        printf("FAIL %s: got %ld, want %ld\n", name, got, want);
        failures++;
    }
}
#include "brace.h"

int main(void)
{
    check_int("test_nested", brace_depth("{{}{}}"), 2);
    check_int("test_reversed", brace_depth("}{"), -1);
    check_int("test_empty", brace_depth(""), 0);
    return failures ? 1 : 0;
}
