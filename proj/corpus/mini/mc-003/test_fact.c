#include <stdio.h>
static int failures = 0;
static void check_int(const char *name, long got, long want)
{
    if (got != want) {
        printf("FAIL %s: got %ld, want %ld\n", name, got, want);
        failures++;
    }
}
#include "fact.h"

int main(void)
{
    check_int("test_zero", (long)factorial(0), 1);
    check_int("test_five", (long)factorial(5), 120);
    check_int("test_ten", (long)factorial(10), 3628800);
    return failures ? 1 : 0;
}
