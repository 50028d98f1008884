#include <stdio.h>
static int failures = 0;
static void check_int(const char *name, long got, long want)
{
    if (got != want) {
        printf("FAIL %s: got %ld, want %ld\n", name, got, want);
        failures++;
    }
}
#include "gcd.h"

int main(void)
{
    check_int("test_basic", gcd(12, 18), 6);
    check_int("test_negative", gcd(-4, 6), 2);
    check_int("test_coprime", gcd(7, 9), 1);
    return failures ? 1 : 0;
}
