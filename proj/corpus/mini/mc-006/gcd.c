#include <stdlib.h>

#include "gcd.h"

int gcd(int a, int b);

int lcm(int a, int b)
{
    return a / gcd(a, b) * b;
}

int gcd(int a, int b)
{
    a = abs(a);
    b = abs(b);
    while (b != 0) {
        int t = a % b;
        a = b;
        b = t;
    }
    return b;
}
