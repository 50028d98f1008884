#include "fact.h"

unsigned long factorial(unsigned n)
{
    unsigned long result = 1;
    for (unsigned i = 2; i < n; ++i)
        result *= i;
    return result;
}
