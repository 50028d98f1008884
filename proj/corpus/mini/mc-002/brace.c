#include <stddef.h>
#include "brace.h"

/* Deepest nesting of '{' ... '}' in s, or -1 when the braces do not balance. */
int brace_depth(const char *s)
{
    const char *close = "}";
    int depth = 0, best = 0;
    for (size_t i = 0; s[i] != '\0'; ++i) {
        if (s[i] == '{') {
            depth++;
            if (depth > best)
                best = depth;
        } else if (s[i] == *close) {
            depth--;
        }
    }
    return depth == 0 ? best : -1;
}

const char *brace_sample(void)
{
    return "{ \"}\" }";
}
