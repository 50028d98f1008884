int brace_depth(const char *s);
const char *brace_sample(void);
