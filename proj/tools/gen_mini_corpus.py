#!/usr/bin/env python3
"""Writes corpus/mini: ten bug bundles, the replay script, and the scripted labels.

Each bug is a buggy file plus hunk fixes. The generator derives the fixed file, the
reference fix, and every scripted response from that one definition, then lays out a
per-format schedule of response variants. Re-running it is deterministic.
"""

import json
import math
import os
import random
import shutil
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
OUT = os.path.join(ROOT, "corpus", "mini")
FORMATS = ["report_func", "mask_func", "report_hunk", "mask_hunk"]
SAMPLES = 10

# Target mean negative log-likelihood per output token, by format.
FORMAT_NLL = {
    "report_func": math.log(1.39),
    "mask_func": math.log(3.01),
    "report_hunk": math.log(8.50),
    "mask_hunk": math.log(8.59),
}

CC = "cc -std=c99 -Wall -o run_tests {src} {test} && ./run_tests"
CXX = "c++ -std=c++17 -Wall -o run_tests {src} {test} && ./run_tests"

C_CHECK = r'''#include <stdio.h>
static int failures = 0;
static void check_int(const char *name, long got, long want)
{
    if (got != want) {
        printf("FAIL %s: got %ld, want %ld\n", name, got, want);
        failures++;
    }
}
'''

BUGS = []


def bug(**kw):
    BUGS.append(kw)


bug(
    id="mc-001",
    language="c_like",
    target="clamp.c",
    function="clamp",
    source="""#include "clamp.h"

/* Restrict v to [lo, hi]. */
int clamp(int v, int lo, int hi)
{
    if (v < lo)
        return lo;
    if (v > hi)
        return lo;
    return v;
}
""",
    hunks=[(9, 9, ["        return hi;"])],
    wrong=[(9, 9, ["        return v - 1;"])],
    broken=[(9, 9, ["        return hi"])],
    alt=[(9, 9, ["        return hi + 0;"])],
    extra={
        "clamp.h": "int clamp(int v, int lo, int hi);\n",
        "test_clamp.c": C_CHECK + '''#include "clamp.h"

int main(void)
{
    check_int("test_below", clamp(-5, 0, 10), 0);
    check_int("test_above", clamp(15, 0, 10), 10);
    check_int("test_inside", clamp(5, 0, 10), 5);
    return failures ? 1 : 0;
}
''',
    },
    test_command=CC.format(src="clamp.c", test="test_clamp.c"),
    doc="Returns v limited to the closed interval [lo, hi].",
    tests=[("test_above", "clamp(15, 0, 10)", "10")],
    messages=["FAIL test_above: got 0, want 10"],
)

bug(
    id="mc-002",
    language="c_like",
    target="brace.c",
    function="brace_depth",
    source="""#include <stddef.h>
#include "brace.h"

/* Deepest nesting of '{' ... '}' in s, or -1 when the braces do not balance. */
int brace_depth(const char *s)
{
    const char *close = "}";
    int depth = 0, best = 0;
    for (size_t i = 0; s[i] != '\\0'; ++i) {
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
    return "{ \\"}\\" }";
}
""",
    hunks=[(15, 15, ["            if (--depth < 0)", "                return -1;"])],
    wrong=[(15, 15, ["            depth -= 2;"])],
    broken=[(15, 15, ["            if (--depth < 0)", "                return -1"])],
    alt=[(15, 15, ["            if (depth-- == 0)", "                return -1;"])],
    extra={
        "brace.h": "int brace_depth(const char *s);\nconst char *brace_sample(void);\n",
        "test_brace.c": C_CHECK + '''#include "brace.h"

int main(void)
{
    check_int("test_nested", brace_depth("{{}{}}"), 2);
    check_int("test_reversed", brace_depth("}{"), -1);
    check_int("test_empty", brace_depth(""), 0);
    return failures ? 1 : 0;
}
''',
    },
    test_command=CC.format(src="brace.c", test="test_brace.c"),
    doc=None,
    tests=[("test_reversed", 'brace_depth("}{")', "-1")],
    messages=["FAIL test_reversed: got 0, want -1"],
)

bug(
    id="mc-003",
    language="c_like",
    target="fact.c",
    function="factorial",
    source="""#include "fact.h"

unsigned long factorial(unsigned n)
{
    unsigned long result = 1;
    for (unsigned i = 2; i < n; ++i)
        result *= i;
    return result;
}
""",
    hunks=[(6, 6, ["    for (unsigned i = 2; i <= n; ++i)"])],
    wrong=[(6, 6, ["    for (unsigned i = 1; i < n; ++i)"])],
    broken=[(6, 6, ["    for (unsigned i = 2; i <= n; ++i"])],
    alt=[(6, 6, ["    for (unsigned i = 2; i < n + 1; ++i)"])],
    extra={
        "fact.h": "unsigned long factorial(unsigned n);\n",
        "test_fact.c": C_CHECK + '''#include "fact.h"

int main(void)
{
    check_int("test_zero", (long)factorial(0), 1);
    check_int("test_five", (long)factorial(5), 120);
    check_int("test_ten", (long)factorial(10), 3628800);
    return failures ? 1 : 0;
}
''',
    },
    test_command=CC.format(src="fact.c", test="test_fact.c"),
    doc="n! for n >= 0; factorial(0) is 1.",
    tests=[("test_five", "factorial(5)", "120"), ("test_ten", "factorial(10)", "3628800")],
    messages=["FAIL test_five: got 24, want 120", "FAIL test_ten: got 362880, want 3628800"],
)

bug(
    id="mc-004",
    language="c_like",
    target="words.cpp",
    function="reverse_words",
    source="""#include "words.hpp"

#include <sstream>
#include <vector>

namespace text {

std::string reverse_words(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> words;
    for (std::string w; in >> w;)
        words.push_back(w);
    std::string out;
    for (std::size_t i = words.size(); i > 0; --i) {
        out += words[i - 1];
        out += ' ';
    }
    return out;
}

}  // namespace text
""",
    hunks=[(16, 17, ["        if (!out.empty())", "            out += ' ';", "        out += words[i - 1];"])],
    wrong=[(16, 17, ["        out += ' ';", "        out += words[i - 1];"])],
    broken=[(16, 17, ["        if (!out.empty())", "            out += ' '", "        out += words[i - 1];"])],
    alt=None,
    extra={
        "words.hpp": "#pragma once\n\n#include <string>\n\nnamespace text {\nstd::string reverse_words(const std::string& line);\n}\n",
        "test_words.cpp": '''#include <cstdio>
#include <string>

#include "words.hpp"

static int failures = 0;

static void check(const char* name, const std::string& got, const std::string& want)
{
    if (got != want) {
        std::printf("FAIL %s: got \\"%s\\", want \\"%s\\"\\n", name, got.c_str(), want.c_str());
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
''',
    },
    test_command=CXX.format(src="words.cpp", test="test_words.cpp"),
    doc="Words of line in reverse order, joined by single spaces.",
    tests=[("test_three", 'reverse_words("a b c")', '"c b a"')],
    messages=['FAIL test_three: got "c b a ", want "c b a"'],
)

bug(
    id="mc-005",
    language="c_like",
    target="search.cpp",
    function="binary_search",
    source="""#include "search.hpp"

int binary_search(const std::vector<int>& xs, int target)
{
    int lo = 0;
    int hi = static_cast<int>(xs.size()) - 1;
    while (lo < hi) {
        int mid = lo + (hi - lo) / 2;
        if (xs[mid] == target)
            return mid;
        if (xs[mid] < target)
            lo = mid + 1;
        else
            hi = mid - 1;
    }
    return -1;
}
""",
    hunks=[(7, 7, ["    while (lo <= hi) {"])],
    wrong=[(7, 7, ["    while (lo < hi - 1) {"])],
    broken=[(7, 7, ["    while (lo <= hi {"])],
    alt=None,
    extra={
        "search.hpp": "#pragma once\n\n#include <vector>\n\nint binary_search(const std::vector<int>& xs, int target);\n",
        "test_search.cpp": '''#include <cstdio>
#include <vector>

#include "search.hpp"

static int failures = 0;

static void check(const char* name, int got, int want)
{
    if (got != want) {
        std::printf("FAIL %s: got %d, want %d\\n", name, got, want);
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
''',
    },
    test_command=CXX.format(src="search.cpp", test="test_search.cpp"),
    doc="Index of target in the ascending vector xs, or -1.",
    tests=[("test_last", "binary_search({1, 3, 5}, 5)", "2"), ("test_single", "binary_search({7}, 7)", "0")],
    messages=["FAIL test_last: got -1, want 2", "FAIL test_single: got -1, want 0"],
)

bug(
    id="mc-006",
    language="c_like",
    target="gcd.c",
    function="gcd",
    source="""#include <stdlib.h>

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
""",
    hunks=[(21, 21, ["    return a;"])],
    wrong=[(21, 21, ["    return a + b + 1;"])],
    broken=[(21, 21, ["    return a"])],
    alt=None,
    extra={
        "gcd.h": "int gcd(int a, int b);\nint lcm(int a, int b);\n",
        "test_gcd.c": C_CHECK + '''#include "gcd.h"

int main(void)
{
    check_int("test_basic", gcd(12, 18), 6);
    check_int("test_negative", gcd(-4, 6), 2);
    check_int("test_coprime", gcd(7, 9), 1);
    return failures ? 1 : 0;
}
''',
    },
    test_command=CC.format(src="gcd.c", test="test_gcd.c"),
    doc="Greatest common divisor of |a| and |b|.",
    tests=[("test_basic", "gcd(12, 18)", "6")],
    messages=["FAIL test_basic: got 0, want 6"],
)

PY_CHECK = '''import sys

failures = 0


def check(name, got, want):
    global failures
    if got != want:
        print("FAIL %s: got %r, want %r" % (name, got, want))
        failures += 1

'''

bug(
    id="mc-007",
    language="python_like",
    target="stats.py",
    function="median",
    source='''def median(values):
    """Middle value of a non-empty list."""
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2 == 1:
        return ordered[mid]
    return (ordered[mid] + ordered[mid + 1]) / 2


def mean(values):
    return sum(values) / len(values)
''',
    hunks=[(8, 8, ["    return (ordered[mid - 1] + ordered[mid]) / 2"])],
    wrong=[(8, 8, ["    return ordered[mid]"])],
    broken=[(8, 8, ["    return (ordered[mid - 1] + ordered[mid] / 2"])],
    alt=[(8, 8, ["    return (ordered[mid] + ordered[mid - 1]) / 2"])],
    extra={
        "test_stats.py": PY_CHECK + '''from stats import mean, median

check("test_odd", median([3, 1, 2]), 2)
check("test_even", median([4, 1, 3, 2]), 2.5)
check("test_mean", mean([1, 2, 3]), 2)
sys.exit(1 if failures else 0)
''',
    },
    test_command="python3 test_stats.py",
    doc="Median of a non-empty list of numbers.",
    tests=[("test_even", "median([4, 1, 3, 2])", "2.5")],
    messages=["FAIL test_even: got 3.5, want 2.5"],
)

bug(
    id="mc-008",
    language="python_like",
    target="text_utils.py",
    function="is_palindrome",
    source='''import re


def normalize(text):
    """Lowercase text and keep letters and digits only.

    def is_palindrome(text): is defined below and relies on this.
    """
    return re.sub(r"[^a-z0-9]", "", text.lower())


def is_palindrome(text):
    """True when text reads the same backwards, ignoring case and punctuation."""
    cleaned = text.lower()
    return cleaned == cleaned[::-1]
''',
    hunks=[(14, 14, ["    cleaned = normalize(text)"])],
    wrong=[(14, 14, ["    cleaned = text.strip().lower()"])],
    broken=[(14, 14, ["    cleaned = normalize(text"])],
    alt=[(14, 14, ['    cleaned = re.sub(r"[^a-z0-9]", "", text.lower())'])],
    extra={
        "test_text_utils.py": PY_CHECK + '''from text_utils import is_palindrome

check("test_phrase", is_palindrome("A man, a plan, a canal: Panama"), True)
check("test_plain", is_palindrome("racecar"), True)
check("test_negative", is_palindrome("palindrome"), False)
sys.exit(1 if failures else 0)
''',
    },
    test_command="python3 test_text_utils.py",
    doc=None,
    tests=[("test_phrase", 'is_palindrome("A man, a plan, a canal: Panama")', "True")],
    messages=["FAIL test_phrase: got False, want True"],
)

bug(
    id="mc-009",
    language="python_like",
    target="intervals.py",
    function="merge_intervals",
    source='''def merge_intervals(intervals):
    """Merge overlapping [start, end] pairs."""
    merged = []
    for start, end in intervals:
        if merged and start <= merged[-1][1]:
            merged[-1][1] = end
        else:
            merged.append([start, end])
    return merged
''',
    hunks=[
        (4, 4, ["    for start, end in sorted(intervals):"]),
        (6, 6, ["            merged[-1][1] = max(merged[-1][1], end)"]),
    ],
    wrong=[
        (4, 4, ["    for start, end in sorted(intervals):"]),
        (6, 6, ["            merged[-1][1] = end"]),
    ],
    broken=[
        (4, 4, ["    for start, end in sorted(intervals)"]),
        (6, 6, ["            merged[-1][1] = max(merged[-1][1], end)"]),
    ],
    alt=None,
    extra={
        "test_intervals.py": PY_CHECK + '''from intervals import merge_intervals

check("test_contained", merge_intervals([[1, 10], [2, 3]]), [[1, 10]])
check("test_unsorted", merge_intervals([[5, 6], [1, 2]]), [[1, 2], [5, 6]])
check("test_chain", merge_intervals([[1, 3], [2, 4], [4, 5]]), [[1, 5]])
sys.exit(1 if failures else 0)
''',
    },
    test_command="python3 test_intervals.py",
    doc="Merge overlapping closed intervals; the result is sorted by start.",
    tests=[
        ("test_contained", "merge_intervals([[1, 10], [2, 3]])", "[[1, 10]]"),
        ("test_unsorted", "merge_intervals([[5, 6], [1, 2]])", "[[1, 2], [5, 6]]"),
    ],
    messages=[
        "FAIL test_contained: got [[1, 3]], want [[1, 10]]",
        "FAIL test_unsorted: got [[5, 6], [1, 2]], want [[1, 2], [5, 6]]",
    ],
)

bug(
    id="mc-010",
    language="python_like",
    target="shapes.py",
    function="area",
    source='''class Rect:
    def __init__(self, width, height):
        self.width = width
        self.height = height

    def area(self):
        return self.width * self.width

    def perimeter(self):
        return 2 * (self.width + self.height)
''',
    hunks=[(7, 7, ["        return self.width * self.height"])],
    wrong=[(7, 7, ["        return self.height * self.height"])],
    broken=[(7, 7, ["        return self.width * self.height)"])],
    alt=[(7, 7, ["        return self.height * self.width"])],
    extra={
        "test_shapes.py": PY_CHECK + '''from shapes import Rect

check("test_area", Rect(2, 3).area(), 6)
check("test_square", Rect(4, 4).area(), 16)
check("test_perimeter", Rect(2, 3).perimeter(), 10)
sys.exit(1 if failures else 0)
''',
    },
    test_command="python3 test_shapes.py",
    doc="Area of the rectangle.",
    tests=[("test_area", "Rect(2, 3).area()", "6")],
    messages=["FAIL test_area: got 4, want 6"],
)

# Function line ranges (1-based, inclusive) within each buggy file.
FUNCTION_LINES = {
    "mc-001": (4, 11),
    "mc-002": (5, 19),
    "mc-003": (3, 9),
    "mc-004": (8, 20),
    "mc-005": (3, 17),
    "mc-006": (12, 22),
    "mc-007": (1, 8),
    "mc-008": (12, 15),
    "mc-009": (1, 9),
    "mc-010": (6, 7),
}

# 1-based index of the first plausible sample per format; None means no plausible sample.
FIRST_PLAUSIBLE = {
    "report_func": {"mc-001": 1, "mc-002": 2, "mc-003": 4, "mc-004": 1, "mc-005": None,
                    "mc-006": 3, "mc-007": 1, "mc-008": 5, "mc-009": None, "mc-010": 2},
    "mask_func": {"mc-001": 1, "mc-002": 3, "mc-003": None, "mc-004": 2, "mc-005": None,
                  "mc-006": 4, "mc-007": 2, "mc-008": None, "mc-009": None, "mc-010": 1},
    "report_hunk": {"mc-001": 2, "mc-002": None, "mc-003": 1, "mc-004": 3, "mc-005": None,
                    "mc-006": 1, "mc-007": None, "mc-008": 6, "mc-009": None, "mc-010": 2},
    "mask_hunk": {"mc-001": None, "mc-002": 4, "mc-003": 2, "mc-004": None, "mc-005": None,
                  "mc-006": 1, "mc-007": 3, "mc-008": None, "mc-009": None, "mc-010": 5},
}


def apply_hunks(lines, hunks):
    out = list(lines)
    for start, end, repl in sorted(hunks, key=lambda h: -h[0]):
        out[start - 1:end] = repl
    return out


def function_text(lines, first, last):
    text = "\n".join(lines[first - 1:last])
    return text.lstrip(" ")


def fence(body, tag=""):
    return "```" + tag + "\n" + body + "\n```"


def variant_fix(b, kind):
    return {"fix": b["hunks"], "alt": b["alt"], "wrong": b["wrong"], "broken": b["broken"]}[kind]


def shifted_last(b, hunks):
    first, last = FUNCTION_LINES[b["id"]]
    return last + sum(len(r) - (e - s + 1) for s, e, r in hunks)


def response(b, fmt, kind, rng):
    lines = b["source"].split("\n")
    lang_tag = "c" if b["language"] == "c_like" else "python"
    if b["target"].endswith(".cpp"):
        lang_tag = "cpp"
    first, last = FUNCTION_LINES[b["id"]]
    if kind == "prose":
        return "I could not find a defect in this function; it looks correct as written."
    if fmt in ("report_func", "mask_func"):
        hunks = variant_fix(b, kind)
        fixed = apply_hunks(lines, hunks)
        body = "\n".join(fixed[first - 1:shifted_last(b, hunks)])
        return "Here is the corrected function.\n\n" + fence(body, lang_tag) + "\n"
    if fmt == "report_hunk":
        if kind == "bad_anchor":
            return fence("<<<<<<< BUGGY\n    this line is not in the function\n=======\n    return 0;\n>>>>>>> FIXED")
        parts = []
        for start, end, repl in variant_fix(b, kind):
            anchor = lines[start - 1:end]
            repl = list(repl)
            # Widen with leading context until the anchor is unique inside the function.
            while occurrences(lines[first - 1:last], anchor) > 1 and start > first:
                start -= 1
                anchor = [lines[start - 1]] + anchor
                repl = [lines[start - 1]] + repl
            parts.append("<<<<<<< BUGGY\n" + "\n".join(anchor) + "\n=======\n" +
                         "\n".join(repl) + "\n>>>>>>> FIXED")
        return "The faulty lines and their replacement:\n\n" + fence("\n".join(parts)) + "\n"
    if fmt == "mask_hunk":
        blocks = [fence("\n".join(repl), lang_tag) for _, _, repl in variant_fix(b, kind)]
        return "\n\n".join(blocks) + "\n"
    raise ValueError(fmt)


def occurrences(haystack, needle):
    n = len(needle)
    return sum(1 for i in range(len(haystack) - n + 1) if haystack[i:i + n] == needle)


def schedule(b, fmt, rng):
    first = FIRST_PLAUSIBLE[fmt][b["id"]]
    failing = ["wrong", "broken", "prose"]
    if fmt == "report_hunk":
        failing.append("bad_anchor")
    kinds = []
    for i in range(1, SAMPLES + 1):
        if first is None or i < first:
            kinds.append(failing[(i + len(b["id"]) + FORMATS.index(fmt)) % len(failing)])
        elif i == first:
            kinds.append("fix")
        else:
            roll = rng.random()
            if roll < 0.35:
                kinds.append("fix")
            elif roll < 0.5 and b["alt"] is not None and fmt in ("report_func", "mask_func"):
                kinds.append("alt")
            else:
                kinds.append(rng.choice(failing))
    return kinds


def tokenize(text):
    return [text[i:i + 4] for i in range(0, len(text), 4)]


def scores(tokens, mean_nll, rng):
    out = []
    for t in tokens:
        nll = max(0.0, mean_nll + rng.uniform(-0.15, 0.15))
        out.append([t, -round(nll, 6)])
    return out


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def main():
    rng = random.Random(20240418)
    if os.path.isdir(OUT):
        for name in os.listdir(OUT):
            if name.startswith("mc-"):
                shutil.rmtree(os.path.join(OUT, name))
    script = {}
    labels = {"formats": {}, "bugs": {}}
    for b in BUGS:
        lines = b["source"].split("\n")
        first, last = FUNCTION_LINES[b["id"]]
        fixed = apply_hunks(lines, b["hunks"])
        manifest = {
            "id": b["id"],
            "language": b["language"],
            "target_file": b["target"],
            "function_name": b["function"],
        }
        if b["doc"] is not None:
            manifest["doc_text"] = b["doc"]
        manifest["failed_tests"] = [{"name": n, "input": i, "expected": e} for n, i, e in b["tests"]]
        manifest["error_messages"] = b["messages"]
        manifest["test_command"] = b["test_command"]
        manifest["known_hunks"] = [{"start_line": s, "end_line": e} for s, e, _ in b["hunks"]]
        manifest["reference_fix"] = function_text(fixed, first, shifted_last(b, b["hunks"]))
        manifest["timeout_seconds"] = 10
        bundle = os.path.join(OUT, b["id"])
        write(os.path.join(bundle, "bug.json"), json.dumps(manifest, indent=2) + "\n")
        write(os.path.join(bundle, b["target"]), b["source"])
        for name, text in b["extra"].items():
            write(os.path.join(bundle, name), text)
        labels["bugs"][b["id"]] = {"language": b["language"], "function_lines": [first, last]}

    for fmt in FORMATS:
        labels["formats"][fmt] = {}
        for b in BUGS:
            kinds = schedule(b, fmt, rng)
            labels["formats"][fmt][b["id"]] = {
                "first_plausible_index": FIRST_PLAUSIBLE[fmt][b["id"]],
                "variants": kinds,
            }
            for idx, kind in enumerate(kinds):
                text = response(b, fmt, kind, rng)
                tokens = tokenize(text)
                prompt_tokens = 48 + rng.randrange(0, 16)
                entry = {
                    "text": text,
                    "token_scores": scores(tokens, FORMAT_NLL[fmt], rng),
                    "prompt_scores": [["p%d" % k, -round(rng.uniform(0.8, 1.6), 6)] for k in range(prompt_tokens)],
                    "usage": {"input_tokens": 1200 + rng.randrange(0, 400), "output_tokens": len(tokens)},
                }
                script["%s/%s/%d" % (b["id"], fmt, idx)] = entry
    rows = [json.dumps(k) + ": " + json.dumps(script[k], sort_keys=True) for k in sorted(script)]
    write(os.path.join(OUT, "mock_script.json"), "{\n" + ",\n".join(rows) + "\n}\n")
    write(os.path.join(OUT, "labels.json"), json.dumps(labels, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
