#include <doctest.h>

#include <functional>
#include <random>

#include "d4c/error.hpp"
#include "d4c/patch_engine.hpp"
#include "d4c/source_text.hpp"
#include "test_support.hpp"

using namespace d4c;
using namespace d4c::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a d4c::Error");
    return ErrorCode::InvalidConfig;
}

const std::string kSource =
    "#include <stdio.h>\n"
    "\n"
    "int helper(int a) { return a; }\n"
    "\n"
    "int add(int a, int b)\n"
    "{\n"
    "    int s = a - b;\n"
    "    return s;\n"
    "}\n"
    "\n"
    "int main(void) { return add(1, 2); }\n";

FunctionSpan add_span() { return locate_function(kSource, Language::c_like, "add"); }

std::string random_text(std::mt19937& rng, int max_lines) {
    static const char* pool[] = {"a", "b", "c", "  d", "e e", "", "{", "}"};
    int n = static_cast<int>(rng() % static_cast<unsigned>(max_lines + 1));
    std::string out;
    for (int i = 0; i < n; ++i) {
        out += pool[rng() % 8];
        if (i + 1 < n || rng() % 3 != 0) out += "\n";
    }
    return out;
}

}  // namespace

TEST_SUITE("patch_engine") {

TEST_CASE("fenced block scanning") {
    auto blocks = fenced_blocks("intro\n```c\nint x;\n```\ntext\n~~~\nraw\n~~~\n````\nopen");
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0].info == "c");
    CHECK(blocks[0].content == "int x;");
    CHECK(blocks[1].content == "raw");
    CHECK(blocks[2].content == "open");
    CHECK_FALSE(blocks[2].closed);
    CHECK(fenced_blocks("no fences here").empty());
}

TEST_CASE("extract_function picks the last block defining the name") {
    const std::string response =
        "First try:\n```c\nint add(int a, int b)\n{\n    return 0;\n}\n```\n"
        "Better:\n```cpp\nstatic int unused(void) { return 1; }\nint add(int a, int b)\n{\n    return a + b;\n}\n```\n"
        "Usage:\n```\nprintf(\"%d\", add(1, 2));\n```\n";
    ExtractedPatch p = extract_function(response, "add", Language::c_like);
    CHECK(p.kind == PatchKind::whole_function);
    CHECK(p.function_text == "int add(int a, int b)\n{\n    return a + b;\n}");
    REQUIRE(p.source_fence_language_tag);
    CHECK(*p.source_fence_language_tag == "cpp");
}

TEST_CASE("extract_function without fences and failure modes") {
    ExtractedPatch bare = extract_function("\ndef f(x):\n    return x + 1\n", "f", Language::python_like);
    CHECK(bare.function_text == "def f(x):\n    return x + 1");
    CHECK_FALSE(bare.source_fence_language_tag);

    CHECK(code_of([] { extract_function("The fix is to add one.", "f", Language::python_like); }) ==
          ErrorCode::NoFunctionFound);
    CHECK(code_of([] { extract_function("Here:\ndef f(x):\n    return x", "f", Language::python_like); }) ==
          ErrorCode::NoFunctionFound);
    CHECK(code_of([] { extract_function("```\nx = 1\n```\n```\ny = 2\n```", "f", Language::python_like); }) ==
          ErrorCode::AmbiguousWithoutName);
    CHECK(code_of([] { extract_function("```\nprint(f(1))\n```", "f", Language::python_like); }) ==
          ErrorCode::NoFunctionFound);
}

TEST_CASE("extract_hunks parses conflict markers") {
    const std::string response =
        "```c\n<<<<<<< BUGGY\n    int s = a - b;\n=======\n    int s = a + b;\n>>>>>>> FIXED\n"
        "<<<<<<< BUGGY\n    return s;\n=======\n    return s; /* ok */\n>>>>>>> FIXED\n```\n";
    ExtractedPatch p = extract_hunks(response);
    CHECK(p.kind == PatchKind::hunk_set);
    REQUIRE(p.replacements.size() == 2);
    CHECK(p.replacements[0].anchor_lines == std::vector<std::string>{"    int s = a - b;"});
    CHECK(p.replacements[0].replacement_lines == std::vector<std::string>{"    int s = a + b;"});
    CHECK(*p.source_fence_language_tag == "c");

    CHECK(code_of([] { extract_hunks("no hunks"); }) == ErrorCode::NoHunksFound);
    CHECK(code_of([] { extract_hunks("```\n<<<<<<< BUGGY\nx\n=======\ny\n```"); }) == ErrorCode::NoHunksFound);
}

TEST_CASE("infill extraction and mask filling") {
    auto infills = extract_infills("a\n```\nX1\n```\nb\n```\nX2\n```\n", 2);
    CHECK(infills == std::vector<std::string>{"X1", "X2"});
    CHECK(extract_infills("```\nold\n```\n```\nnew\n```", 1) == std::vector<std::string>{"new"});
    CHECK(extract_infills("    y = 1\n", 1) == std::vector<std::string>{"    y = 1"});
    CHECK(code_of([] { extract_infills("```\nonly\n```", 2); }) == ErrorCode::NoHunksFound);

    const std::string fn = "def f():\n    a = 1\n    b = 2\n    return a\n";
    CHECK(fill_masks(fn, {{2, 3}}, {"    a = 3"}) == "def f():\n    a = 3\n    return a\n");
    CHECK(fill_masks(fn, {{4, 4}, {2, 2}}, {"    return b", "    a = 0"}) ==
          "def f():\n    a = 0\n    b = 2\n    return b\n");
    CHECK(code_of([&] { fill_masks(fn, {{2, 2}}, {}); }) == ErrorCode::NoHunksFound);
    CHECK(code_of([&] { fill_masks(fn, {{4, 6}}, {"x"}); }) == ErrorCode::HunkOutOfRange);
}

TEST_CASE("apply_function_patch touches only the span") {
    FunctionSpan span = add_span();
    const std::string fixed = "int add(int a, int b)\n{\n    return a + b;\n}\n\n\n";
    AppliedPatch ap = apply_function_patch(kSource, span, fixed, "m.c");
    CHECK(ap.patched_file_text.substr(0, span.start_offset) == kSource.substr(0, span.start_offset));
    const std::string tail = kSource.substr(span.end_offset);
    CHECK(ap.patched_file_text.substr(ap.patched_file_text.size() - tail.size()) == tail);
    CHECK(ap.patched_file_text.find("return a + b;\n}\n\nint main") != std::string::npos);
    CHECK(apply_unified_diff(kSource, ap.diff_text) == ap.patched_file_text);
    CHECK(ap.diff_text.rfind("--- a/m.c\n+++ b/m.c\n", 0) == 0);
    REQUIRE(ap.touched_line_ranges.size() == 1);
    CHECK(ap.touched_line_ranges[0] == LineRange{7, 7});

    AppliedPatch same = apply_function_patch(kSource, span, kSource.substr(span.start_offset, span.length()));
    CHECK(same.patched_file_text == kSource);
    CHECK(same.diff_text.empty());
    CHECK(same.touched_line_ranges.empty());

    CHECK(code_of([] { apply_function_patch(kSource, {5, 5, 0}, "x"); }) == ErrorCode::SpanInvalid);
    CHECK(code_of([] { apply_function_patch(kSource, {0, kSource.size() + 1, 0}, "x"); }) ==
          ErrorCode::SpanInvalid);
}

TEST_CASE("mc-001 reference fix reproduces the hand-fixed file") {
    auto bugs = load_mini_corpus();
    const BugInstance& bug = bugs.front();
    REQUIRE(bug.id == "mc-001");
    const std::string source = read_file(bug.target_path());
    AppliedPatch ap = apply_function_patch(source, locate_bug_function(bug, source), *bug.reference_fix);
    CHECK(ap.patched_file_text == slurp(fixtures_dir() / "mc-001_clamp_fixed.c"));
    CHECK(ap.touched_line_ranges == std::vector<LineRange>{{9, 9}});
}

TEST_CASE("apply_hunk_patch is all or nothing") {
    FunctionSpan span = add_span();
    ExtractedPatch p;
    p.kind = PatchKind::hunk_set;
    p.replacements = {{{"    int s = a - b;"}, {"    int s = a + b;"}}};
    AppliedPatch ap = apply_hunk_patch(kSource, span, p);
    CHECK(ap.patched_file_text.find("int s = a + b;") != std::string::npos);
    CHECK(apply_unified_diff(kSource, ap.diff_text) == ap.patched_file_text);

    ExtractedPatch loose = p;
    loose.replacements[0].anchor_lines = {"int   s = a -  b;"};
    CHECK(apply_hunk_patch(kSource, span, loose).patched_file_text == ap.patched_file_text);

    ExtractedPatch deletion = p;
    deletion.replacements[0].replacement_lines.clear();
    CHECK(apply_hunk_patch(kSource, span, deletion).patched_file_text.find("int s") == std::string::npos);

    ExtractedPatch partial = p;
    partial.replacements.push_back({{"    missing();"}, {"x"}});
    CHECK(code_of([&] { apply_hunk_patch(kSource, span, partial); }) == ErrorCode::AnchorNotFound);

    const std::string twice = "int g(void)\n{\n    x++;\n    x++;\n}\n";
    FunctionSpan g = locate_function(twice, Language::c_like, "g");
    ExtractedPatch amb;
    amb.kind = PatchKind::hunk_set;
    amb.replacements = {{{"    x++;"}, {"    y++;"}}};
    CHECK(code_of([&] { apply_hunk_patch(twice, g, amb); }) == ErrorCode::AnchorAmbiguous);

    ExtractedPatch overlap;
    overlap.kind = PatchKind::hunk_set;
    overlap.replacements = {{{"{", "    int s = a - b;"}, {"{"}}, {{"    int s = a - b;", "    return s;"}, {"r"}}};
    CHECK(code_of([&] { apply_hunk_patch(kSource, span, overlap); }) == ErrorCode::AnchorOverlap);

    ExtractedPatch outside;
    outside.kind = PatchKind::hunk_set;
    outside.replacements = {{{"int main(void) { return add(1, 2); }"}, {"x"}}};
    CHECK(code_of([&] { apply_hunk_patch(kSource, span, outside); }) == ErrorCode::AnchorNotFound);

    CHECK(code_of([&] { apply_hunk_patch(kSource, span, ExtractedPatch{}); }) == ErrorCode::NoHunksFound);
}

TEST_CASE("unified diff examples") {
    CHECK(unified_diff("a\nb\n", "a\nb\n", "x", "y").empty());
    CHECK(unified_diff("a\nb\nc\n", "a\nB\nc\n", "x", "y") == "--- x\n+++ y\n@@ -1,3 +1,3 @@\n a\n-b\n+B\n c\n");
    CHECK(unified_diff("", "new\n", "x", "y") == "--- x\n+++ y\n@@ -0,0 +1 @@\n+new\n");
    CHECK(unified_diff("a\n", "a", "x", "y") ==
          "--- x\n+++ y\n@@ -1 +1 @@\n-a\n+a\n\\ No newline at end of file\n");
    std::string far_old, far_new;
    for (int i = 1; i <= 20; ++i) {
        far_old += std::to_string(i) + "\n";
        far_new += (i == 2 || i == 18 ? "X" : std::to_string(i)) + "\n";
    }
    std::string d = unified_diff(far_old, far_new, "x", "y");
    CHECK(std::count(d.begin(), d.end(), '@') == 8);  // two hunks
    CHECK(d.find("@@ -1,5 +1,5 @@") != std::string::npos);
    CHECK(d.find("@@ -15,6 +15,6 @@") != std::string::npos);
}

TEST_CASE("diff_lines is minimal on known cases") {
    auto count_changes = [](std::string_view a, std::string_view b) {
        int n = 0;
        for (const auto& e : diff_lines(split_lines_keep_ends(a), split_lines_keep_ends(b))) n += e.op != EditOp::equal;
        return n;
    };
    CHECK(count_changes("a\nb\nc\n", "a\nb\nc\n") == 0);
    CHECK(count_changes("a\nb\nc\n", "a\nc\n") == 1);
    CHECK(count_changes("a\nb\nc\na\nb\nb\na\n", "c\nb\na\nb\na\nc\n") == 5);
}

TEST_CASE("random diff round-trip, identity and locality") {
    std::mt19937 rng(1234);
    for (int round = 0; round < 1000; ++round) {
        const std::string a = random_text(rng, 14);
        const std::string b = random_text(rng, 14);
        CAPTURE(a);
        CAPTURE(b);
        CHECK(unified_diff(a, a, "x", "y").empty());
        const std::string d = unified_diff(a, b, "x", "y");
        CHECK(d.empty() == (a == b));
        CHECK(apply_unified_diff(a, d) == b);

        auto la = split_lines_keep_ends(a);
        auto lb = split_lines_keep_ends(b);
        std::size_t removed = 0, inserted = 0, equal = 0;
        for (const auto& e : diff_lines(la, lb)) {
            if (e.op == EditOp::equal) {
                CHECK(la[e.old_index] == lb[e.new_index]);
                ++equal;
            }
            removed += e.op == EditOp::remove;
            inserted += e.op == EditOp::insert;
        }
        CHECK(equal + removed == la.size());
        CHECK(equal + inserted == lb.size());
    }
}

TEST_CASE("random function splices stay inside the span") {
    std::mt19937 rng(99);
    const FunctionSpan span = add_span();
    for (int round = 0; round < 200; ++round) {
        std::string body = "int add(int a, int b)\n{\n" + random_text(rng, 6) + "}";
        AppliedPatch ap = apply_function_patch(kSource, span, body);
        const std::string head = kSource.substr(0, span.start_offset);
        const std::string tail = kSource.substr(span.end_offset);
        CHECK(ap.patched_file_text.substr(0, head.size()) == head);
        CHECK(ap.patched_file_text.substr(ap.patched_file_text.size() - tail.size()) == tail);
        CHECK(apply_unified_diff(kSource, ap.diff_text) == ap.patched_file_text);
        int inserted = 0;
        for (const auto& e : diff_lines(split_lines_keep_ends(kSource), split_lines_keep_ends(ap.patched_file_text))) {
            inserted += e.op == EditOp::insert;
        }
        int covered = 0;
        for (const LineRange& r : ap.touched_line_ranges) covered += r.end - r.start + 1;
        CHECK(covered == inserted);
    }
}

}
