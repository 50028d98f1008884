#include <doctest.h>

#include <cstdlib>
#include <functional>

#include "d4c/error.hpp"
#include "d4c/patch_engine.hpp"
#include "d4c/report_builder.hpp"
#include "d4c/source_text.hpp"
#include "test_support.hpp"

using namespace d4c;
using namespace d4c::testing;
namespace fs = std::filesystem;

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

BugInstance toy_bug(const fs::path& root) {
    spit(root / "m.c", "int pad;\nint f(int x)\n{\n    int y = x;\n    y += 1;\n    y *= 2;\n    return y;\n}\n");
    BugInstance bug;
    bug.id = "toy";
    bug.language = Language::c_like;
    bug.source_root = root;
    bug.target_file = "m.c";
    bug.function_name = "f";
    bug.test_command = "true";
    return bug;
}

const std::string kSixLines = "a\n  b\n    c\n    d\n  e\nf";

fs::path golden_path(const std::string& bug, PromptFormat f, RenderMode m) {
    return source_dir() / "tests" / "golden" / "prompts" /
           (bug + "__" + std::string(to_string(f)) + "__" + std::string(to_string(m)) + ".txt");
}

}  // namespace

TEST_SUITE("report_builder") {

TEST_CASE("placeholders fill absent artifacts") {
    TempDir tmp("report");
    BugInstance bug = toy_bug(tmp.path());
    BugReport r = build_report(bug, PromptFormat::report_func);
    CHECK(r.test_section == "This program does not possess any known test cases.");
    CHECK(r.document_section == "This program does not possess any known documents.");
    CHECK(r.message_section == "This program does not possess any known error messages.");
    CHECK(r.program_text == "int f(int x)\n{\n    int y = x;\n    y += 1;\n    y *= 2;\n    return y;\n}");
}

TEST_CASE("tests are listed verbatim in manifest order") {
    TempDir tmp("report-tests");
    BugInstance bug = toy_bug(tmp.path());
    bug.failed_tests = {{"t_two", "f(2)", "6"}, {"t_one", " f( 1 ) ", "\"4\""}};
    bug.error_messages = {"line one", "line two"};
    bug.doc_text = "Doubles x + 1.";
    BugReport r = build_report(bug, PromptFormat::report_hunk);
    CHECK(r.test_section ==
          "Test 1: t_two\nInput: f(2)\nExpected Output: 6\n\nTest 2: t_one\nInput:  f( 1 ) \nExpected Output: \"4\"");
    CHECK(r.message_section == "line one\nline two");
    CHECK(r.document_section == "Doubles x + 1.");
}

TEST_CASE("mask formats mask the known hunks") {
    TempDir tmp("report-mask");
    BugInstance bug = toy_bug(tmp.path());
    CHECK(code_of([&] { build_report(bug, PromptFormat::mask_func); }) == ErrorCode::MissingHunks);
    bug.known_hunks = std::vector<HunkSpec>{{5, 6}};
    BugReport masked = build_report(bug, PromptFormat::mask_func);
    CHECK(masked.program_text == "int f(int x)\n{\n    int y = x;\n    >>> INFILL <<<\n    return y;\n}");
    BugReport full = build_report(bug, PromptFormat::report_func);
    CHECK(full.program_text.find(kMaskToken) == std::string::npos);
}

TEST_CASE("mask_hunks examples") {
    CHECK(mask_hunks(kSixLines, {{3, 4}}) == "a\n  b\n    >>> INFILL <<<\n  e\nf");
    CHECK(mask_hunks(kSixLines, {{4, 5}, {2, 2}}) == "a\n  >>> INFILL <<<\n    c\n    >>> INFILL <<<\nf");
    CHECK(mask_hunks(kSixLines, {{6, 6}}) == "a\n  b\n    c\n    d\n  e\n>>> INFILL <<<");
    CHECK(code_of([] { mask_hunks(kSixLines, {{2, 4}, {3, 5}}); }) == ErrorCode::OverlappingHunks);
    CHECK(code_of([] { mask_hunks(kSixLines, {{5, 7}}); }) == ErrorCode::HunkOutOfRange);
    CHECK(code_of([] { mask_hunks(kSixLines, {{0, 1}}); }) == ErrorCode::HunkOutOfRange);
    CHECK(code_of([] { mask_hunks(kSixLines, {{3, 2}}); }) == ErrorCode::HunkOutOfRange);
}

TEST_CASE("masking conservation on random hunk sets") {
    std::srand(7);
    for (int round = 0; round < 300; ++round) {
        int n = 1 + std::rand() % 12;
        std::string text;
        std::vector<std::string> lines;
        for (int i = 0; i < n; ++i) {
            std::string line = std::string(std::rand() % 5, ' ') + "l" + std::to_string(i);
            lines.push_back(line);
            text += line + (i + 1 < n ? "\n" : (std::rand() % 2 ? "\n" : ""));
        }
        std::vector<HunkSpec> hunks;
        int at = 1;
        while (at <= n) {
            int skip = std::rand() % 3;
            at += skip;
            if (at > n) break;
            int len = 1 + std::rand() % 3;
            int end = std::min(n, at + len - 1);
            hunks.push_back({at, end});
            at = end + 1 + std::rand() % 2;
        }
        if (hunks.empty()) continue;
        std::string masked = mask_hunks(text, hunks);
        std::string kept_original;
        std::vector<bool> in_hunk(n + 1, false);
        for (const auto& h : hunks) {
            for (int l = h.start_line; l <= h.end_line; ++l) in_hunk[l] = true;
        }
        for (int i = 1; i <= n; ++i) {
            if (!in_hunk[i]) kept_original += lines[i - 1] + "\n";
        }
        std::string kept_masked;
        int mask_lines = 0;
        for (auto l : split_lines_keep_ends(masked)) {
            std::string bare(strip_line_end(l));
            if (bare.find(kMaskToken) != std::string::npos) {
                ++mask_lines;
                continue;
            }
            kept_masked += bare + "\n";
        }
        CHECK(kept_masked == kept_original);
        CHECK(mask_lines == static_cast<int>(hunks.size()));
    }
}

TEST_CASE("render_prompt structure and modes") {
    TempDir tmp("render");
    BugInstance bug = toy_bug(tmp.path());
    BugReport r = build_report(bug, PromptFormat::report_func);
    const ExemplarPair& ex = default_exemplar(Language::c_like, PromptFormat::report_func);
    PromptBundle chat = render_prompt(r, PromptFormat::report_func, ex, RenderMode::chat);
    REQUIRE(chat.messages.size() == 4);
    CHECK(chat.messages[0].role == Role::system);
    CHECK(chat.messages[1].role == Role::user);
    CHECK(chat.messages[2].role == Role::assistant);
    CHECK(chat.messages[3].role == Role::user);
    CHECK(chat.messages[0].content.rfind("You are an AI debugger", 0) == 0);
    CHECK(chat.messages[3].content == render_report_text(r));

    PromptBundle flat = render_prompt(r, PromptFormat::report_func, ex, RenderMode::text_completion);
    CHECK(flat.messages.empty());
    CHECK(flat.flat_text.rfind("[INST]\n", 0) == 0);
    CHECK(flat.flat_text.find("\n[/INST]\n<SEP>\n") != std::string::npos);
    const std::string target = render_report_text(r);
    CHECK(flat.flat_text.size() >= target.size() + 7);
    CHECK(flat.flat_text.substr(flat.flat_text.size() - target.size() - 7) == target + "\n<SEP>\n");

    TextMarkers custom{"<s>[INST]", "[/INST]", "</s>"};
    PromptBundle custom_flat = render_prompt(r, PromptFormat::report_func, ex, RenderMode::text_completion, custom);
    CHECK(custom_flat.flat_text.rfind("<s>[INST]\n", 0) == 0);
    CHECK(custom_flat.flat_text.find("<SEP>") == std::string::npos);

    CHECK(code_of([&] {
              render_prompt(r, PromptFormat::report_hunk, ex, RenderMode::chat);
          }) == ErrorCode::FormatMismatch);
}

TEST_CASE("default exemplars are fixed and shaped by format") {
    for (Language lang : {Language::c_like, Language::python_like}) {
        for (PromptFormat f : kAllFormats) {
            CAPTURE(to_string(f));
            const ExemplarPair& a = default_exemplar(lang, f);
            const ExemplarPair& b = default_exemplar(lang, f);
            CHECK(&a == &b);
            CHECK(a.format == f);
            CHECK(a.language == lang);
            CHECK((a.input_report.program_text.find(kMaskToken) != std::string::npos) == is_masked_input(f));
            auto blocks = fenced_blocks(a.output_text);
            if (is_function_output(f)) {
                REQUIRE(blocks.size() == 1);
                auto first_line = blocks[0].content.substr(0, blocks[0].content.find('\n'));
                CHECK(first_line.find('(') != std::string::npos);
            } else if (f == PromptFormat::report_hunk) {
                REQUIRE(blocks.size() == 1);
                CHECK(blocks[0].content.find("<<<<<<< BUGGY") != std::string::npos);
            } else {
                REQUIRE(!blocks.empty());
                for (const auto& b2 : blocks) CHECK(b2.content.find("def ") == std::string::npos);
            }
        }
    }
}

TEST_CASE("placeholder totality and masking on the mini corpus") {
    for (const auto& bug : load_mini_corpus()) {
        for (PromptFormat f : kAllFormats) {
            CAPTURE(bug.id);
            CAPTURE(to_string(f));
            BugReport r = build_report(bug, f);
            CHECK_FALSE(r.program_text.empty());
            CHECK_FALSE(r.document_section.empty());
            CHECK_FALSE(r.test_section.empty());
            CHECK_FALSE(r.message_section.empty());
            CHECK((r.program_text.find(kMaskToken) != std::string::npos) == is_masked_input(f));
        }
    }
}

TEST_CASE("golden prompts for the mini corpus") {
    const bool update = std::getenv("D4C_UPDATE_GOLDENS") != nullptr;
    for (const auto& bug : load_mini_corpus()) {
        for (PromptFormat f : kAllFormats) {
            for (RenderMode m : {RenderMode::chat, RenderMode::text_completion}) {
                CAPTURE(bug.id);
                CAPTURE(to_string(f));
                CAPTURE(to_string(m));
                PromptBundle p = render_prompt(build_report(bug, f), f, default_exemplar(bug.language, f), m);
                fs::path golden = golden_path(bug.id, f, m);
                if (update) spit(golden, p.serialized());
                REQUIRE(fs::exists(golden));
                CHECK(p.serialized() == slurp(golden));
            }
        }
    }
}

}

TEST_SUITE("report_builder") {

TEST_CASE("rendering is stable across repetitions") {
    auto bugs = load_mini_corpus();
    const auto& bug = bugs.front();
    const std::string first =
        render_prompt(build_report(bug, PromptFormat::mask_hunk), PromptFormat::mask_hunk,
                      default_exemplar(bug.language, PromptFormat::mask_hunk), RenderMode::chat)
            .serialized();
    for (int i = 0; i < 100; ++i) {
        CHECK(render_prompt(build_report(bug, PromptFormat::mask_hunk), PromptFormat::mask_hunk,
                            default_exemplar(bug.language, PromptFormat::mask_hunk), RenderMode::chat)
                  .serialized() == first);
    }
}

}
