#include <doctest.h>

#include <functional>
#include <thread>

#include "d4c/error.hpp"
#include "d4c/run_log.hpp"
#include "test_support.hpp"

using namespace d4c;
using namespace d4c::testing;

namespace {

std::string error_text(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RunLogMalformed);
        return e.what();
    }
    FAIL("expected RunLogMalformed");
    return {};
}

RepairRun sample_run() {
    RepairRun run;
    run.bug_id = "b-1";
    run.format = PromptFormat::mask_hunk;
    run.backend_identity = "mock";
    CandidatePatch a;
    a.completion = {"```\nx = 1\n```", 1200, 9, false, 0, FinishReason::stop};
    ExtractedPatch ex;
    ex.kind = PatchKind::hunk_set;
    ex.replacements = {{{"old"}, {"new", "lines"}}};
    ex.source_fence_language_tag = "py";
    a.extracted = ex;
    a.applied = AppliedPatch{"ignored body", "--- a\n+++ b\n", {{3, 4}, {7, 6}}};
    a.outcome = {ValidationStatus::plausible, "", 0.25};
    a.reference_match = true;
    a.perplexity = PerplexityRecord{1.5, 2.25, 4, 60, "mock"};
    CandidatePatch b;
    b.completion = {"prose é \"quoted\"", 1200, 5, true, 1, FinishReason::length};
    b.outcome = {ValidationStatus::extraction_error, "NoHunksFound: none", 0.0};
    b.perplexity_error = "EmptyScores: none";
    run.candidates = {a, b};
    run.first_plausible_index = 1;
    run.reference_match = true;
    run.ledger.add(2400, 14);
    run.timings = {1.0, 0.25, 1.25};
    return run;
}

}  // namespace

TEST_SUITE("run_log") {

TEST_CASE("a run survives a JSON round trip") {
    const RepairRun run = sample_run();
    RepairRun back = repair_run_from_json(nlohmann::json::parse(to_json(run).dump()));
    CHECK(to_json(back).dump() == to_json(run).dump());
    CHECK(back.bug_id == "b-1");
    CHECK(back.format == PromptFormat::mask_hunk);
    REQUIRE(back.candidates.size() == 2);
    CHECK(back.candidates[0].extracted->replacements == run.candidates[0].extracted->replacements);
    CHECK(back.candidates[0].applied->touched_line_ranges == run.candidates[0].applied->touched_line_ranges);
    CHECK(back.candidates[0].applied->patched_file_text.empty());
    CHECK(back.candidates[0].perplexity->io_ppl == 2.25);
    CHECK(back.candidates[1].completion.usage_estimated);
    CHECK(back.candidates[1].completion.finish_reason == FinishReason::length);
    CHECK(back.candidates[1].completion.text == run.candidates[1].completion.text);
    CHECK(*back.candidates[1].perplexity_error == "EmptyScores: none");
    CHECK(back.ledger.total_dollars == doctest::Approx(run.ledger.total_dollars));
    CHECK(*back.first_plausible_index == 1);
    CHECK_FALSE(back.error);
}

TEST_CASE("writer and reader agree, concurrently") {
    TempDir tmp("runlog");
    const auto path = tmp.path() / "run.jsonl";
    {
        RunLogWriter w(path);
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t) {
            threads.emplace_back([&w, t] {
                for (int i = 0; i < 25; ++i) {
                    RepairRun r = sample_run();
                    r.bug_id = "b" + std::to_string(t) + "-" + std::to_string(i);
                    w.append(r);
                }
            });
        }
        for (auto& th : threads) th.join();
    }
    auto text = slurp(path);
    CHECK(text.rfind("{\"schema\":1}\n", 0) == 0);
    auto runs = read_run_log(path);
    CHECK(runs.size() == 100);
    {
        RunLogWriter again(path);
        again.append(sample_run());
    }
    CHECK(read_run_log(path).size() == 101);
    CHECK(slurp(path).find("{\"schema\":1}", 1) == std::string::npos);
}

TEST_CASE("malformed logs name the offending line") {
    const std::string header = "{\"schema\":1}\n";
    const std::string good = to_json(sample_run()).dump() + "\n";
    CHECK(parse_run_log("").empty());
    CHECK(parse_run_log(header).empty());
    CHECK(parse_run_log(header + good + good).size() == 2);

    CHECK(error_text([&] { parse_run_log(good); }).find("line 1") != std::string::npos);
    CHECK(error_text([&] { parse_run_log("{\"schema\":2}\n"); }).find("line 1") != std::string::npos);
    std::string truncated = header + good + good.substr(0, good.size() / 2);
    std::string msg = error_text([&] { parse_run_log(truncated); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("truncated") != std::string::npos);
    CHECK(error_text([&] { parse_run_log(header + "{\"bug_id\": 3}\n"); }).find("line 2") != std::string::npos);
    CHECK(error_text([&] { parse_run_log(header + "not json\n" + good); }).find("line 2") != std::string::npos);
}

TEST_CASE("summary serialization carries the figures") {
    SummaryReport s = summarize({sample_run()});
    auto j = to_json(s);
    CHECK(j["runs"] == 1);
    CHECK(j["plausible_bugs"] == 1);
    CHECK(j["formats"].size() == 1);
    CHECK(j["formats"][0]["format"] == "mask_hunk");
}

}
