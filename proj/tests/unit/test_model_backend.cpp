#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "d4c/error.hpp"
#include "d4c/model_backend.hpp"
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

std::vector<TokenScore> scores(std::initializer_list<double> lps) {
    std::vector<TokenScore> out;
    for (double lp : lps) out.push_back({"t", lp});
    return out;
}

PromptBundle chat_prompt(PromptFormat f = PromptFormat::report_func) {
    PromptBundle p;
    p.format = f;
    p.mode = RenderMode::chat;
    p.messages = {{Role::user, "abcdefgh"}};  // serialized: "user:\nabcdefgh\n" (15 bytes)
    return p;
}

const char* kTinyScript = R"({
  "b1/report_func/0": {"text": "zero", "usage": {"input_tokens": 100, "output_tokens": 7}},
  "b1/report_func/1": {"text": "one!", "token_scores": [["on", -0.5], ["e!", -1.5]], "prompt_scores": [["x", -1.0]]},
  "b1/report_func/2": {"text": "two", "finish_reason": "length"}
})";

}  // namespace

TEST_SUITE("model_backend") {

TEST_CASE("perplexity oracles") {
    const double half = std::log(0.5);
    PerplexityRecord r = perplexity({}, scores({half, half, half, half}));
    CHECK(r.output_ppl == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.io_ppl == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.output_token_count == 4);

    r = perplexity({}, scores({-1.0, -2.0, -3.0}));
    CHECK(r.output_ppl == doctest::Approx(std::exp(2.0)).epsilon(1e-12));

    // prompt at ln(1/4), continuation at ln(1/2): IO mean NLL is 1.5 ln 2
    std::vector<TokenScore> prompt(8, TokenScore{"p", std::log(0.25)});
    std::vector<TokenScore> cont(8, TokenScore{"c", std::log(0.5)});
    r = perplexity(prompt, cont);
    CHECK(r.output_ppl == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.io_ppl == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.io_token_count == 16);

    CHECK(code_of([] { perplexity(scores({-1.0}), {}); }) == ErrorCode::EmptyScores);
    CHECK(code_of([] { perplexity({}, scores({-1.0, NAN})); }) == ErrorCode::ResponseMalformed);
}

TEST_CASE("perplexity of a uniform distribution is the vocabulary size") {
    for (int v : {2, 7, 50, 32000}) {
        std::vector<TokenScore> s(13, TokenScore{"u", -std::log(static_cast<double>(v))});
        CHECK(perplexity(s, s).output_ppl == doctest::Approx(v).epsilon(1e-9));
        CHECK(perplexity(s, s).io_ppl == doctest::Approx(v).epsilon(1e-9));
    }
}

TEST_CASE("perplexity bounds and monotonicity") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> lp(-6.0, 0.0);
    for (int round = 0; round < 500; ++round) {
        std::vector<TokenScore> s;
        int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) s.push_back({"t", lp(rng)});
        double base = perplexity({}, s).output_ppl;
        CHECK(base >= 1.0);
        auto idx = rng() % s.size();
        auto worse = s;
        worse[idx].logprob -= 0.5;
        CHECK(perplexity({}, worse).output_ppl > base);
        auto better = s;
        better[idx].logprob = std::min(0.0, better[idx].logprob + 0.25);
        CHECK(perplexity({}, better).output_ppl <= base);
    }
}

TEST_CASE("estimate_tokens is bytes over four rounded up") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("a") == 1);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    CHECK(estimate_tokens(std::string(4001, 'x')) == 1001);
}

TEST_CASE("generation config validation") {
    GenerationConfig ok;
    CHECK_NOTHROW(ok.validate());
    GenerationConfig c = ok;
    c.num_samples = 0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = ok;
    c.temperature = -0.1;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = ok;
    c.temperature = NAN;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = ok;
    c.max_output_tokens = 0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("mock replay: order, usage, estimates and stop") {
    auto mock = parse_mock_script(kTinyScript);
    CHECK(mock->size() == 3);
    CHECK(mock->supports_logprobs());
    GenerationConfig cfg;
    cfg.num_samples = 3;
    auto out = sample(chat_prompt(), cfg, *mock, "b1");
    REQUIRE(out.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(out[static_cast<std::size_t>(i)].sample_index == i);
    CHECK(out[0].text == "zero");
    CHECK(out[0].input_tokens == 100);
    CHECK(out[0].output_tokens == 7);
    CHECK_FALSE(out[0].usage_estimated);
    CHECK(out[1].usage_estimated);
    CHECK(out[1].input_tokens == 4);   // ceil(15 / 4)
    CHECK(out[1].output_tokens == 1);  // ceil(4 / 4)
    CHECK(out[2].finish_reason == FinishReason::length);

    int seen = 0;
    auto stopped = sample(chat_prompt(), cfg, *mock, "b1", [&](const Completion& c) {
        ++seen;
        return c.text == "one!";
    });
    CHECK(stopped.size() == 2);
    CHECK(seen == 2);

    auto second = sample(chat_prompt(), cfg, *mock, "b1");
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(second[i].text == out[i].text);
}

TEST_CASE("mock scoring and missing entries") {
    auto mock = parse_mock_script(kTinyScript);
    RequestKey k1{"b1", PromptFormat::report_func, 1};
    ScoreResult s = score_tokens(*mock, "prompt", "one!", k1);
    REQUIRE(s.continuation_scores.size() == 2);
    CHECK(s.continuation_scores[1] == TokenScore{"e!", -1.5});
    CHECK(s.prompt_scores.size() == 1);
    CHECK(score_tokens(*mock, "prompt", "", k1).continuation_scores.empty());

    RequestKey k0{"b1", PromptFormat::report_func, 0};
    CHECK(code_of([&] { score_tokens(*mock, "p", "zero", k0); }) == ErrorCode::ResponseMalformed);

    GenerationConfig cfg;
    cfg.num_samples = 4;
    CHECK(code_of([&] { sample(chat_prompt(), cfg, *mock, "b1"); }) == ErrorCode::ResponseMalformed);
    CHECK(code_of([&] { sample(chat_prompt(PromptFormat::mask_func), cfg, *mock, "b1"); }) ==
          ErrorCode::ResponseMalformed);

    MockBackend::Options no_lp;
    no_lp.logprobs = false;
    auto chat_only = parse_mock_script(kTinyScript, no_lp);
    CHECK_FALSE(chat_only->supports_logprobs());
    CHECK(code_of([&] { score_tokens(*chat_only, "p", "one!", k1); }) == ErrorCode::CapabilityUnsupported);
}

TEST_CASE("malformed scripts are rejected") {
    for (const char* bad : {
             "not json",
             "[]",
             R"({"b1/report_func": {"text": "x"}})",
             R"({"b1/report_func/-1": {"text": "x"}})",
             R"({"b1/report_func/1x": {"text": "x"}})",
             R"({"b1/report_func/0": {"text": 3}})",
             R"({"b1/report_func/0": {"text": "x", "token_scores": [["a"]]}})",
             R"({"b1/report_func/0": {"text": "x", "token_scores": {"a": 1}}})",
             R"({"b1/report_func/0": {"text": "x", "usage": {"input_tokens": 1}}})",
             R"({"b1/report_func/0": {"text": "x", "surprise": true}})",
         }) {
        CAPTURE(bad);
        CHECK(code_of([&] { parse_mock_script(bad); }) == ErrorCode::ScriptMalformed);
    }
    CHECK(code_of([] { load_mock("/nonexistent/script.json"); }) == ErrorCode::ScriptMalformed);
}

TEST_CASE("shipped mini-corpus script loads") {
    auto mock = load_mock(mock_script());
    CHECK(mock->size() == 10 * 4 * 10);
    CHECK(mock->supports_logprobs());
}

}
