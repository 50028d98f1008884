#include "d4c/model_backend.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "d4c/error.hpp"

namespace d4c {

using nlohmann::json;

void GenerationConfig::validate() const {
    if (num_samples < 1) throw Error(ErrorCode::InvalidConfig, "num_samples must be >= 1");
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
        throw Error(ErrorCode::InvalidConfig, "temperature must be a finite value >= 0");
    if (max_output_tokens < 1) throw Error(ErrorCode::InvalidConfig, "max_output_tokens must be >= 1");
    if (!(request_timeout_seconds > 0.0)) throw Error(ErrorCode::InvalidConfig, "request timeout must be > 0");
}

std::string_view to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason parse_finish_reason(std::string_view text) {
    if (text == "stop") return FinishReason::stop;
    if (text == "length") return FinishReason::length;
    return FinishReason::error;
}

std::string RequestKey::str() const {
    return bug_id + "/" + std::string(to_string(format)) + "/" + std::to_string(sample_index);
}

ScoreResult Backend::score(std::string_view, std::string_view, const RequestKey&) const {
    throw Error(ErrorCode::CapabilityUnsupported, identity() + " does not expose token log-probabilities");
}

long long estimate_tokens(std::string_view text) { return static_cast<long long>((text.size() + 3) / 4); }

std::vector<Completion> sample(const PromptBundle& prompt, const GenerationConfig& config, const Backend& backend,
                               const std::string& bug_id, const StopPredicate& stop) {
    config.validate();
    std::vector<Completion> completions;
    completions.reserve(static_cast<std::size_t>(config.num_samples));
    std::optional<long long> prompt_estimate;
    for (int i = 0; i < config.num_samples; ++i) {
        RequestKey key{bug_id, prompt.format, i};
        Completion c = backend.generate(prompt, config, key);
        c.sample_index = i;
        if (c.input_tokens < 0 || c.output_tokens < 0) {
            if (!prompt_estimate) prompt_estimate = estimate_tokens(prompt.serialized());
            if (c.input_tokens < 0) c.input_tokens = *prompt_estimate;
            if (c.output_tokens < 0) c.output_tokens = estimate_tokens(c.text);
            c.usage_estimated = true;
        }
        completions.push_back(std::move(c));
        if (stop && stop(completions.back())) break;
    }
    return completions;
}

ScoreResult score_tokens(const Backend& backend, std::string_view prompt_text, std::string_view continuation_text,
                         const RequestKey& key) {
    if (!backend.supports_logprobs()) {
        throw Error(ErrorCode::CapabilityUnsupported, backend.identity() + " does not expose token log-probabilities");
    }
    if (continuation_text.empty()) return {};
    return backend.score(prompt_text, continuation_text, key);
}

PerplexityRecord perplexity(const std::vector<TokenScore>& prompt_scores,
                            const std::vector<TokenScore>& continuation_scores) {
    if (continuation_scores.empty()) throw Error(ErrorCode::EmptyScores, "no continuation tokens to score");
    auto nll_sum = [](const std::vector<TokenScore>& scores) {
        double sum = 0.0;
        for (const auto& s : scores) {
            if (!std::isfinite(s.logprob)) {
                throw Error(ErrorCode::ResponseMalformed, "non-finite logprob for token \"" + s.token_text + "\"");
            }
            sum -= s.logprob;
        }
        return sum;
    };
    const double out_nll = nll_sum(continuation_scores);
    const double in_nll = nll_sum(prompt_scores);
    PerplexityRecord record;
    record.output_token_count = continuation_scores.size();
    record.io_token_count = prompt_scores.size() + continuation_scores.size();
    record.output_ppl = std::exp(out_nll / static_cast<double>(record.output_token_count));
    record.io_ppl = std::exp((in_nll + out_nll) / static_cast<double>(record.io_token_count));
    return record;
}

MockBackend::MockBackend(std::map<std::string, Entry, std::less<>> entries, Options options)
    : entries_(std::move(entries)), options_(std::move(options)) {}

bool MockBackend::supports_logprobs() const {
    if (!options_.logprobs) return false;
    for (const auto& [key, entry] : entries_) {
        if (entry.token_scores) return true;
    }
    return false;
}

const MockBackend::Entry& MockBackend::lookup(const RequestKey& key) const {
    auto it = entries_.find(key.str());
    if (it == entries_.end()) throw Error(ErrorCode::ResponseMalformed, "mock script has no entry for " + key.str());
    return it->second;
}

Completion MockBackend::generate(const PromptBundle&, const GenerationConfig&, const RequestKey& key) const {
    const Entry& entry = lookup(key);
    Completion c;
    c.text = entry.text;
    c.sample_index = key.sample_index;
    c.finish_reason = entry.finish_reason;
    c.input_tokens = entry.input_tokens.value_or(-1);
    c.output_tokens = entry.output_tokens.value_or(-1);
    return c;
}

ScoreResult MockBackend::score(std::string_view, std::string_view, const RequestKey& key) const {
    if (!supports_logprobs()) return Backend::score({}, {}, key);
    const Entry& entry = lookup(key);
    if (!entry.token_scores) {
        throw Error(ErrorCode::ResponseMalformed, "mock script has no token_scores for " + key.str());
    }
    ScoreResult result;
    result.continuation_scores = *entry.token_scores;
    result.prompt_scores = entry.prompt_scores.value_or(std::vector<TokenScore>{});
    result.first_prompt_token_excluded = true;
    return result;
}

namespace {

std::vector<TokenScore> parse_scores(const json& value, const std::string& where) {
    if (!value.is_array()) throw Error(ErrorCode::ScriptMalformed, where + ": expected [[token, logprob], ...]");
    std::vector<TokenScore> scores;
    scores.reserve(value.size());
    for (const auto& pair : value) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_number()) {
            throw Error(ErrorCode::ScriptMalformed, where + ": expected [token, logprob] pairs");
        }
        double lp = pair[1].get<double>();
        if (!std::isfinite(lp)) throw Error(ErrorCode::ScriptMalformed, where + ": logprob must be finite");
        scores.push_back({pair[0].get<std::string>(), lp});
    }
    return scores;
}

}  // namespace

std::unique_ptr<MockBackend> parse_mock_script(std::string_view json_text, MockBackend::Options options) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ScriptMalformed, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::ScriptMalformed, "top level must map keys to entries");

    std::map<std::string, MockBackend::Entry, std::less<>> entries;
    for (const auto& [key, value] : doc.items()) {
        // "bug/format/index": validate the key shape up front so typos surface at load time.
        auto last = key.rfind('/');
        auto mid = last == std::string::npos ? std::string::npos : key.rfind('/', last - 1);
        if (mid == std::string::npos || mid == 0) {
            throw Error(ErrorCode::ScriptMalformed, key + ": key must be bug_id/format/sample_index");
        }
        try {
            parse_format(key.substr(mid + 1, last - mid - 1));
            std::size_t used = 0;
            int index = std::stoi(key.substr(last + 1), &used);
            if (index < 0 || used != key.size() - last - 1) throw std::invalid_argument("index");
        } catch (const std::exception&) {
            throw Error(ErrorCode::ScriptMalformed, key + ": key must be bug_id/format/sample_index");
        }
        if (!value.is_object() || !value.contains("text") || !value["text"].is_string()) {
            throw Error(ErrorCode::ScriptMalformed, key + ": entry needs a string \"text\"");
        }
        MockBackend::Entry entry;
        entry.text = value["text"].get<std::string>();
        for (const auto& [field, item] : value.items()) {
            if (field == "text") continue;
            if (field == "token_scores") {
                entry.token_scores = parse_scores(item, key + ".token_scores");
            } else if (field == "prompt_scores") {
                entry.prompt_scores = parse_scores(item, key + ".prompt_scores");
            } else if (field == "usage") {
                if (!item.is_object() || !item.contains("input_tokens") || !item.contains("output_tokens") ||
                    !item["input_tokens"].is_number_integer() || !item["output_tokens"].is_number_integer()) {
                    throw Error(ErrorCode::ScriptMalformed, key + ".usage: expected {input_tokens, output_tokens}");
                }
                entry.input_tokens = item["input_tokens"].get<long long>();
                entry.output_tokens = item["output_tokens"].get<long long>();
            } else if (field == "finish_reason") {
                if (!item.is_string()) throw Error(ErrorCode::ScriptMalformed, key + ".finish_reason: expected string");
                entry.finish_reason = parse_finish_reason(item.get<std::string>());
            } else {
                throw Error(ErrorCode::ScriptMalformed, key + ": unknown field \"" + field + "\"");
            }
        }
        entries.emplace(key, std::move(entry));
    }
    return std::make_unique<MockBackend>(std::move(entries), std::move(options));
}

std::unique_ptr<MockBackend> load_mock(const std::filesystem::path& script_path, MockBackend::Options options) {
    std::ifstream in(script_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ScriptMalformed, "cannot read mock script " + script_path.string());
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (options.identity == "mock") options.identity = "mock:" + script_path.filename().string();
    return parse_mock_script(text, std::move(options));
}

}  // namespace d4c
