#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d4c/report_builder.hpp"

namespace d4c {

struct GenerationConfig {
    int num_samples = 10;
    double temperature = 1.0;
    int max_output_tokens = 2048;
    double request_timeout_seconds = 120.0;

    /// Throws InvalidConfig when an invariant is violated.
    void validate() const;
};

enum class FinishReason { stop, length, error };
std::string_view to_string(FinishReason reason);
FinishReason parse_finish_reason(std::string_view text);

struct Completion {
    std::string text;
    long long input_tokens = 0;
    long long output_tokens = 0;
    bool usage_estimated = false;
    int sample_index = 0;
    FinishReason finish_reason = FinishReason::stop;
};

struct TokenScore {
    std::string token_text;
    double logprob = 0.0;  // natural log

    bool operator==(const TokenScore&) const = default;
};

struct ScoreResult {
    std::vector<TokenScore> prompt_scores;
    std::vector<TokenScore> continuation_scores;
    // Causal scoring cannot condition the very first prompt token; when set, it is absent
    // from prompt_scores.
    bool first_prompt_token_excluded = false;
};

struct PerplexityRecord {
    double output_ppl = 0.0;
    double io_ppl = 0.0;
    std::size_t output_token_count = 0;
    std::size_t io_token_count = 0;
    std::string backend_identity;
};

/// Identifies one generation request; the replay backend keys its script on it.
struct RequestKey {
    std::string bug_id;
    PromptFormat format = PromptFormat::report_func;
    int sample_index = 0;

    std::string str() const;
};

/// Text-generation backend. Implementations must tolerate concurrent calls.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string identity() const = 0;
    virtual bool supports_logprobs() const = 0;
    /// Rendering the backend consumes: chat messages or one flat string.
    virtual RenderMode preferred_mode() const = 0;
    virtual TextMarkers markers() const { return {}; }

    /// One sample. Negative usage counts mean "not reported"; sample() estimates them.
    virtual Completion generate(const PromptBundle& prompt, const GenerationConfig& config,
                                const RequestKey& key) const = 0;

    virtual ScoreResult score(std::string_view prompt_text, std::string_view continuation_text,
                              const RequestKey& key) const;
};

/// ceil(bytes / 4): the fallback token count when a backend reports no usage.
long long estimate_tokens(std::string_view text);

/// Decides after each completion whether to stop issuing further samples.
using StopPredicate = std::function<bool(const Completion&)>;

/// Draws up to config.num_samples completions in sample_index order.
std::vector<Completion> sample(const PromptBundle& prompt, const GenerationConfig& config, const Backend& backend,
                               const std::string& bug_id, const StopPredicate& stop = {});

ScoreResult score_tokens(const Backend& backend, std::string_view prompt_text, std::string_view continuation_text,
                         const RequestKey& key = {});

/// exp(mean negative logprob) over the continuation (O) and over prompt + continuation (IO).
PerplexityRecord perplexity(const std::vector<TokenScore>& prompt_scores,
                            const std::vector<TokenScore>& continuation_scores);

/// Deterministic replay backend over a JSON script keyed "bug_id/format/sample_index".
class MockBackend final : public Backend {
public:
    struct Entry {
        std::string text;
        std::optional<std::vector<TokenScore>> token_scores;
        std::optional<std::vector<TokenScore>> prompt_scores;
        std::optional<long long> input_tokens;
        std::optional<long long> output_tokens;
        FinishReason finish_reason = FinishReason::stop;
    };

    struct Options {
        bool logprobs = true;
        std::string identity = "mock";
        RenderMode mode = RenderMode::chat;
    };

    MockBackend(std::map<std::string, Entry, std::less<>> entries, Options options);

    std::string identity() const override { return options_.identity; }
    bool supports_logprobs() const override;
    RenderMode preferred_mode() const override { return options_.mode; }
    Completion generate(const PromptBundle& prompt, const GenerationConfig& config,
                        const RequestKey& key) const override;
    ScoreResult score(std::string_view prompt_text, std::string_view continuation_text,
                      const RequestKey& key) const override;

    std::size_t size() const { return entries_.size(); }

private:
    const Entry& lookup(const RequestKey& key) const;

    std::map<std::string, Entry, std::less<>> entries_;
    Options options_;
};

std::unique_ptr<MockBackend> parse_mock_script(std::string_view json_text, MockBackend::Options options = {});
std::unique_ptr<MockBackend> load_mock(const std::filesystem::path& script_path, MockBackend::Options options = {});

}  // namespace d4c
