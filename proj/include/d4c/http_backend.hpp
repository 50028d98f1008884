#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "d4c/model_backend.hpp"

namespace d4c {

struct HttpRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    double timeout_seconds = 120.0;
};

struct HttpResponse {
    int status = 0;  // 0: no response (connection failure or timeout)
    std::string body;
    std::string error;
};

/// Seam between the backends and the network, so tests can script or forbid traffic.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post_json(const HttpRequest& request) const = 0;
};

/// cpp-httplib client; https requires an OpenSSL-enabled build.
std::shared_ptr<HttpTransport> make_default_transport();

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double jitter = 0.2;  // fraction of the backoff, applied symmetrically
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to std::this_thread::sleep_for
};

/// POSTs with bounded retries: connection failures, 429 and 5xx are retried with
/// exponential backoff; 401/403 raise AuthError; other non-2xx raise ResponseMalformed.
nlohmann::json post_with_retry(const HttpTransport& transport, const HttpRequest& request, const RetryPolicy& policy);

/// OpenAI-style chat completions endpoint: {model, messages, temperature, n}.
class RemoteChatBackend final : public Backend {
public:
    RemoteChatBackend(std::string endpoint, std::string model, std::string api_key,
                      std::shared_ptr<HttpTransport> transport, RetryPolicy retry = {});

    std::string identity() const override { return "remote_chat:" + model_; }
    bool supports_logprobs() const override { return false; }
    RenderMode preferred_mode() const override { return RenderMode::chat; }
    Completion generate(const PromptBundle& prompt, const GenerationConfig& config,
                        const RequestKey& key) const override;

private:
    std::string endpoint_;
    std::string model_;
    std::string api_key_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy retry_;
};

/// Text-completion endpoint taking the flat prompt; scores tokens through echoed logprobs.
class LocalCompletionBackend final : public Backend {
public:
    LocalCompletionBackend(std::string endpoint, std::shared_ptr<HttpTransport> transport, RetryPolicy retry = {},
                           TextMarkers markers = {}, std::string model = {});

    std::string identity() const override { return "local_completion:" + endpoint_; }
    bool supports_logprobs() const override { return true; }
    RenderMode preferred_mode() const override { return RenderMode::text_completion; }
    TextMarkers markers() const override { return markers_; }
    Completion generate(const PromptBundle& prompt, const GenerationConfig& config,
                        const RequestKey& key) const override;
    ScoreResult score(std::string_view prompt_text, std::string_view continuation_text,
                      const RequestKey& key) const override;

private:
    std::string endpoint_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy retry_;
    TextMarkers markers_;
    std::string model_;
};

}  // namespace d4c
