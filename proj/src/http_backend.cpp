#include "d4c/http_backend.hpp"

#include <random>
#include <thread>

#include <httplib.h>

#include "d4c/error.hpp"

namespace d4c {

using nlohmann::json;

namespace {

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post_json(const HttpRequest& request) const override {
        // scheme://host[:port]/path
        auto scheme_end = request.url.find("://");
        if (scheme_end == std::string::npos) return {0, {}, "malformed URL " + request.url};
        auto path_start = request.url.find('/', scheme_end + 3);
        std::string origin = request.url.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

        httplib::Client client(origin);
        auto seconds = static_cast<time_t>(request.timeout_seconds);
        auto micros = static_cast<time_t>((request.timeout_seconds - static_cast<double>(seconds)) * 1e6);
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);

        httplib::Headers headers;
        for (const auto& [name, value] : request.headers) headers.emplace(name, value);
        auto result = client.Post(path, headers, request.body, "application/json");
        if (!result) return {0, {}, httplib::to_string(result.error())};
        return {result->status, result->body, {}};
    }
};

std::chrono::milliseconds jittered(std::chrono::milliseconds base, double jitter) {
    thread_local std::mt19937 rng{std::random_device{}()};
    std::uniform_real_distribution<double> dist(1.0 - jitter, 1.0 + jitter);
    return std::chrono::milliseconds(static_cast<long long>(static_cast<double>(base.count()) * dist(rng)));
}

long long usage_field(const json& doc, const char* field) {
    if (doc.contains("usage") && doc["usage"].is_object() && doc["usage"].contains(field) &&
        doc["usage"][field].is_number_integer()) {
        return doc["usage"][field].get<long long>();
    }
    return -1;
}

FinishReason finish_of(const json& choice) {
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
        return parse_finish_reason(choice["finish_reason"].get<std::string>());
    return FinishReason::stop;
}

const json& first_choice(const json& doc, const std::string& who) {
    if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw Error(ErrorCode::ResponseMalformed, who + ": response has no choices");
    }
    return doc["choices"][0];
}

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() { return std::make_shared<HttplibTransport>(); }

json post_with_retry(const HttpTransport& transport, const HttpRequest& request, const RetryPolicy& policy) {
    auto backoff = policy.initial_backoff;
    std::string last_failure;
    const int attempts = std::max(policy.attempts, 1);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        HttpResponse response = transport.post_json(request);
        if (response.status == 401 || response.status == 403) {
            throw Error(ErrorCode::AuthError, request.url + " rejected credentials (HTTP " +
                                                  std::to_string(response.status) + ")");
        }
        bool retryable = response.status == 0 || response.status == 429 || response.status >= 500;
        if (!retryable && (response.status < 200 || response.status >= 300)) {
            throw Error(ErrorCode::ResponseMalformed, request.url + " answered HTTP " + std::to_string(response.status));
        }
        if (!retryable) {
            try {
                return json::parse(response.body);
            } catch (const json::parse_error& e) {
                throw Error(ErrorCode::ResponseMalformed, request.url + " returned invalid JSON: " + e.what());
            }
        }
        last_failure = response.status == 0 ? response.error : "HTTP " + std::to_string(response.status);
        if (attempt < attempts) {
            auto delay = jittered(backoff, policy.jitter);
            if (policy.sleep) {
                policy.sleep(delay);
            } else {
                std::this_thread::sleep_for(delay);
            }
            backoff *= 2;
        }
    }
    throw Error(ErrorCode::BackendUnavailable,
                request.url + " failed " + std::to_string(attempts) + " attempts; last: " + last_failure);
}

RemoteChatBackend::RemoteChatBackend(std::string endpoint, std::string model, std::string api_key,
                                     std::shared_ptr<HttpTransport> transport, RetryPolicy retry)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      transport_(std::move(transport)),
      retry_(std::move(retry)) {}

Completion RemoteChatBackend::generate(const PromptBundle& prompt, const GenerationConfig& config,
                                       const RequestKey& key) const {
    json messages = json::array();
    for (const auto& m : prompt.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    json body{{"model", model_},
              {"messages", std::move(messages)},
              {"temperature", config.temperature},
              {"n", 1},
              {"max_tokens", config.max_output_tokens}};
    HttpRequest request{endpoint_,
                        {{"Authorization", "Bearer " + api_key_}, {"Content-Type", "application/json"}},
                        body.dump(),
                        config.request_timeout_seconds};
    json doc = post_with_retry(*transport_, request, retry_);
    const json& choice = first_choice(doc, identity());
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw Error(ErrorCode::ResponseMalformed, identity() + ": choice lacks message.content");
    }
    Completion c;
    c.text = choice["message"]["content"].get<std::string>();
    c.sample_index = key.sample_index;
    c.finish_reason = finish_of(choice);
    c.input_tokens = usage_field(doc, "prompt_tokens");
    c.output_tokens = usage_field(doc, "completion_tokens");
    return c;
}

LocalCompletionBackend::LocalCompletionBackend(std::string endpoint, std::shared_ptr<HttpTransport> transport,
                                               RetryPolicy retry, TextMarkers markers, std::string model)
    : endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      retry_(std::move(retry)),
      markers_(std::move(markers)),
      model_(std::move(model)) {}

Completion LocalCompletionBackend::generate(const PromptBundle& prompt, const GenerationConfig& config,
                                            const RequestKey& key) const {
    json body{{"prompt", prompt.serialized()},
              {"temperature", config.temperature},
              {"max_tokens", config.max_output_tokens},
              {"logprobs", false}};
    if (!model_.empty()) body["model"] = model_;
    HttpRequest request{endpoint_, {{"Content-Type", "application/json"}}, body.dump(),
                        config.request_timeout_seconds};
    json doc = post_with_retry(*transport_, request, retry_);
    const json& choice = first_choice(doc, identity());
    if (!choice.contains("text") || !choice["text"].is_string()) {
        throw Error(ErrorCode::ResponseMalformed, identity() + ": choice lacks text");
    }
    Completion c;
    c.text = choice["text"].get<std::string>();
    c.sample_index = key.sample_index;
    c.finish_reason = finish_of(choice);
    c.input_tokens = usage_field(doc, "prompt_tokens");
    c.output_tokens = usage_field(doc, "completion_tokens");
    return c;
}

ScoreResult LocalCompletionBackend::score(std::string_view prompt_text, std::string_view continuation_text,
                                          const RequestKey&) const {
    // Echo the concatenation back with zero new tokens; the server scores every token it saw.
    std::string full(prompt_text);
    full.append(continuation_text);
    json body{{"prompt", full}, {"max_tokens", 0}, {"echo", true}, {"logprobs", 1}, {"temperature", 1.0}};
    if (!model_.empty()) body["model"] = model_;
    HttpRequest request{endpoint_, {{"Content-Type", "application/json"}}, body.dump(), 120.0};
    json doc = post_with_retry(*transport_, request, retry_);
    const json& choice = first_choice(doc, identity());
    if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) {
        throw Error(ErrorCode::ResponseMalformed, identity() + ": choice lacks logprobs");
    }
    const json& lp = choice["logprobs"];
    if (!lp.contains("tokens") || !lp.contains("token_logprobs") || !lp.contains("text_offset") ||
        lp["tokens"].size() != lp["token_logprobs"].size() || lp["tokens"].size() != lp["text_offset"].size()) {
        throw Error(ErrorCode::ResponseMalformed, identity() + ": logprobs needs aligned tokens/token_logprobs/text_offset");
    }
    ScoreResult result;
    for (std::size_t i = 0; i < lp["tokens"].size(); ++i) {
        const json& value = lp["token_logprobs"][i];
        std::string token = lp["tokens"][i].get<std::string>();
        auto offset = lp["text_offset"][i].get<std::size_t>();
        if (value.is_null()) {
            if (i != 0) throw Error(ErrorCode::ResponseMalformed, identity() + ": unscored token after the first");
            result.first_prompt_token_excluded = true;
            continue;
        }
        TokenScore score{std::move(token), value.get<double>()};
        if (offset >= prompt_text.size()) {
            result.continuation_scores.push_back(std::move(score));
        } else {
            result.prompt_scores.push_back(std::move(score));
        }
    }
    return result;
}

}  // namespace d4c
