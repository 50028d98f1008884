#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "d4c/http_backend.hpp"
#include "d4c/report_builder.hpp"

namespace d4c {

enum class BackendKind { remote_chat, local_completion, mock };
std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

struct RunConfig {
    std::filesystem::path corpus_dir;
    std::optional<BackendKind> backend;
    std::string endpoint;
    std::filesystem::path script;
    std::string model = "gpt-4";
    PromptFormat format = PromptFormat::report_func;
    std::vector<PromptFormat> formats{kAllFormats.begin(), kAllFormats.end()};
    int num_samples = 10;
    double temperature = 1.0;
    double timeout_seconds = 60.0;
    double bug_budget_seconds = 600.0;
    bool early_stop = false;
    int workers = 1;
    bool keep_scratch = false;
    std::filesystem::path output_dir = "d4c-out";
    bool dump_prompts = false;
    int max_output_tokens = 2048;
    double request_timeout_seconds = 120.0;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int partial = 1;  // at least one bundle aborted with a harness error
inline constexpr int config = 2;
inline constexpr int backend_unavailable = 3;
}  // namespace exit_code

/// Everything the commands touch outside their arguments, so tests can substitute it.
struct CliEnv {
    std::function<std::optional<std::string>(const std::string&)> getenv;
    std::shared_ptr<HttpTransport> transport;  // null: the default network transport
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    RetryPolicy retry;
    const std::atomic<bool>* cancel = nullptr;

    static CliEnv process();
};

int cmd_repair(const RunConfig& config, CliEnv& env);
int cmd_compare(const RunConfig& config, CliEnv& env);
int cmd_report(const std::filesystem::path& run_log, CliEnv& env);

/// Parses `args` (without the program name) and dispatches to a subcommand.
int run_cli(const std::vector<std::string>& args, CliEnv& env);

}  // namespace d4c
