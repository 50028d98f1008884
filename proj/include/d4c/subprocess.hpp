#pragma once

#include <filesystem>
#include <string>

namespace d4c {

struct ProcessResult {
    int exit_code = -1;  // -1 when killed by a signal or timed out
    int term_signal = 0;
    bool timed_out = false;
    std::string output;  // stdout and stderr interleaved, truncated to the byte cap
    double wall_seconds = 0.0;
};

/// Runs `command` through /bin/sh in `cwd` inside its own process group. On timeout the
/// whole group is killed with SIGKILL. Leftover background processes are killed on exit.
ProcessResult run_shell(const std::string& command, const std::filesystem::path& cwd, double timeout_seconds,
                        std::size_t max_output_bytes = 1 << 20);

}  // namespace d4c
