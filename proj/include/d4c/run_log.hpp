#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include "d4c/orchestrator.hpp"
#include <json.hpp>

namespace d4c {

inline constexpr int kRunLogSchema = 1;

nlohmann::ordered_json to_json(const RepairRun& run);
RepairRun repair_run_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SummaryReport& summary);

/// Appends one JSON line per run. The header record is written when the file is empty.
/// Safe to call from several threads.
class RunLogWriter {
public:
    explicit RunLogWriter(const std::filesystem::path& path);
    void append(const RepairRun& run);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mutex_;
};

/// Throws RunLogMalformed naming the 1-based line on any bad line. An empty file is an empty log.
std::vector<RepairRun> parse_run_log(std::string_view text);
std::vector<RepairRun> read_run_log(const std::filesystem::path& path);

}  // namespace d4c
