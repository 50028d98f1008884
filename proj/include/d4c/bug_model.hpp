#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace d4c {

/// Function syntax family: brace-delimited (C, C++, Java) or indentation-delimited (Python).
enum class Language { c_like, python_like };

std::string_view to_string(Language language);
Language parse_language(std::string_view text);

struct TestCase {
    std::string name;
    std::string input_repr;
    std::string expected_output_repr;

    bool operator==(const TestCase&) const = default;
};

/// 1-based inclusive line range relative to the target file.
struct HunkSpec {
    int start_line = 0;
    int end_line = 0;

    bool operator==(const HunkSpec&) const = default;
};

/// Byte range [start_offset, end_offset) of one function definition.
struct FunctionSpan {
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    int header_line = 0;

    std::size_t length() const { return end_offset - start_offset; }
    bool operator==(const FunctionSpan&) const = default;
};

struct BugInstance {
    std::string id;
    Language language = Language::c_like;
    std::filesystem::path source_root;
    std::filesystem::path target_file;  // relative to source_root
    std::string function_name;
    std::optional<std::string> doc_text;
    std::vector<TestCase> failed_tests;
    std::vector<std::string> error_messages;
    std::string test_command;
    std::optional<std::vector<HunkSpec>> known_hunks;
    std::optional<std::string> reference_fix;
    // Disambiguates overloaded names; absent means first definition wins.
    std::optional<int> header_line;
    // Per-bundle override of the per-patch validation timeout.
    std::optional<double> timeout_seconds;

    std::filesystem::path target_path() const { return source_root / target_file; }
};

enum class Severity { warning, error };

struct Issue {
    Severity severity = Severity::error;
    std::string message;
};

/// Reads `<dir>/bug.json` and resolves paths against `dir`.
BugInstance load_bundle(const std::filesystem::path& dir);

/// Inverse of the manifest parser: emits exactly the keys the manifest carries.
std::string serialize_manifest(const BugInstance& bug);

/// Parses manifest JSON text; `source_root` is attached verbatim.
BugInstance parse_manifest(std::string_view json_text, const std::filesystem::path& source_root);

/// Checks every BugInstance invariant; one Issue per violation.
std::vector<Issue> validate_bundle(const BugInstance& bug);

/// Corpus-level checks: per-bundle issues plus duplicate ids.
std::vector<Issue> validate_corpus(const std::vector<BugInstance>& bugs);

/// Locates the first definition of `function_name`, skipping calls, declarations,
/// and occurrences inside comments or literals. When `header_line` is given, the
/// definition whose signature starts (or whose name sits) on that line is chosen.
FunctionSpan locate_function(std::string_view source, Language language, std::string_view function_name,
                             std::optional<int> header_line = std::nullopt);

/// Reads the bug's target file and locates its function.
FunctionSpan locate_bug_function(const BugInstance& bug, std::string_view source);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Lists bundle directories (those containing bug.json) directly under `corpus_dir`, sorted by name.
std::vector<std::filesystem::path> discover_bundles(const std::filesystem::path& corpus_dir);

}  // namespace d4c
