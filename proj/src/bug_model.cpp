#include "d4c/bug_model.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "d4c/error.hpp"
#include "d4c/source_text.hpp"

namespace d4c {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Language language) {
    return language == Language::c_like ? "c_like" : "python_like";
}

Language parse_language(std::string_view text) {
    if (text == "c_like") return Language::c_like;
    if (text == "python_like") return Language::python_like;
    throw Error(ErrorCode::ManifestMalformed, "language: expected \"c_like\" or \"python_like\", got \"" +
                                                  std::string(text) + "\"");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::SourceFileMissing, "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::SandboxSetupFailed, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

namespace {

const std::set<std::string, std::less<>> kManifestKeys = {
    "id",           "language",       "target_file", "function_name", "doc_text",    "failed_tests",
    "error_messages", "test_command", "known_hunks", "reference_fix", "header_line", "timeout_seconds"};

[[noreturn]] void malformed(std::string_view field, std::string_view reason) {
    throw Error(ErrorCode::ManifestMalformed, std::string(field) + ": " + std::string(reason));
}

std::string require_string(const json& doc, const char* field) {
    if (!doc.contains(field)) malformed(field, "required field missing");
    if (!doc[field].is_string()) malformed(field, "expected a string");
    return doc[field].get<std::string>();
}

std::optional<std::string> optional_string(const json& doc, const char* field) {
    if (!doc.contains(field)) return std::nullopt;
    if (!doc[field].is_string()) malformed(field, "expected a string");
    return doc[field].get<std::string>();
}

const json* optional_array(const json& doc, const char* field) {
    if (!doc.contains(field)) return nullptr;
    if (!doc[field].is_array()) malformed(field, "expected an array");
    return &doc[field];
}

}  // namespace

BugInstance parse_manifest(std::string_view json_text, const fs::path& source_root) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        malformed("bug.json", e.what());
    }
    if (!doc.is_object()) malformed("bug.json", "top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (!kManifestKeys.contains(key)) malformed(key, "unknown key");
    }

    BugInstance bug;
    bug.source_root = source_root;
    bug.id = require_string(doc, "id");
    try {
        bug.language = parse_language(require_string(doc, "language"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ManifestMalformed) throw;
        malformed("language", e.what());
    }
    bug.target_file = require_string(doc, "target_file");
    bug.function_name = require_string(doc, "function_name");
    bug.doc_text = optional_string(doc, "doc_text");
    bug.test_command = require_string(doc, "test_command");
    bug.reference_fix = optional_string(doc, "reference_fix");

    if (const json* tests = optional_array(doc, "failed_tests")) {
        for (std::size_t i = 0; i < tests->size(); ++i) {
            const json& t = (*tests)[i];
            std::string where = "failed_tests[" + std::to_string(i) + "]";
            if (!t.is_object()) malformed(where, "expected an object");
            for (const auto& [key, value] : t.items()) {
                if (key != "name" && key != "input" && key != "expected") malformed(where + "." + key, "unknown key");
                if (!value.is_string()) malformed(where + "." + key, "expected a string");
            }
            if (!t.contains("name") || !t.contains("input") || !t.contains("expected"))
                malformed(where, "requires name, input, expected");
            bug.failed_tests.push_back({t["name"].get<std::string>(), t["input"].get<std::string>(),
                                        t["expected"].get<std::string>()});
        }
    }
    if (const json* messages = optional_array(doc, "error_messages")) {
        for (std::size_t i = 0; i < messages->size(); ++i) {
            if (!(*messages)[i].is_string())
                malformed("error_messages[" + std::to_string(i) + "]", "expected a string");
            bug.error_messages.push_back((*messages)[i].get<std::string>());
        }
    }
    if (const json* hunks = optional_array(doc, "known_hunks")) {
        std::vector<HunkSpec> specs;
        for (std::size_t i = 0; i < hunks->size(); ++i) {
            const json& h = (*hunks)[i];
            std::string where = "known_hunks[" + std::to_string(i) + "]";
            if (!h.is_object() || h.size() != 2 || !h.contains("start_line") || !h.contains("end_line") ||
                !h["start_line"].is_number_integer() || !h["end_line"].is_number_integer()) {
                malformed(where, "expected {start_line, end_line} integers");
            }
            specs.push_back({h["start_line"].get<int>(), h["end_line"].get<int>()});
        }
        bug.known_hunks = std::move(specs);
    }
    if (doc.contains("header_line")) {
        if (!doc["header_line"].is_number_integer()) malformed("header_line", "expected an integer");
        bug.header_line = doc["header_line"].get<int>();
    }
    if (doc.contains("timeout_seconds")) {
        if (!doc["timeout_seconds"].is_number() || doc["timeout_seconds"].get<double>() <= 0)
            malformed("timeout_seconds", "expected a positive number");
        bug.timeout_seconds = doc["timeout_seconds"].get<double>();
    }
    return bug;
}

std::string serialize_manifest(const BugInstance& bug) {
    ordered_json doc;
    doc["id"] = bug.id;
    doc["language"] = to_string(bug.language);
    doc["target_file"] = bug.target_file.generic_string();
    doc["function_name"] = bug.function_name;
    if (bug.doc_text) doc["doc_text"] = *bug.doc_text;
    if (!bug.failed_tests.empty()) {
        doc["failed_tests"] = ordered_json::array();
        for (const auto& t : bug.failed_tests) {
            doc["failed_tests"].push_back(
                ordered_json{{"name", t.name}, {"input", t.input_repr}, {"expected", t.expected_output_repr}});
        }
    }
    if (!bug.error_messages.empty()) doc["error_messages"] = bug.error_messages;
    doc["test_command"] = bug.test_command;
    if (bug.known_hunks) {
        doc["known_hunks"] = ordered_json::array();
        for (const auto& h : *bug.known_hunks) {
            doc["known_hunks"].push_back(ordered_json{{"start_line", h.start_line}, {"end_line", h.end_line}});
        }
    }
    if (bug.reference_fix) doc["reference_fix"] = *bug.reference_fix;
    if (bug.header_line) doc["header_line"] = *bug.header_line;
    if (bug.timeout_seconds) doc["timeout_seconds"] = *bug.timeout_seconds;
    return doc.dump(2) + "\n";
}

BugInstance load_bundle(const fs::path& dir) {
    fs::path manifest = dir / "bug.json";
    if (!fs::is_regular_file(manifest)) {
        throw Error(ErrorCode::ManifestMissing, "no bug.json in " + dir.string());
    }
    std::string text;
    {
        std::ifstream in(manifest, std::ios::binary);
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    BugInstance bug = parse_manifest(text, fs::absolute(dir).lexically_normal());
    if (bug.target_file.is_absolute() || !fs::is_regular_file(bug.target_path())) {
        throw Error(ErrorCode::SourceFileMissing, bug.target_file.generic_string() + " not found under " +
                                                      bug.source_root.string());
    }
    return bug;
}

FunctionSpan locate_bug_function(const BugInstance& bug, std::string_view source) {
    return locate_function(source, bug.language, bug.function_name, bug.header_line);
}

std::vector<Issue> validate_bundle(const BugInstance& bug) {
    std::vector<Issue> issues;
    auto report = [&](std::string message) { issues.push_back({Severity::error, std::move(message)}); };

    if (bug.id.empty()) report("id is empty");
    if (bug.function_name.empty()) report("function_name is empty");
    if (bug.test_command.empty()) report("test_command is empty");
    for (std::size_t i = 0; i < bug.failed_tests.size(); ++i) {
        if (bug.failed_tests[i].name.empty()) report("failed test " + std::to_string(i) + " has an empty name");
    }

    std::error_code ec;
    if (bug.target_file.empty() || !fs::is_regular_file(bug.target_path(), ec)) {
        report("target file " + bug.target_file.generic_string() + " does not exist under source root");
        return issues;
    }
    std::string source = read_file(bug.target_path());
    std::optional<FunctionSpan> span;
    try {
        span = locate_bug_function(bug, source);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::FunctionNotFound) {
            report("function not found: " + bug.function_name);
        } else {
            report(std::string("function span unresolved: ") + e.what());
        }
    }
    if (span && bug.known_hunks) {
        int first_line = line_of_offset(source, span->start_offset);
        int last_line = line_of_offset(source, span->end_offset - 1);
        for (std::size_t i = 0; i < bug.known_hunks->size(); ++i) {
            const HunkSpec& h = (*bug.known_hunks)[i];
            if (h.start_line > h.end_line || h.start_line < first_line || h.end_line > last_line) {
                report("hunk " + std::to_string(i) + " (lines " + std::to_string(h.start_line) + "-" +
                       std::to_string(h.end_line) + ") lies outside the function (lines " +
                       std::to_string(first_line) + "-" + std::to_string(last_line) + ")");
            }
        }
    }
    return issues;
}

std::vector<Issue> validate_corpus(const std::vector<BugInstance>& bugs) {
    std::vector<Issue> issues;
    std::set<std::string, std::less<>> seen;
    for (const auto& bug : bugs) {
        for (auto& issue : validate_bundle(bug)) {
            issue.message = bug.id + ": " + issue.message;
            issues.push_back(std::move(issue));
        }
        if (!seen.insert(bug.id).second) issues.push_back({Severity::error, "duplicate id " + bug.id});
    }
    return issues;
}

std::vector<fs::path> discover_bundles(const fs::path& corpus_dir) {
    std::vector<fs::path> bundles;
    std::error_code ec;
    if (!fs::is_directory(corpus_dir, ec)) return bundles;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "bug.json")) bundles.push_back(entry.path());
    }
    std::sort(bundles.begin(), bundles.end());
    return bundles;
}

}  // namespace d4c
