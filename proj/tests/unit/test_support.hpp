#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "d4c/bug_model.hpp"
#include "d4c/http_backend.hpp"

namespace d4c::testing {

inline std::filesystem::path source_dir() { return D4C_SOURCE_DIR; }
inline std::filesystem::path corpus_dir() { return source_dir() / "corpus" / "mini"; }
inline std::filesystem::path mock_script() { return corpus_dir() / "mock_script.json"; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("d4c-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// FNV-1a over every relative path and file body in the tree, in sorted order.
inline std::uint64_t tree_checksum(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[std::filesystem::relative(e.path(), root).generic_string()] = slurp(e.path());
    }
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    for (const auto& [name, body] : files) {
        mix(name);
        mix(body);
    }
    return h;
}

inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            out.push_back(text.substr(pos));
            break;
        }
        out.push_back(text.substr(pos, nl - pos + 1));
        pos = nl + 1;
    }
    return out;
}

/// Minimal unified-diff applier, written independently of the library's diff code.
/// Throws on any context mismatch.
inline std::string apply_unified_diff(const std::string& old_text, const std::string& diff) {
    if (diff.empty()) return old_text;
    std::vector<std::string> old_lines = lines_of(old_text);
    std::vector<std::string> diff_lines = lines_of(diff);
    std::vector<std::string> out;
    std::size_t cursor = 0;  // next old line (0-based) not yet copied
    std::size_t i = 0;
    while (i < diff_lines.size() && diff_lines[i].rfind("@@", 0) != 0) ++i;  // skip headers
    auto parse_start = [](const std::string& header, char sign) {
        std::size_t p = header.find(sign);
        std::size_t q = p + 1;
        long start = 0;
        while (q < header.size() && std::isdigit(static_cast<unsigned char>(header[q]))) start = start * 10 + (header[q++] - '0');
        long count = 1;
        if (header[q] == ',') {
            count = 0;
            ++q;
            while (q < header.size() && std::isdigit(static_cast<unsigned char>(header[q]))) count = count * 10 + (header[q++] - '0');
        }
        return std::pair<long, long>{start, count};
    };
    while (i < diff_lines.size()) {
        const std::string& header = diff_lines[i];
        if (header.rfind("@@ ", 0) != 0) throw std::runtime_error("expected hunk header: " + header);
        auto [old_start, old_count] = parse_start(header, '-');
        std::size_t first_old = old_count == 0 ? static_cast<std::size_t>(old_start) : static_cast<std::size_t>(old_start - 1);
        if (first_old < cursor || first_old > old_lines.size()) throw std::runtime_error("hunk out of order");
        while (cursor < first_old) out.push_back(old_lines[cursor++]);
        ++i;
        char last_tag = 0;
        while (i < diff_lines.size() && diff_lines[i].rfind("@@ ", 0) != 0) {
            const std::string& l = diff_lines[i];
            if (l.rfind("\\ No newline at end of file", 0) == 0) {
                if (last_tag == 0) throw std::runtime_error("stray no-newline marker");
                if (last_tag != '-' && !out.empty() && !out.back().empty() && out.back().back() == '\n') {
                    out.back().pop_back();
                }
                ++i;
                continue;
            }
            char tag = l.empty() ? '?' : l[0];
            std::string body = l.substr(1);
            if (body.empty() || body.back() != '\n') body.push_back('\n');
            if (tag == ' ' || tag == '-') {
                if (cursor >= old_lines.size()) throw std::runtime_error("context past end");
                std::string expect = old_lines[cursor];
                if (expect.empty() || expect.back() != '\n') expect.push_back('\n');
                if (expect != body) throw std::runtime_error("context mismatch at old line " + std::to_string(cursor + 1));
                if (tag == ' ') out.push_back(body);
                ++cursor;
            } else if (tag == '+') {
                out.push_back(body);
            } else {
                throw std::runtime_error("bad diff line: " + l);
            }
            last_tag = tag;
            ++i;
        }
    }
    while (cursor < old_lines.size()) out.push_back(old_lines[cursor++]);
    std::string result;
    for (const auto& l : out) result += l;
    return result;
}

/// Transport that records calls and fails the test run if anything touches the network.
class ForbiddenTransport final : public HttpTransport {
public:
    mutable std::atomic<int> calls{0};
    HttpResponse post_json(const HttpRequest&) const override {
        ++calls;
        return {0, {}, "network access forbidden in this test"};
    }
};

/// Transport replaying a fixed list of responses, recording requests.
class ScriptedTransport final : public HttpTransport {
public:
    explicit ScriptedTransport(std::vector<HttpResponse> responses) : responses_(std::move(responses)) {}
    HttpResponse post_json(const HttpRequest& request) const override {
        requests.push_back(request);
        if (next_ >= responses_.size()) return {0, {}, "exhausted"};
        return responses_[next_++];
    }
    mutable std::vector<HttpRequest> requests;

private:
    std::vector<HttpResponse> responses_;
    mutable std::size_t next_ = 0;
};

inline std::vector<BugInstance> load_mini_corpus() {
    std::vector<BugInstance> bugs;
    for (const auto& dir : discover_bundles(corpus_dir())) bugs.push_back(load_bundle(dir));
    return bugs;
}

}  // namespace d4c::testing
