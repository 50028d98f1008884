#include <algorithm>
#include <string>

#include "d4c/patch_engine.hpp"
#include "d4c/source_text.hpp"

namespace d4c {

std::vector<LineEdit> diff_lines(const std::vector<std::string_view>& a, const std::vector<std::string_view>& b) {
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    const auto m = static_cast<std::ptrdiff_t>(b.size());
    const std::ptrdiff_t max = n + m;
    const std::ptrdiff_t offset = max + 1;
    std::vector<std::ptrdiff_t> v(static_cast<std::size_t>(2 * max + 3), 0);
    std::vector<std::vector<std::ptrdiff_t>> trace;

    std::ptrdiff_t final_d = 0;
    for (std::ptrdiff_t d = 0; d <= max; ++d) {
        trace.push_back(v);
        bool done = false;
        for (std::ptrdiff_t k = -d; k <= d; k += 2) {
            std::ptrdiff_t x;
            if (k == -d || (k != d && v[static_cast<std::size_t>(offset + k - 1)] < v[static_cast<std::size_t>(offset + k + 1)])) {
                x = v[static_cast<std::size_t>(offset + k + 1)];
            } else {
                x = v[static_cast<std::size_t>(offset + k - 1)] + 1;
            }
            std::ptrdiff_t y = x - k;
            while (x < n && y < m && a[static_cast<std::size_t>(x)] == b[static_cast<std::size_t>(y)]) {
                ++x;
                ++y;
            }
            v[static_cast<std::size_t>(offset + k)] = x;
            if (x >= n && y >= m) {
                done = true;
                break;
            }
        }
        if (done) {
            final_d = d;
            break;
        }
    }

    // Walk the trace backwards, collecting edits in reverse.
    std::vector<LineEdit> edits;
    std::ptrdiff_t x = n;
    std::ptrdiff_t y = m;
    for (std::ptrdiff_t d = final_d; d >= 0; --d) {
        const auto& vd = trace[static_cast<std::size_t>(d)];
        std::ptrdiff_t k = x - y;
        std::ptrdiff_t prev_k;
        if (k == -d || (k != d && vd[static_cast<std::size_t>(offset + k - 1)] < vd[static_cast<std::size_t>(offset + k + 1)])) {
            prev_k = k + 1;
        } else {
            prev_k = k - 1;
        }
        std::ptrdiff_t prev_x = d == 0 ? 0 : vd[static_cast<std::size_t>(offset + prev_k)];
        std::ptrdiff_t prev_y = prev_x - prev_k;
        if (d == 0) {
            prev_x = 0;
            prev_y = 0;
        }
        while (x > prev_x && y > prev_y) {
            --x;
            --y;
            edits.push_back({EditOp::equal, static_cast<std::size_t>(x), static_cast<std::size_t>(y)});
        }
        if (d > 0) {
            if (x == prev_x) {
                --y;
                edits.push_back({EditOp::insert, static_cast<std::size_t>(x), static_cast<std::size_t>(y)});
            } else {
                --x;
                edits.push_back({EditOp::remove, static_cast<std::size_t>(x), static_cast<std::size_t>(y)});
            }
        }
    }
    std::reverse(edits.begin(), edits.end());
    return edits;
}

namespace {

std::string range_header(std::size_t start, std::size_t count) {
    // GNU convention: an empty range names the line before it; a count of 1 is implied.
    std::size_t first = count == 0 ? start : start + 1;
    std::string out = std::to_string(first);
    if (count != 1) out += "," + std::to_string(count);
    return out;
}

void append_line(std::string& out, char prefix, std::string_view line) {
    out.push_back(prefix);
    out.append(line);
    if (line.empty() || line.back() != '\n') out.append("\n\\ No newline at end of file\n");
}

}  // namespace

std::string unified_diff(std::string_view old_text, std::string_view new_text, std::string_view label_old,
                         std::string_view label_new, int context) {
    if (old_text == new_text) return {};
    const auto a = split_lines_keep_ends(old_text);
    const auto b = split_lines_keep_ends(new_text);
    const auto edits = diff_lines(a, b);
    const auto ctx = static_cast<std::size_t>(std::max(context, 0));

    // Group changed edits into hunks separated by more than 2*context equal lines.
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [first, last] indices into edits
    for (std::size_t i = 0; i < edits.size(); ++i) {
        if (edits[i].op == EditOp::equal) continue;
        if (!groups.empty()) {
            std::size_t gap = i - groups.back().second - 1;
            if (gap <= 2 * ctx) {
                groups.back().second = i;
                continue;
            }
        }
        groups.emplace_back(i, i);
    }
    if (groups.empty()) return {};

    std::string out;
    out += "--- " + std::string(label_old) + "\n";
    out += "+++ " + std::string(label_new) + "\n";
    for (const auto& [first, last] : groups) {
        std::size_t begin = first >= ctx ? first - ctx : 0;
        std::size_t end = std::min(edits.size() - 1, last + ctx);
        while (begin < first && edits[begin].op != EditOp::equal) ++begin;

        std::size_t old_start = 0;
        std::size_t new_start = 0;
        // The old/new positions where this hunk begins.
        const LineEdit& e0 = edits[begin];
        old_start = e0.old_index;
        new_start = e0.new_index;
        std::size_t old_count = 0;
        std::size_t new_count = 0;
        std::string body;
        for (std::size_t i = begin; i <= end; ++i) {
            const LineEdit& e = edits[i];
            switch (e.op) {
                case EditOp::equal:
                    append_line(body, ' ', a[e.old_index]);
                    ++old_count;
                    ++new_count;
                    break;
                case EditOp::remove:
                    append_line(body, '-', a[e.old_index]);
                    ++old_count;
                    break;
                case EditOp::insert:
                    append_line(body, '+', b[e.new_index]);
                    ++new_count;
                    break;
            }
        }
        out += "@@ -" + range_header(old_start, old_count) + " +" + range_header(new_start, new_count) + " @@\n";
        out += body;
    }
    return out;
}

}  // namespace d4c
