// Copyright 2026 The lensreview Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lensreview/diff.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "lensreview/error.hpp"

namespace lensreview {

std::string_view to_string(Side side) { return side == Side::old_file ? "old" : "new"; }

std::optional<Side> side_from_string(std::string_view s) {
    if (s == "old") return Side::old_file;
    if (s == "new") return Side::new_file;
    return std::nullopt;
}

LineRef LineRef::make(std::string file_path, std::uint32_t line, Side side) {
    if (file_path.empty()) throw std::invalid_argument("LineRef: empty file path");
    if (file_path.find('\0') != std::string::npos) throw std::invalid_argument("LineRef: NUL in file path");
    if (line < 1) throw std::invalid_argument("LineRef: line must be >= 1");
    return LineRef{std::move(file_path), line, side};
}

std::size_t Hunk::added() const {
    return static_cast<std::size_t>(
        std::count_if(lines.begin(), lines.end(), [](const DiffLine& l) { return l.kind == LineKind::added; }));
}

std::size_t Hunk::removed() const {
    return static_cast<std::size_t>(
        std::count_if(lines.begin(), lines.end(), [](const DiffLine& l) { return l.kind == LineKind::removed; }));
}

std::size_t FilePatch::added() const {
    std::size_t n = 0;
    for (const auto& h : hunks) n += h.added();
    return n;
}

std::size_t FilePatch::removed() const {
    std::size_t n = 0;
    for (const auto& h : hunks) n += h.removed();
    return n;
}

bool DiffDocument::has_file(std::string_view path) const {
    return std::any_of(files.begin(), files.end(),
                       [&](const FilePatch& f) { return f.new_path == path || f.old_path == path; });
}

std::vector<std::string> DiffDocument::file_paths() const {
    std::vector<std::string> out;
    for (const auto& f : files) {
        out.push_back(f.new_path);
        if (f.old_path != f.new_path) out.push_back(f.old_path);
    }
    return out;
}

namespace {

struct Line {
    std::string_view text;  // without the trailing newline
    std::size_t offset;
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto end = nl == std::string_view::npos ? text.size() : nl;
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back({line, pos});
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
    }
    return lines;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// "a/foo.c\t2020-01-01" -> "foo.c"; "/dev/null" stays as is.
std::string strip_path(std::string_view raw) {
    auto tab = raw.find('\t');
    if (tab != std::string_view::npos) raw = raw.substr(0, tab);
    while (!raw.empty() && raw.back() == ' ') raw.remove_suffix(1);
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') raw = raw.substr(1, raw.size() - 2);
    if (raw == "/dev/null") return std::string(raw);
    if (starts_with(raw, "a/") || starts_with(raw, "b/")) raw.remove_prefix(2);
    return std::string(raw);
}

bool parse_uint(std::string_view s, std::uint32_t& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

// "-12,3" or "-12" (count defaults to 1)
bool parse_range(std::string_view s, char sign, std::uint32_t& start, std::uint32_t& count) {
    if (s.empty() || s.front() != sign) return false;
    s.remove_prefix(1);
    auto comma = s.find(',');
    if (comma == std::string_view::npos) {
        count = 1;
        return parse_uint(s, start);
    }
    return parse_uint(s.substr(0, comma), start) && parse_uint(s.substr(comma + 1), count);
}

bool parse_hunk_header(std::string_view line, Hunk& hunk) {
    if (!starts_with(line, "@@ ")) return false;
    auto close = line.find(" @@", 3);
    if (close == std::string_view::npos) return false;
    auto ranges = line.substr(3, close - 3);
    auto space = ranges.find(' ');
    if (space == std::string_view::npos) return false;
    if (!parse_range(ranges.substr(0, space), '-', hunk.old_start, hunk.old_count)) return false;
    if (!parse_range(ranges.substr(space + 1), '+', hunk.new_start, hunk.new_count)) return false;
    auto rest = line.substr(close + 3);
    if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    hunk.section = std::string(rest);
    return true;
}

// "diff --git a/x b/y": split at " b/" searching from the right half.
void paths_from_git_header(std::string_view line, FilePatch& fp) {
    auto rest = line.substr(std::string_view("diff --git ").size());
    auto mid = rest.find(" b/");
    if (mid == std::string_view::npos) return;
    fp.old_path = strip_path(rest.substr(0, mid));
    fp.new_path = strip_path(rest.substr(mid + 1));
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text), lines_(split_lines(text)) {}

    DiffDocument run() {
        DiffDocument doc;
        doc.raw_text = std::string(text_);
        while (i_ < lines_.size()) {
            auto l = lines_[i_].text;
            if (starts_with(l, "diff --git ")) {
                doc.files.push_back(parse_git_file());
            } else if (starts_with(l, "--- ") && i_ + 1 < lines_.size() && starts_with(lines_[i_ + 1].text, "+++ ")) {
                FilePatch fp;
                parse_file_headers(fp);
                parse_hunks(fp);
                finish(fp);
                doc.files.push_back(std::move(fp));
            } else if (starts_with(l, "@@ ")) {
                fail("hunk without file header", "");
            } else {
                ++i_;  // preamble / commit message text
            }
        }
        doc.total_changed_lines = changed_line_count(doc);
        return doc;
    }

private:
    [[noreturn]] void fail(const std::string& what, const std::string& file) const {
        auto offset = i_ < lines_.size() ? lines_[i_].offset : text_.size();
        throw MalformedDiff(what, offset, file);
    }

    FilePatch parse_git_file() {
        FilePatch fp;
        fp.has_git_header = true;
        paths_from_git_header(lines_[i_].text, fp);
        ++i_;
        while (i_ < lines_.size()) {
            auto l = lines_[i_].text;
            if (starts_with(l, "diff --git ") || starts_with(l, "@@ ")) break;
            if (starts_with(l, "--- ") && i_ + 1 < lines_.size() && starts_with(lines_[i_ + 1].text, "+++ ")) {
                parse_file_headers(fp);
                break;
            }
            if (starts_with(l, "Binary files ") || l == "GIT binary patch") {
                fp.is_binary = true;
                fp.extended_headers.emplace_back(l);
                ++i_;
                if (l == "GIT binary patch") skip_binary_payload(fp);
                continue;
            }
            if (starts_with(l, "rename from ") || starts_with(l, "copy from ")) {
                fp.old_path = std::string(l.substr(l.find(" from ") + 6));
            } else if (starts_with(l, "rename to ") || starts_with(l, "copy to ")) {
                fp.new_path = std::string(l.substr(l.find(" to ") + 4));
            } else if (starts_with(l, "new file mode")) {
                fp.is_new = true;
            } else if (starts_with(l, "deleted file mode")) {
                fp.is_deleted = true;
            }
            fp.extended_headers.emplace_back(l);
            ++i_;
        }
        parse_hunks(fp);
        finish(fp);
        return fp;
    }

    void skip_binary_payload(FilePatch& fp) {
        while (i_ < lines_.size() && !starts_with(lines_[i_].text, "diff --git ")) {
            fp.extended_headers.emplace_back(lines_[i_].text);
            ++i_;
        }
    }

    void parse_file_headers(FilePatch& fp) {
        auto old_raw = strip_path(lines_[i_].text.substr(4));
        auto new_raw = strip_path(lines_[i_ + 1].text.substr(4));
        i_ += 2;
        if (old_raw == "/dev/null") {
            fp.is_new = true;
            old_raw = new_raw;
        }
        if (new_raw == "/dev/null") {
            fp.is_deleted = true;
            new_raw = old_raw;
        }
        if (old_raw.empty() || new_raw.empty() || old_raw == "/dev/null") fail("empty file path in header", "");
        fp.old_path = std::move(old_raw);
        fp.new_path = std::move(new_raw);
    }

    void parse_hunks(FilePatch& fp) {
        while (i_ < lines_.size() && starts_with(lines_[i_].text, "@@ ")) {
            Hunk hunk;
            if (!parse_hunk_header(lines_[i_].text, hunk)) fail("bad hunk header", fp.new_path);
            ++i_;
            std::uint32_t old_left = hunk.old_count;
            std::uint32_t new_left = hunk.new_count;
            while (old_left > 0 || new_left > 0) {
                if (i_ >= lines_.size()) fail("truncated hunk body", fp.new_path);
                auto l = lines_[i_].text;
                DiffLine dl;
                char tag = l.empty() ? ' ' : l.front();
                dl.text = l.empty() ? std::string() : std::string(l.substr(1));
                if (tag == ' ') {
                    if (old_left == 0 || new_left == 0) fail("hunk body longer than its header", fp.new_path);
                    dl.kind = LineKind::context;
                    --old_left;
                    --new_left;
                } else if (tag == '-') {
                    if (old_left == 0) fail("hunk body longer than its header", fp.new_path);
                    dl.kind = LineKind::removed;
                    --old_left;
                } else if (tag == '+') {
                    if (new_left == 0) fail("hunk body longer than its header", fp.new_path);
                    dl.kind = LineKind::added;
                    --new_left;
                } else if (tag == '\\') {
                    if (hunk.lines.empty()) fail("no-newline marker before any line", fp.new_path);
                    hunk.lines.back().no_newline_at_end = true;
                    ++i_;
                    continue;
                } else {
                    fail("truncated hunk body", fp.new_path);
                }
                hunk.lines.push_back(std::move(dl));
                ++i_;
            }
            if (i_ < lines_.size() && starts_with(lines_[i_].text, "\\")) {
                if (!hunk.lines.empty()) hunk.lines.back().no_newline_at_end = true;
                ++i_;
            }
            fp.hunks.push_back(std::move(hunk));
        }
        // A body line directly after a complete hunk means the header undercounted.
        if (!fp.hunks.empty() && i_ < lines_.size()) {
            auto l = lines_[i_].text;
            if (!l.empty() && (l.front() == '+' || l.front() == '-') && !starts_with(l, "--- ") &&
                !starts_with(l, "+++ ") && l != "-- " && l != "--") {
                fail("hunk body longer than its header", fp.new_path);
            }
        }
    }

    static void finish(FilePatch& fp) {
        if (fp.old_path.empty()) fp.old_path = fp.new_path;
        if (fp.new_path.empty()) fp.new_path = fp.old_path;
    }

    std::string_view text_;
    std::vector<Line> lines_;
    std::size_t i_ = 0;
};

}  // namespace

DiffDocument parse_unified_diff(std::string_view text) { return Parser(text).run(); }

std::string serialize(const DiffDocument& doc) {
    std::string out;
    for (const auto& f : doc.files) {
        if (f.has_git_header) out += "diff --git a/" + f.old_path + " b/" + f.new_path + "\n";
        for (const auto& h : f.extended_headers) out += h + "\n";
        if (f.is_binary) continue;
        if (!f.hunks.empty() || !f.has_git_header) {
            out += "--- " + (f.is_new ? std::string("/dev/null") : "a/" + f.old_path) + "\n";
            out += "+++ " + (f.is_deleted ? std::string("/dev/null") : "b/" + f.new_path) + "\n";
        }
        for (const auto& h : f.hunks) {
            out += "@@ -" + std::to_string(h.old_start) + "," + std::to_string(h.old_count) + " +" +
                   std::to_string(h.new_start) + "," + std::to_string(h.new_count) + " @@";
            if (!h.section.empty()) out += " " + h.section;
            out += "\n";
            for (const auto& l : h.lines) {
                out += l.kind == LineKind::added ? '+' : l.kind == LineKind::removed ? '-' : ' ';
                out += l.text + "\n";
                if (l.no_newline_at_end) out += "\\ No newline at end of file\n";
            }
        }
    }
    return out;
}

std::size_t changed_line_count(const DiffDocument& doc) {
    std::size_t n = 0;
    for (const auto& f : doc.files) {
        if (f.is_binary) continue;
        n += f.added() + f.removed();
    }
    return n;
}

bool within_window(const LineRef& a, const LineRef& b, std::uint32_t window) {
    if (window < 1) throw std::invalid_argument("within_window: window must be >= 1");
    if (a.file_path != b.file_path) return false;
    auto delta = a.line > b.line ? a.line - b.line : b.line - a.line;
    return delta <= window;
}

}  // namespace lensreview
