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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lensreview {

enum class Side { old_file, new_file };

std::string_view to_string(Side side);
std::optional<Side> side_from_string(std::string_view s);

/// A position in a diff. New-file numbering unless the anchor is on deleted code.
struct LineRef {
    std::string file_path;
    std::uint32_t line = 1;
    Side side = Side::new_file;

    /// Throws std::invalid_argument on an empty path, an embedded NUL, or line 0.
    static LineRef make(std::string file_path, std::uint32_t line, Side side = Side::new_file);

    friend bool operator==(const LineRef&, const LineRef&) = default;
};

enum class LineKind { context, added, removed };

struct DiffLine {
    LineKind kind = LineKind::context;
    std::string text;
    bool no_newline_at_end = false;

    friend bool operator==(const DiffLine&, const DiffLine&) = default;
};

struct Hunk {
    std::uint32_t old_start = 0;
    std::uint32_t old_count = 0;
    std::uint32_t new_start = 0;
    std::uint32_t new_count = 0;
    std::string section;  // text after the closing "@@", if any
    std::vector<DiffLine> lines;

    std::size_t added() const;
    std::size_t removed() const;

    friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct FilePatch {
    // Repo-relative, without the a/ b/ prefixes. A created or deleted file
    // carries its one real path on both sides.
    std::string old_path;
    std::string new_path;
    bool is_new = false;
    bool is_deleted = false;
    bool is_binary = false;
    // Extended git header lines ("index ...", "rename from ...", mode lines),
    // kept verbatim for serialization.
    std::vector<std::string> extended_headers;
    bool has_git_header = false;
    std::vector<Hunk> hunks;

    bool is_rename() const { return old_path != new_path; }
    const std::string& path() const { return new_path; }
    std::size_t added() const;
    std::size_t removed() const;

    friend bool operator==(const FilePatch&, const FilePatch&) = default;
};

struct DiffDocument {
    std::vector<FilePatch> files;
    std::size_t total_changed_lines = 0;
    // Input text exactly as given to parse_unified_diff; prompts embed this.
    std::string raw_text;

    bool has_file(std::string_view path) const;
    std::vector<std::string> file_paths() const;

    /// Structural equality (files and hunks); ignores raw_text.
    bool same_structure(const DiffDocument& other) const { return files == other.files; }
};

/// Throws MalformedDiff with the byte offset and file of the first inconsistency.
DiffDocument parse_unified_diff(std::string_view text);

/// Regenerates unified-diff text from the parsed structure.
std::string serialize(const DiffDocument& doc);

std::size_t changed_line_count(const DiffDocument& doc);

inline constexpr std::uint32_t kDefaultLineWindow = 10;

/// Same file and |a.line - b.line| <= window. Side is ignored.
bool within_window(const LineRef& a, const LineRef& b, std::uint32_t window = kDefaultLineWindow);

}  // namespace lensreview
