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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lensreview/diff.hpp"
#include "lensreview/finding.hpp"
#include "lensreview/http.hpp"

namespace lensreview {

enum class Era { pre_ai, post_ai };
enum class Visibility { internal, public_repo };

std::string_view to_string(Era e);
std::string_view to_string(Visibility v);

struct Comment {
    std::string author_handle;
    std::string body;  // byte-exact
    std::optional<LineRef> anchor;
    std::string created_at;  // ISO-8601
    bool is_pr_author = false;
};

struct PullRequestRecord {
    std::string repo;
    std::uint32_t number = 0;
    std::string language;
    Era era = Era::post_ai;
    Visibility visibility = Visibility::public_repo;
    DiffDocument diff;
    std::vector<Comment> comments;  // flattened, timestamp order

    PrKey key() const { return PrKey{repo, number}; }
};

enum class CommentOrigin { human, bot, author_ack };

std::string_view to_string(CommentOrigin o);

/// The seven automation accounts excluded from human ground truth.
const std::set<std::string>& default_bot_denylist();

inline constexpr std::size_t kAckMaxLength = 15;  // acks are strictly shorter

/// Unicode scalar values in `body` after trimming surrounding whitespace.
std::size_t trimmed_length(std::string_view body);

CommentOrigin classify_comment_origin(const Comment& c,
                                      const std::set<std::string>& bot_denylist = default_bot_denylist());

/// One "H-n" finding per human-origin comment, in comment order.
std::vector<Finding> extract_human_findings(const PullRequestRecord& pr,
                                            const std::set<std::string>& bot_denylist = default_bot_denylist());

// -- fixtures ---------------------------------------------------------------

/// Throws FixtureSchemaMismatch naming the offending field.
PullRequestRecord parse_fixture(const json& j);
PullRequestRecord load_fixture(const std::filesystem::path& path);
json fixture_to_json(const PullRequestRecord& pr);

// -- forge ------------------------------------------------------------------

struct ForgeOptions {
    std::string base_url = "https://api.github.com";
    std::string token;  // defaults to $LENSREVIEW_FORGE_TOKEN
    int max_attempts = 3;
    std::chrono::milliseconds max_backoff = std::chrono::seconds(60);
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
    // PRs merged (or opened, if unmerged) before this date are pre_ai.
    std::string pre_ai_before = "2024-01-01";
    int per_page = 100;
};

/// Reads pull requests, diffs and comments from a GitHub-compatible REST API.
class ForgeClient {
public:
    explicit ForgeClient(ForgeOptions opts, std::unique_ptr<HttpClient> http = nullptr);

    /// Throws NotFound, AuthFailure or RateLimited (after bounded retries).
    PullRequestRecord fetch(const std::string& repo, std::uint32_t number);

private:
    HttpResponse get(const std::string& path, const std::string& accept);
    json get_json(const std::string& path);
    std::vector<json> get_paginated(const std::string& path);

    ForgeOptions opts_;
    std::unique_ptr<HttpClient> http_;
};

enum class PrSourceKind { forge_api, fixture };

struct FetchOptions {
    std::optional<std::filesystem::path> fixture_path;
    // Searched for a fixture with a matching repo and number when no path is given.
    std::optional<std::filesystem::path> fixture_dir;
    ForgeClient* forge = nullptr;
};

PullRequestRecord fetch_pr(const std::string& repo, std::uint32_t number, PrSourceKind source,
                           const FetchOptions& opts);

}  // namespace lensreview
