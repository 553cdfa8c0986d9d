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

#include "lensreview/ingest.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "lensreview/error.hpp"

namespace lensreview {

std::string_view to_string(Era e) { return e == Era::pre_ai ? "pre_ai" : "post_ai"; }
std::string_view to_string(Visibility v) { return v == Visibility::internal ? "internal" : "public"; }

std::string_view to_string(CommentOrigin o) {
    switch (o) {
        case CommentOrigin::human: return "human";
        case CommentOrigin::bot: return "bot";
        case CommentOrigin::author_ack: return "author_ack";
    }
    return "human";
}

const std::set<std::string>& default_bot_denylist() {
    static const std::set<std::string> handles = {
        "dx-prizm[bot]",          "sfci-github-app", "k8s-ci-robot", "elasticsearchmachine",
        "github-actions",         "gemini-code-assist[bot]", "Copilot",
    };
    return handles;
}

std::size_t trimmed_length(std::string_view body) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (!body.empty() && is_space(body.front())) body.remove_prefix(1);
    while (!body.empty() && is_space(body.back())) body.remove_suffix(1);
    return static_cast<std::size_t>(std::count_if(body.begin(), body.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

CommentOrigin classify_comment_origin(const Comment& c, const std::set<std::string>& bot_denylist) {
    if (bot_denylist.count(c.author_handle)) return CommentOrigin::bot;
    if (c.is_pr_author && trimmed_length(c.body) < kAckMaxLength) return CommentOrigin::author_ack;
    return CommentOrigin::human;
}

std::vector<Finding> extract_human_findings(const PullRequestRecord& pr, const std::set<std::string>& bot_denylist) {
    std::vector<Finding> out;
    for (const auto& c : pr.comments) {
        if (classify_comment_origin(c, bot_denylist) != CommentOrigin::human) continue;
        Finding f;
        f.id = "H-" + std::to_string(out.size() + 1);
        f.source = Source::human;
        f.location = c.anchor;
        f.claim = c.body;
        f.specific = c.anchor.has_value();
        out.push_back(std::move(f));
    }
    return out;
}

// -- fixtures ---------------------------------------------------------------

namespace {

template <typename T>
T field(const json& j, const char* name, const std::string& where) {
    if (!j.contains(name)) throw FixtureSchemaMismatch(where + ": missing field '" + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw FixtureSchemaMismatch(where + ": field '" + name + "' has the wrong type");
    }
}

bool nullish(const json& j, const char* name) { return !j.contains(name) || j.at(name).is_null(); }

void sort_by_time(std::vector<Comment>& comments) {
    std::stable_sort(comments.begin(), comments.end(),
                     [](const Comment& a, const Comment& b) { return a.created_at < b.created_at; });
}

}  // namespace

PullRequestRecord parse_fixture(const json& j) {
    if (!j.is_object()) throw FixtureSchemaMismatch("fixture: top level must be an object");
    PullRequestRecord pr;
    pr.repo = field<std::string>(j, "repo", "fixture");
    pr.number = field<std::uint32_t>(j, "number", "fixture");
    if (pr.number == 0) throw FixtureSchemaMismatch("fixture: number must be positive");
    pr.language = field<std::string>(j, "language", "fixture");
    auto era = field<std::string>(j, "era", "fixture");
    if (era == "pre_ai") {
        pr.era = Era::pre_ai;
    } else if (era == "post_ai") {
        pr.era = Era::post_ai;
    } else {
        throw FixtureSchemaMismatch("fixture: era must be pre_ai or post_ai");
    }
    auto vis = field<std::string>(j, "visibility", "fixture");
    if (vis == "internal") {
        pr.visibility = Visibility::internal;
    } else if (vis == "public") {
        pr.visibility = Visibility::public_repo;
    } else {
        throw FixtureSchemaMismatch("fixture: visibility must be internal or public");
    }
    pr.diff = parse_unified_diff(field<std::string>(j, "diff", "fixture"));
    auto comments = field<json>(j, "comments", "fixture");
    if (!comments.is_array()) throw FixtureSchemaMismatch("fixture: comments must be an array");
    std::size_t idx = 0;
    for (const auto& jc : comments) {
        std::string where = "fixture: comments[" + std::to_string(idx++) + "]";
        Comment c;
        c.author_handle = field<std::string>(jc, "author", where);
        c.body = field<std::string>(jc, "body", where);
        c.is_pr_author = field<bool>(jc, "is_pr_author", where);
        c.created_at = field<std::string>(jc, "created_at", where);
        if (!nullish(jc, "line")) {
            if (nullish(jc, "path")) throw FixtureSchemaMismatch(where + ": line given without path");
            auto side = Side::new_file;
            if (!nullish(jc, "side")) {
                auto s = side_from_string(field<std::string>(jc, "side", where));
                if (!s) throw FixtureSchemaMismatch(where + ": side must be old or new");
                side = *s;
            }
            try {
                c.anchor = LineRef::make(field<std::string>(jc, "path", where), field<std::uint32_t>(jc, "line", where),
                                         side);
            } catch (const std::invalid_argument& e) {
                throw FixtureSchemaMismatch(where + ": " + e.what());
            }
        }
        pr.comments.push_back(std::move(c));
    }
    sort_by_time(pr.comments);
    return pr;
}

PullRequestRecord load_fixture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("fixture not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw FixtureSchemaMismatch("fixture " + path.string() + " is not valid JSON");
    return parse_fixture(j);
}

json fixture_to_json(const PullRequestRecord& pr) {
    json comments = json::array();
    for (const auto& c : pr.comments) {
        comments.push_back({{"author", c.author_handle},
                            {"body", c.body},
                            {"is_pr_author", c.is_pr_author},
                            {"path", c.anchor ? json(c.anchor->file_path) : json(nullptr)},
                            {"line", c.anchor ? json(c.anchor->line) : json(nullptr)},
                            {"side", c.anchor ? json(to_string(c.anchor->side)) : json(nullptr)},
                            {"created_at", c.created_at}});
    }
    return {{"repo", pr.repo},
            {"number", pr.number},
            {"language", pr.language},
            {"era", to_string(pr.era)},
            {"visibility", to_string(pr.visibility)},
            {"diff", pr.diff.raw_text},
            {"comments", comments}};
}

// -- forge ------------------------------------------------------------------

ForgeClient::ForgeClient(ForgeOptions opts, std::unique_ptr<HttpClient> http)
    : opts_(std::move(opts)), http_(std::move(http)) {
    if (opts_.token.empty()) {
        if (const char* t = std::getenv("LENSREVIEW_FORGE_TOKEN")) opts_.token = t;
    }
    if (!opts_.sleep) opts_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    if (!http_) http_ = make_http_client(opts_.base_url);
    if (opts_.max_attempts < 1) opts_.max_attempts = 1;
}

namespace {

int retry_after_seconds(const HttpResponse& r) {
    auto ra = r.header("retry-after");
    if (!ra.empty()) return std::max(0, std::atoi(ra.c_str()));
    auto reset = r.header("x-ratelimit-reset");
    if (!reset.empty()) {
        auto delta = std::atoll(reset.c_str()) - static_cast<long long>(std::time(nullptr));
        return static_cast<int>(std::max(0LL, delta));
    }
    return 60;
}

}  // namespace

HttpResponse ForgeClient::get(const std::string& path, const std::string& accept) {
    HttpHeaders headers = {{"Accept", accept}, {"User-Agent", "lensreview"}, {"X-GitHub-Api-Version", "2022-11-28"}};
    if (!opts_.token.empty()) headers.emplace_back("Authorization", "Bearer " + opts_.token);
    for (int attempt = 1;; ++attempt) {
        std::chrono::milliseconds wait{0};
        try {
            auto r = http_->get(path, headers);
            if (r.status >= 200 && r.status < 300) return r;
            if (r.status == 401) throw AuthFailure("forge rejected credentials for " + path);
            if (r.status == 404) throw NotFound("forge: " + path + " not found");
            bool limited = r.status == 429 || (r.status == 403 && (r.header("x-ratelimit-remaining") == "0" ||
                                                                   !r.header("retry-after").empty()));
            if (r.status == 403 && !limited) throw AuthFailure("forge denied access to " + path);
            if (!limited) throw Error("forge: HTTP " + std::to_string(r.status) + " for " + path);
            int after = retry_after_seconds(r);
            if (attempt >= opts_.max_attempts) {
                throw RateLimited("forge rate limit exceeded for " + path, after);
            }
            wait = std::chrono::seconds(after);
        } catch (const TransportError& e) {
            if (attempt >= opts_.max_attempts) throw Error(std::string("forge unreachable: ") + e.what());
        }
        auto backoff = std::chrono::milliseconds(500LL << std::min(attempt - 1, 10));
        opts_.sleep(std::min(std::max(wait, backoff), opts_.max_backoff));
    }
}

json ForgeClient::get_json(const std::string& path) {
    auto j = json::parse(get(path, "application/vnd.github+json").body, nullptr, false);
    if (j.is_discarded()) throw Error("forge returned invalid JSON for " + path);
    return j;
}

std::vector<json> ForgeClient::get_paginated(const std::string& path) {
    std::vector<json> out;
    for (int page = 1;; ++page) {
        auto j = get_json(path + "?per_page=" + std::to_string(opts_.per_page) + "&page=" + std::to_string(page));
        if (!j.is_array()) throw Error("forge: expected an array from " + path);
        for (auto& item : j) out.push_back(std::move(item));
        if (static_cast<int>(j.size()) < opts_.per_page) break;
    }
    return out;
}

PullRequestRecord ForgeClient::fetch(const std::string& repo, std::uint32_t number) {
    auto base = "/repos/" + repo + "/pulls/" + std::to_string(number);
    auto meta = get_json(base);
    auto author = meta.at("user").at("login").get<std::string>();

    PullRequestRecord pr;
    pr.repo = repo;
    pr.number = number;
    const auto& base_repo = meta.at("base").at("repo");
    pr.language = base_repo.value("language", json()).is_string() ? base_repo["language"].get<std::string>() : "";
    pr.visibility = base_repo.value("private", false) ? Visibility::internal : Visibility::public_repo;
    auto when = meta.value("merged_at", json()).is_string() ? meta["merged_at"].get<std::string>()
                                                            : meta.value("created_at", std::string());
    pr.era = when < opts_.pre_ai_before ? Era::pre_ai : Era::post_ai;
    pr.diff = parse_unified_diff(get(base, "application/vnd.github.v3.diff").body);

    for (const auto& rc : get_paginated(base + "/comments")) {
        Comment c;
        c.author_handle = rc.at("user").at("login").get<std::string>();
        c.body = rc.value("body", std::string());
        c.created_at = rc.value("created_at", std::string());
        c.is_pr_author = c.author_handle == author;
        auto line = rc.value("line", json());
        if (!line.is_number()) line = rc.value("original_line", json());
        if (line.is_number() && rc.value("path", json()).is_string() && line.get<long long>() >= 1) {
            auto side = rc.value("side", std::string("RIGHT")) == "LEFT" ? Side::old_file : Side::new_file;
            c.anchor = LineRef::make(rc["path"].get<std::string>(), line.get<std::uint32_t>(), side);
        }
        pr.comments.push_back(std::move(c));
    }
    for (const auto& ic : get_paginated("/repos/" + repo + "/issues/" + std::to_string(number) + "/comments")) {
        Comment c;
        c.author_handle = ic.at("user").at("login").get<std::string>();
        c.body = ic.value("body", std::string());
        c.created_at = ic.value("created_at", std::string());
        c.is_pr_author = c.author_handle == author;
        pr.comments.push_back(std::move(c));
    }
    sort_by_time(pr.comments);
    return pr;
}

PullRequestRecord fetch_pr(const std::string& repo, std::uint32_t number, PrSourceKind source,
                           const FetchOptions& opts) {
    if (source == PrSourceKind::forge_api) {
        if (!opts.forge) throw ConfigError("forge source requested without a configured forge client");
        return opts.forge->fetch(repo, number);
    }
    auto check = [&](PullRequestRecord pr, const std::filesystem::path& p) {
        if (pr.repo != repo || pr.number != number) {
            throw FixtureSchemaMismatch("fixture " + p.string() + " holds " + pr.key().str() + ", expected " + repo +
                                        "#" + std::to_string(number));
        }
        return pr;
    };
    if (opts.fixture_path) return check(load_fixture(*opts.fixture_path), *opts.fixture_path);
    if (opts.fixture_dir) {
        std::vector<std::filesystem::path> candidates;
        for (const auto& entry : std::filesystem::directory_iterator(*opts.fixture_dir)) {
            if (entry.path().extension() == ".json") candidates.push_back(entry.path());
        }
        std::sort(candidates.begin(), candidates.end());
        for (const auto& p : candidates) {
            std::ifstream in(p);
            auto j = json::parse(in, nullptr, false);
            if (j.is_object() && j.value("repo", std::string()) == repo && j.value("number", 0U) == number) {
                return check(parse_fixture(j), p);
            }
        }
    }
    throw NotFound("no fixture for " + repo + "#" + std::to_string(number));
}

}  // namespace lensreview
