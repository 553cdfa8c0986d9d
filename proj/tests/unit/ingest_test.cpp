#include <gtest/gtest.h>

#include <random>

#include "lensreview/error.hpp"
#include "lensreview/ingest.hpp"
#include "test_support.hpp"

using namespace lensreview;
using testing_support::LocalServer;
using testing_support::TempDir;

namespace {

Comment comment(std::string handle, std::string body, bool author = false) {
    Comment c;
    c.author_handle = std::move(handle);
    c.body = std::move(body);
    c.is_pr_author = author;
    return c;
}

json minimal_fixture() {
    return {{"repo", "acme/widgets"},
            {"number", 7},
            {"language", "Go"},
            {"era", "post_ai"},
            {"visibility", "public"},
            {"diff", "--- a/main.go\n+++ b/main.go\n@@ -1,1 +1,1 @@\n-a\n+b\n"},
            {"comments",
             json::array({{{"author", "alice"},
                           {"body", "This leaks the handle."},
                           {"is_pr_author", false},
                           {"path", "main.go"},
                           {"line", 1},
                           {"side", "new"},
                           {"created_at", "2025-02-01T10:00:00Z"}},
                          {{"author", "bob"},
                           {"body", "General remark"},
                           {"is_pr_author", false},
                           {"path", nullptr},
                           {"line", nullptr},
                           {"side", nullptr},
                           {"created_at", "2025-01-01T10:00:00Z"}}})}};
}

}  // namespace

TEST(CommentOriginTest, SevenBotHandles) {
    for (const auto* h : {"dx-prizm[bot]", "sfci-github-app", "k8s-ci-robot", "elasticsearchmachine", "github-actions",
                          "gemini-code-assist[bot]", "Copilot"}) {
        EXPECT_EQ(classify_comment_origin(comment(h, "A long and substantive remark about the change.")),
                  CommentOrigin::bot)
            << h;
        EXPECT_EQ(classify_comment_origin(comment(h, "ok", true)), CommentOrigin::bot) << h;
    }
    EXPECT_EQ(default_bot_denylist().size(), 7u);
    EXPECT_EQ(classify_comment_origin(comment("copilot", "lowercase is a different handle here")),
              CommentOrigin::human);
}

TEST(CommentOriginTest, AckThresholdIsStrictlyBelowFifteen) {
    EXPECT_EQ(classify_comment_origin(comment("me", std::string(14, 'x'), true)), CommentOrigin::author_ack);
    EXPECT_EQ(classify_comment_origin(comment("me", std::string(15, 'x'), true)), CommentOrigin::human);
    EXPECT_EQ(classify_comment_origin(comment("me", "   Done.  \n", true)), CommentOrigin::author_ack);
    EXPECT_EQ(classify_comment_origin(comment("me", "Done.", false)), CommentOrigin::human);
}

TEST(CommentOriginTest, LengthCountsScalarValuesNotBytes) {
    // 14 two-byte characters: 28 bytes, 14 scalar values.
    std::string body;
    for (int i = 0; i < 14; ++i) body += "\xC3\xA9";
    EXPECT_EQ(trimmed_length(body), 14u);
    EXPECT_EQ(classify_comment_origin(comment("me", body, true)), CommentOrigin::author_ack);
    EXPECT_EQ(trimmed_length(" \t\r\n"), 0u);
}

TEST(CommentOriginTest, CustomDenylist) {
    std::set<std::string> deny = {"renovate"};
    EXPECT_EQ(classify_comment_origin(comment("renovate", "bump"), deny), CommentOrigin::bot);
    EXPECT_EQ(classify_comment_origin(comment("Copilot", "a long enough comment body"), deny), CommentOrigin::human);
}

TEST(HumanFindings, FiltersBotsAndAcksAndNumbers) {
    PullRequestRecord pr;
    pr.repo = "r";
    pr.number = 1;
    auto anchored = comment("alice", "Off by one in the loop bound.");
    anchored.anchor = LineRef::make("a.c", 12);
    pr.comments = {comment("k8s-ci-robot", "/retest"), anchored, comment("me", "thanks!", true),
                   comment("carol", "Overall the approach looks fine to me.")};
    auto h = extract_human_findings(pr);
    ASSERT_EQ(h.size(), 2u);
    EXPECT_EQ(h[0].id, "H-1");
    EXPECT_EQ(h[0].source, Source::human);
    EXPECT_TRUE(h[0].specific);
    EXPECT_EQ(h[0].location->line, 12u);
    EXPECT_EQ(h[1].id, "H-2");
    EXPECT_FALSE(h[1].location.has_value());
    EXPECT_FALSE(h[1].specific);
}

TEST(Fixture, ParseSortsByTimeAndRoundTrips) {
    auto pr = parse_fixture(minimal_fixture());
    EXPECT_EQ(pr.key().str(), "acme/widgets#7");
    EXPECT_EQ(pr.visibility, Visibility::public_repo);
    ASSERT_EQ(pr.comments.size(), 2u);
    EXPECT_EQ(pr.comments[0].author_handle, "bob");
    ASSERT_TRUE(pr.comments[1].anchor.has_value());
    auto again = parse_fixture(fixture_to_json(pr));
    EXPECT_EQ(again.comments.size(), 2u);
    EXPECT_EQ(again.comments[1].body, pr.comments[1].body);
    EXPECT_TRUE(again.diff.same_structure(pr.diff));
}

TEST(Fixture, SchemaViolations) {
    auto bad = minimal_fixture();
    bad.erase("language");
    EXPECT_THROW(parse_fixture(bad), FixtureSchemaMismatch);
    bad = minimal_fixture();
    bad["era"] = "modern";
    EXPECT_THROW(parse_fixture(bad), FixtureSchemaMismatch);
    bad = minimal_fixture();
    bad["visibility"] = "secret";
    EXPECT_THROW(parse_fixture(bad), FixtureSchemaMismatch);
    bad = minimal_fixture();
    bad["comments"][0]["path"] = nullptr;
    EXPECT_THROW(parse_fixture(bad), FixtureSchemaMismatch);
    bad = minimal_fixture();
    bad["comments"][0]["side"] = "middle";
    EXPECT_THROW(parse_fixture(bad), FixtureSchemaMismatch);
    bad = minimal_fixture();
    bad["number"] = "seven";
    EXPECT_THROW(parse_fixture(bad), FixtureSchemaMismatch);
    EXPECT_THROW(parse_fixture(json::array()), FixtureSchemaMismatch);
}

TEST(Fixture, FetchByPathAndDirectory) {
    TempDir dir;
    testing_support::spit(dir / "a.json", minimal_fixture().dump());
    FetchOptions by_path;
    by_path.fixture_path = dir / "a.json";
    EXPECT_EQ(fetch_pr("acme/widgets", 7, PrSourceKind::fixture, by_path).number, 7u);
    EXPECT_THROW(fetch_pr("acme/widgets", 8, PrSourceKind::fixture, by_path), FixtureSchemaMismatch);

    FetchOptions by_dir;
    by_dir.fixture_dir = dir.path();
    EXPECT_EQ(fetch_pr("acme/widgets", 7, PrSourceKind::fixture, by_dir).repo, "acme/widgets");
    EXPECT_THROW(fetch_pr("acme/widgets", 9, PrSourceKind::fixture, by_dir), NotFound);
    EXPECT_THROW(fetch_pr("acme/widgets", 7, PrSourceKind::forge_api, FetchOptions{}), ConfigError);
}

namespace {

void serve_pr(httplib::Server& s, const std::string& merged_at, bool is_private) {
    s.Get("/repos/acme/widgets/pulls/7", [=](const httplib::Request& req, httplib::Response& res) {
        if (req.get_header_value("Accept") == "application/vnd.github.v3.diff") {
            res.set_content("--- a/main.go\n+++ b/main.go\n@@ -1,1 +1,2 @@\n-a\n+b\n+c\n", "text/plain");
            return;
        }
        json meta = {{"user", {{"login", "author1"}}},
                     {"merged_at", merged_at},
                     {"created_at", "2019-05-01T00:00:00Z"},
                     {"base", {{"repo", {{"language", "Go"}, {"private", is_private}}}}}};
        res.set_content(meta.dump(), "application/json");
    });
    s.Get("/repos/acme/widgets/pulls/7/comments", [](const httplib::Request& req, httplib::Response& res) {
        json page = json::array();
        if (req.get_param_value("page") == "1") {
            page.push_back({{"user", {{"login", "alice"}}},
                            {"body", "This drops the error."},
                            {"created_at", "2025-03-01T00:00:02Z"},
                            {"path", "main.go"},
                            {"line", 2},
                            {"side", "RIGHT"}});
            page.push_back({{"user", {{"login", "author1"}}},
                            {"body", "fixed"},
                            {"created_at", "2025-03-01T00:00:03Z"},
                            {"path", "main.go"},
                            {"line", nullptr},
                            {"original_line", 1},
                            {"side", "LEFT"}});
        }
        res.set_content(page.dump(), "application/json");
    });
    s.Get("/repos/acme/widgets/issues/7/comments", [](const httplib::Request&, httplib::Response& res) {
        json page = json::array({{{"user", {{"login", "github-actions"}}},
                                  {"body", "CI passed"},
                                  {"created_at", "2025-03-01T00:00:01Z"}}});
        res.set_content(page.dump(), "application/json");
    });
}

}  // namespace

TEST(Forge, FetchAssemblesRecordFromLocalServer) {
    LocalServer srv;
    serve_pr(srv.server(), "2025-03-02T00:00:00Z", true);
    srv.start();
    ForgeOptions opts;
    opts.base_url = srv.url();
    opts.token = "t";
    ForgeClient forge(opts);
    auto pr = forge.fetch("acme/widgets", 7);
    EXPECT_EQ(pr.language, "Go");
    EXPECT_EQ(pr.visibility, Visibility::internal);
    EXPECT_EQ(pr.era, Era::post_ai);
    EXPECT_EQ(pr.diff.total_changed_lines, 3u);
    ASSERT_EQ(pr.comments.size(), 3u);
    EXPECT_EQ(pr.comments[0].author_handle, "github-actions");
    EXPECT_FALSE(pr.comments[0].anchor.has_value());
    EXPECT_EQ(pr.comments[1].anchor->line, 2u);
    EXPECT_TRUE(pr.comments[2].is_pr_author);
    EXPECT_EQ(pr.comments[2].anchor->side, Side::old_file);
    EXPECT_EQ(extract_human_findings(pr).size(), 1u);
}

TEST(Forge, PreAiEraFromMergeDate) {
    LocalServer srv;
    serve_pr(srv.server(), "2021-06-01T00:00:00Z", false);
    srv.start();
    ForgeOptions opts;
    opts.base_url = srv.url();
    auto pr = ForgeClient(opts).fetch("acme/widgets", 7);
    EXPECT_EQ(pr.era, Era::pre_ai);
    EXPECT_EQ(pr.visibility, Visibility::public_repo);
}

TEST(Forge, StatusErrors) {
    LocalServer srv;
    srv.server().Get("/repos/acme/missing/pulls/1", [](const httplib::Request&, httplib::Response& res) {
        res.status = 404;
    });
    srv.server().Get("/repos/acme/private/pulls/1", [](const httplib::Request&, httplib::Response& res) {
        res.status = 401;
    });
    srv.server().Get("/repos/acme/forbidden/pulls/1", [](const httplib::Request&, httplib::Response& res) {
        res.status = 403;
    });
    int limited_calls = 0;
    srv.server().Get("/repos/acme/busy/pulls/1", [&](const httplib::Request&, httplib::Response& res) {
        ++limited_calls;
        res.status = 403;
        res.set_header("x-ratelimit-remaining", "0");
        res.set_header("retry-after", "3");
    });
    srv.start();
    std::vector<std::chrono::milliseconds> sleeps;
    ForgeOptions opts;
    opts.base_url = srv.url();
    opts.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
    ForgeClient forge(opts);
    EXPECT_THROW(forge.fetch("acme/missing", 1), NotFound);
    EXPECT_THROW(forge.fetch("acme/private", 1), AuthFailure);
    EXPECT_THROW(forge.fetch("acme/forbidden", 1), AuthFailure);
    try {
        forge.fetch("acme/busy", 1);
        FAIL() << "expected RateLimited";
    } catch (const RateLimited& e) {
        EXPECT_EQ(e.retry_after_seconds(), 3);
    }
    EXPECT_EQ(limited_calls, 3);
    ASSERT_EQ(sleeps.size(), 2u);
    EXPECT_EQ(sleeps[0], std::chrono::seconds(3));
}

TEST(Forge, RateLimitThenSuccess) {
    LocalServer srv;
    int calls = 0;
    serve_pr(srv.server(), "2025-03-02T00:00:00Z", false);
    srv.server().Get("/repos/acme/flaky/pulls/1", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls == 1) {
            res.status = 429;
            res.set_header("retry-after", "1");
            return;
        }
        res.status = 404;
    });
    srv.start();
    ForgeOptions opts;
    opts.base_url = srv.url();
    opts.sleep = [](std::chrono::milliseconds) {};
    EXPECT_THROW(ForgeClient(opts).fetch("acme/flaky", 1), NotFound);
    EXPECT_EQ(calls, 2);
}
